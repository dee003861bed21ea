#ifndef RESFI_CRYPTO_HPP
#define RESFI_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <optional>

#include "resfi/bytes.hpp"
#include "resfi/rng.hpp"

namespace resfi::crypto {

// Wire-visible sizes.  The discovery element layout depends on these being
// exact, so they are asserted at encode time rather than assumed.
inline constexpr size_t kGroupKeyOctets = 32;     // 16 key + 16 IV
inline constexpr size_t kPublicKeyDerOctets = 162; // RSA-1024 SubjectPublicKeyInfo
inline constexpr size_t kSignatureOctets = 128;
inline constexpr size_t kKemOctets = 128;
inline constexpr size_t kTagOctets = 16;

// Symmetric group credential an AP hands to its neighbors: AES-128 key plus
// IV, distributed together as one 32-octet blob.  `epoch` counts rotations
// locally; it never goes on the wire.
struct GroupKey {
    std::array<uint8_t, 16> key{};
    std::array<uint8_t, 16> iv{};
    uint64_t epoch = 0;

    Bytes serialize() const;
    static std::optional<GroupKey> deserialize(ByteView material, uint64_t epoch = 0);

    bool same_material(const GroupKey& other) const {
        return key == other.key && iv == other.iv;
    }
};

struct IdentityKeypair {
    Bytes public_der;  // SubjectPublicKeyInfo, exactly kPublicKeyDerOctets
    Bytes private_der; // RSAPrivateKey
};

// Deterministic RSA-1024 keypair from a seed.  Prime search runs a SHA-256
// counter DRBG, so the same seed always yields the same key; results are
// memoized process-wide because emulation runs re-use AP seeds heavily.
IdentityKeypair generate_identity(uint64_t seed);

GroupKey generate_group_key(Rng& rng, uint64_t epoch);

// Authenticated group sealing: AES-128-CFB followed by a 16-octet truncated
// HMAC-SHA256 tag keyed off the group credential.  open_group returns
// nullopt on any mismatch (wrong key, truncation, bit flips).
Bytes seal_group(ByteView plaintext, const GroupKey& gk);
std::optional<Bytes> open_group(ByteView sealed, const GroupKey& gk);

// Unicast sealing to one receiver's public key (KEM + DEM over RSA): only
// the holder of the matching private key can open.  Randomness comes from
// the caller's stream so runs stay reproducible.
Bytes seal_unicast(ByteView plaintext, ByteView receiver_public_der, Rng& rng);
std::optional<Bytes> open_unicast(ByteView sealed, ByteView receiver_private_der);

// PKCS#1 v1.5 signatures over SHA-256.
Bytes sign(ByteView data, ByteView private_der);
bool verify(ByteView data, ByteView signature, ByteView public_der);

Bytes sha256(ByteView data);

} // namespace resfi::crypto

#endif
