#include "resfi/crypto.hpp"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/param_build.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

namespace resfi::crypto {

namespace {

[[noreturn]] void fail(const char* what) {
    throw std::runtime_error(std::string("crypto: ") + what);
}

struct BnDeleter { void operator()(BIGNUM* p) const { BN_free(p); } };
struct CtxDeleter { void operator()(BN_CTX* p) const { BN_CTX_free(p); } };
struct PkeyDeleter { void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); } };
struct PkeyCtxDeleter { void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); } };
struct MdCtxDeleter { void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); } };
struct CipherCtxDeleter { void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); } };

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

// SHA-256 counter generator used for deterministic prime search.  Not a
// general-purpose DRBG; it only has to be stable across builds.
class SeedStream {
public:
    explicit SeedStream(uint64_t seed) {
        uint8_t block[8];
        for (int i = 0; i < 8; ++i) block[i] = uint8_t(seed >> (56 - 8 * i));
        state_ = sha256(ByteView(block, 8));
    }

    void fill(uint8_t* out, size_t n) {
        while (n > 0) {
            Bytes in(state_);
            for (int i = 0; i < 8; ++i) in.push_back(uint8_t(counter_ >> (56 - 8 * i)));
            ++counter_;
            Bytes block = sha256(in);
            size_t take = n < block.size() ? n : block.size();
            std::memcpy(out, block.data(), take);
            out += take;
            n -= take;
        }
    }

private:
    Bytes state_;
    uint64_t counter_ = 0;
};

BnPtr derive_prime(SeedStream& stream, BN_CTX* ctx) {
    uint8_t buf[64]; // 512 bits
    BnPtr p(BN_new());
    for (;;) {
        stream.fill(buf, sizeof buf);
        buf[0] |= 0xc0;             // top two bits: product is exactly 1024 bits
        buf[sizeof buf - 1] |= 0x01; // odd
        if (!BN_bin2bn(buf, sizeof buf, p.get())) fail("BN_bin2bn");
        int rc = BN_check_prime(p.get(), ctx, nullptr);
        if (rc < 0) fail("BN_check_prime");
        if (rc == 1) {
            // e = 65537 must be invertible mod p-1
            BnPtr rem(BN_new());
            BnPtr pm1(BN_dup(p.get()));
            BnPtr e(BN_new());
            BN_sub_word(pm1.get(), 1);
            BN_set_word(e.get(), 65537);
            if (!BN_mod(rem.get(), pm1.get(), e.get(), ctx)) fail("BN_mod");
            if (!BN_is_zero(rem.get())) return p;
        }
    }
}

PkeyPtr assemble_rsa(const BIGNUM* p, const BIGNUM* q, BN_CTX* ctx) {
    BnPtr n(BN_new()), e(BN_new()), d(BN_new());
    BnPtr pm1(BN_dup(p)), qm1(BN_dup(q)), phi(BN_new());
    BnPtr dmp1(BN_new()), dmq1(BN_new()), iqmp(BN_new());
    BN_set_word(e.get(), 65537);
    BN_sub_word(pm1.get(), 1);
    BN_sub_word(qm1.get(), 1);
    if (!BN_mul(n.get(), p, q, ctx)) fail("BN_mul n");
    if (!BN_mul(phi.get(), pm1.get(), qm1.get(), ctx)) fail("BN_mul phi");
    if (!BN_mod_inverse(d.get(), e.get(), phi.get(), ctx)) fail("BN_mod_inverse d");
    if (!BN_mod(dmp1.get(), d.get(), pm1.get(), ctx)) fail("BN_mod dmp1");
    if (!BN_mod(dmq1.get(), d.get(), qm1.get(), ctx)) fail("BN_mod dmq1");
    if (!BN_mod_inverse(iqmp.get(), q, p, ctx)) fail("BN_mod_inverse iqmp");

    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    if (!bld) fail("OSSL_PARAM_BLD_new");
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_N, n.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_E, e.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_D, d.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_FACTOR1, p);
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_FACTOR2, q);
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_EXPONENT1, dmp1.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_EXPONENT2, dmq1.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_COEFFICIENT1, iqmp.get());
    OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
    OSSL_PARAM_BLD_free(bld);
    if (!params) fail("OSSL_PARAM_BLD_to_param");

    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> kctx(
        EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    EVP_PKEY* raw = nullptr;
    int ok = kctx && EVP_PKEY_fromdata_init(kctx.get()) == 1 &&
             EVP_PKEY_fromdata(kctx.get(), &raw, EVP_PKEY_KEYPAIR, params) == 1;
    OSSL_PARAM_free(params);
    if (!ok || !raw) fail("EVP_PKEY_fromdata");
    return PkeyPtr(raw);
}

Bytes public_der_of(EVP_PKEY* key) {
    int len = i2d_PUBKEY(key, nullptr);
    if (len <= 0) fail("i2d_PUBKEY");
    Bytes out = Bytes(size_t(len));
    uint8_t* ptr = out.data();
    i2d_PUBKEY(key, &ptr);
    return out;
}

Bytes private_der_of(EVP_PKEY* key) {
    int len = i2d_PrivateKey(key, nullptr);
    if (len <= 0) fail("i2d_PrivateKey");
    Bytes out = Bytes(size_t(len));
    uint8_t* ptr = out.data();
    i2d_PrivateKey(key, &ptr);
    return out;
}

PkeyPtr parse_public(ByteView der) {
    const uint8_t* ptr = der.data();
    EVP_PKEY* raw = d2i_PUBKEY(nullptr, &ptr, long(der.size()));
    return PkeyPtr(raw);
}

PkeyPtr parse_private(ByteView der) {
    const uint8_t* ptr = der.data();
    EVP_PKEY* raw = d2i_PrivateKey(EVP_PKEY_RSA, nullptr, &ptr, long(der.size()));
    return PkeyPtr(raw);
}

Bytes hmac_sha256(ByteView key, ByteView data) {
    uint8_t mac[EVP_MAX_MD_SIZE];
    unsigned int mac_len = 0;
    if (!HMAC(EVP_sha256(), key.data(), int(key.size()), data.data(), data.size(), mac,
              &mac_len))
        fail("HMAC");
    return Bytes(mac, mac + mac_len);
}

Bytes integrity_key(const GroupKey& gk) {
    Bytes material;
    material.insert(material.end(), gk.key.begin(), gk.key.end());
    material.insert(material.end(), gk.iv.begin(), gk.iv.end());
    Bytes label = to_bytes("integrity");
    material.insert(material.end(), label.begin(), label.end());
    return sha256(material);
}

Bytes cfb_apply(const GroupKey& gk, ByteView in, bool encrypt) {
    std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_CipherInit_ex(ctx.get(), EVP_aes_128_cfb128(), nullptr, gk.key.data(),
                          gk.iv.data(), encrypt ? 1 : 0) != 1)
        fail("EVP_CipherInit_ex");
    Bytes out(in.size() + 16);
    int len1 = 0, len2 = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len1, in.data(), int(in.size())) != 1)
        fail("EVP_CipherUpdate");
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + len1, &len2) != 1)
        fail("EVP_CipherFinal_ex");
    out.resize(size_t(len1 + len2));
    return out;
}

} // namespace

Bytes GroupKey::serialize() const {
    Bytes out;
    out.reserve(kGroupKeyOctets);
    out.insert(out.end(), key.begin(), key.end());
    out.insert(out.end(), iv.begin(), iv.end());
    return out;
}

std::optional<GroupKey> GroupKey::deserialize(ByteView material, uint64_t epoch) {
    if (material.size() != kGroupKeyOctets) return std::nullopt;
    GroupKey gk;
    std::memcpy(gk.key.data(), material.data(), 16);
    std::memcpy(gk.iv.data(), material.data() + 16, 16);
    gk.epoch = epoch;
    return gk;
}

IdentityKeypair generate_identity(uint64_t seed) {
    static std::mutex cache_mutex;
    static std::map<uint64_t, IdentityKeypair> cache;
    {
        std::lock_guard lock(cache_mutex);
        auto it = cache.find(seed);
        if (it != cache.end()) return it->second;
    }

    std::unique_ptr<BN_CTX, CtxDeleter> ctx(BN_CTX_new());
    SeedStream stream(seed);
    BnPtr p = derive_prime(stream, ctx.get());
    BnPtr q = derive_prime(stream, ctx.get());
    while (BN_cmp(p.get(), q.get()) == 0) q = derive_prime(stream, ctx.get());
    PkeyPtr key = assemble_rsa(p.get(), q.get(), ctx.get());

    IdentityKeypair pair{public_der_of(key.get()), private_der_of(key.get())};
    if (pair.public_der.size() != kPublicKeyDerOctets)
        fail("unexpected public key encoding size");

    std::lock_guard lock(cache_mutex);
    cache.emplace(seed, pair);
    return pair;
}

GroupKey generate_group_key(Rng& rng, uint64_t epoch) {
    GroupKey gk;
    rng.fill(gk.key.data(), gk.key.size());
    rng.fill(gk.iv.data(), gk.iv.size());
    gk.epoch = epoch;
    return gk;
}

Bytes seal_group(ByteView plaintext, const GroupKey& gk) {
    Bytes ct = cfb_apply(gk, plaintext, true);
    Bytes tag = hmac_sha256(integrity_key(gk), ct);
    ct.insert(ct.end(), tag.begin(), tag.begin() + kTagOctets);
    return ct;
}

std::optional<Bytes> open_group(ByteView sealed, const GroupKey& gk) {
    if (sealed.size() < kTagOctets) return std::nullopt;
    ByteView ct = sealed.first(sealed.size() - kTagOctets);
    ByteView tag = sealed.last(kTagOctets);
    Bytes expected = hmac_sha256(integrity_key(gk), ct);
    if (CRYPTO_memcmp(expected.data(), tag.data(), kTagOctets) != 0) return std::nullopt;
    return cfb_apply(gk, ct, false);
}

Bytes seal_unicast(ByteView plaintext, ByteView receiver_public_der, Rng& rng) {
    PkeyPtr pub = parse_public(receiver_public_der);
    if (!pub) throw std::invalid_argument("seal_unicast: bad public key");

    // KEM: a random value below the modulus carried with raw RSA; the DEM
    // credential is derived from it by hashing.
    uint8_t r[kKemOctets];
    r[0] = 0;
    rng.fill(r + 1, sizeof r - 1);

    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ectx(
        EVP_PKEY_CTX_new(pub.get(), nullptr));
    if (!ectx || EVP_PKEY_encrypt_init(ectx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(ectx.get(), RSA_NO_PADDING) != 1)
        fail("encrypt init");
    size_t clen = kKemOctets;
    Bytes c1(kKemOctets);
    if (EVP_PKEY_encrypt(ectx.get(), c1.data(), &clen, r, sizeof r) != 1 ||
        clen != kKemOctets)
        fail("EVP_PKEY_encrypt");

    Bytes material(r, r + sizeof r);
    Bytes label = to_bytes("dem");
    material.insert(material.end(), label.begin(), label.end());
    Bytes h = sha256(material);
    GroupKey dem;
    std::memcpy(dem.key.data(), h.data(), 16);
    std::memcpy(dem.iv.data(), h.data() + 16, 16);

    Bytes out = std::move(c1);
    Bytes c2 = seal_group(plaintext, dem);
    out.insert(out.end(), c2.begin(), c2.end());
    return out;
}

std::optional<Bytes> open_unicast(ByteView sealed, ByteView receiver_private_der) {
    if (sealed.size() < kKemOctets + kTagOctets) return std::nullopt;
    PkeyPtr priv = parse_private(receiver_private_der);
    if (!priv) return std::nullopt;

    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> dctx(
        EVP_PKEY_CTX_new(priv.get(), nullptr));
    if (!dctx || EVP_PKEY_decrypt_init(dctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(dctx.get(), RSA_NO_PADDING) != 1)
        return std::nullopt;
    uint8_t r[kKemOctets];
    size_t rlen = sizeof r;
    if (EVP_PKEY_decrypt(dctx.get(), r, &rlen, sealed.data(), kKemOctets) != 1 ||
        rlen != kKemOctets)
        return std::nullopt;

    Bytes material(r, r + sizeof r);
    Bytes label = to_bytes("dem");
    material.insert(material.end(), label.begin(), label.end());
    Bytes h = sha256(material);
    GroupKey dem;
    std::memcpy(dem.key.data(), h.data(), 16);
    std::memcpy(dem.iv.data(), h.data() + 16, 16);

    return open_group(sealed.subspan(kKemOctets), dem);
}

Bytes sign(ByteView data, ByteView private_der) {
    PkeyPtr priv = parse_private(private_der);
    if (!priv) throw std::invalid_argument("sign: bad private key");
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx ||
        EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, priv.get()) != 1)
        fail("EVP_DigestSignInit");
    size_t sig_len = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &sig_len, data.data(), data.size()) != 1)
        fail("EVP_DigestSign size");
    Bytes sig(sig_len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, data.data(), data.size()) != 1)
        fail("EVP_DigestSign");
    sig.resize(sig_len);
    return sig;
}

bool verify(ByteView data, ByteView signature, ByteView public_der) {
    PkeyPtr pub = parse_public(public_der);
    if (!pub) return false;
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx ||
        EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pub.get()) != 1)
        return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), data.data(),
                            data.size()) == 1;
}

Bytes sha256(ByteView data) {
    uint8_t digest[32];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
        fail("EVP_Digest");
    return Bytes(digest, digest + len);
}

} // namespace resfi::crypto
