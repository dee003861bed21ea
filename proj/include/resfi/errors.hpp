#ifndef RESFI_ERRORS_HPP
#define RESFI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace resfi {

// Bad scenario/topology/parameter input.  The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A cross-cutting run invariant failed (counter identities, FIFO order, ...).
// The CLI maps this to exit code 3.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace resfi

#endif
