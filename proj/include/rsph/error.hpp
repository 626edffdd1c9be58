#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsph {

/// Hard failure of a simulation stage (overflow, density collapse, divergence).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

class DensityError : public Error {
public:
    DensityError(std::size_t particle, double density)
        : Error("non-positive density " + std::to_string(density) + " at particle " +
                std::to_string(particle)),
          particle_(particle) {}

    std::size_t particle() const noexcept { return particle_; }

private:
    std::size_t particle_;
};

inline void require(bool condition, const char* what) {
    if (!condition) {
        throw ContractViolation(what);
    }
}

} // namespace rsph
