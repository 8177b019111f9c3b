#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ridepool {

// Invalid configuration values (dimensions, rates, schedules, file syntax).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Contract violations on otherwise valid objects (bad zone id, empty path,
// missing stops, out-of-order route).
class DomainError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite values escaping a numeric routine.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A simulation invariant broke mid-run; carries a diagnostic dump.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// splitmix64: derives independent sub-seeds from one master seed so that
// demand, fleet layout, and exploration use decoupled streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace ridepool
