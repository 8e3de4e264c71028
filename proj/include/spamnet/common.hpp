// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spamnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when input data violates a format or corpus contract. The CLI maps
/// this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Seeded 64-bit generator with platform-independent derived draws.
///
/// std::uniform_*_distribution is implementation-defined, so everything that
/// has to be byte-reproducible goes through these helpers instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in the open interval (0, 1).
    double uniform_open();
    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

    template <typename Container>
    void shuffle(Container& c) {
        for (std::size_t i = c.size(); i > 1; --i) {
            std::size_t j = below(i);
            using std::swap;
            swap(c[i - 1], c[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
/// independent; results are expected to be written to per-index slots.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Parses a double written by format_double (or any plain decimal).
double parse_double(std::string_view s);

}  // namespace spamnet
