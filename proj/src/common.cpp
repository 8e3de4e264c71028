// SPDX-License-Identifier: Apache-2.0
#include "spamnet/common.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spamnet {

// splitmix64
std::uint64_t Rng::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    Rng r(base ^ (salt * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL));
    r.next();
    return r.next();
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nthreads = std::min(workers, n);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
        std::vector<std::jthread> pool;
        pool.reserve(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                        cursor.store(n);
                        return;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace spamnet
