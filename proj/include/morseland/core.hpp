#ifndef MORSELAND_CORE_HPP
#define MORSELAND_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace morseland {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int max_dimension = 64;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Point outside the landscape domain (or outside an activation range).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non positive-definite metric, singular system, etc.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration: unknown builtin id, wrong parameter arity.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid input to an operation (precondition violated by the caller).
class InputError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public Error {
public:
    using Error::Error;
};

class NotCriticalError : public Error {
public:
    using Error::Error;
};

/// Flow left the domain. Carries the first point found outside.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Vec exit_point)
        : Error(what), exit_point_(std::move(exit_point)) {}
    const Vec& exit_point() const noexcept { return exit_point_; }

private:
    Vec exit_point_;
};

/// Stochastic path could not be kept inside the domain by redrawing.
class ConfinementError : public Error {
public:
    using Error::Error;
};

inline std::string format_point(const Vec& x) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", x[i]);
        s += buf;
    }
    return s + ")";
}

// ---------------------------------------------------------------------------
// Threading
// ---------------------------------------------------------------------------

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{0};
    return n;
}
}  // namespace detail

/// Worker count used by parallel_for. 0 means "read MORSELAND_THREADS, else 1".
inline void set_thread_count(int n) { detail::thread_count_slot().store(std::max(0, n)); }

inline int thread_count() {
    int n = detail::thread_count_slot().load();
    if (n > 0) return n;
    if (const char* env = std::getenv("MORSELAND_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; results
/// must be written to per-index slots so output does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

/// Van der Corput radical inverse, used for quasi-random seeds and directions.
inline double radical_inverse(std::uint64_t i, std::uint32_t base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

inline std::uint32_t nth_prime(int k) {
    static constexpr std::uint32_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                               59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
    return primes[static_cast<std::size_t>(k) % (sizeof primes / sizeof primes[0])];
}

/// Halton point in [0,1)^dim.
inline Vec halton(std::uint64_t i, int dim) {
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = radical_inverse(i + 1, nth_prime(d));
    return p;
}

}  // namespace morseland

#endif
