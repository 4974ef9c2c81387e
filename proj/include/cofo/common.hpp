#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cofo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data.
struct ParseError : Error {
    using Error::Error;
};

/// Invalid configuration, usage, or an empty/misconfigured dataset.
struct ConfigError : Error {
    using Error::Error;
};

/// A regression or statistic could not be computed from the given data.
struct FitError : Error {
    using Error::Error;
};

/// Precondition violation on an operation's arguments.
struct InvalidArgument : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Worker-thread cap. Parallel sections honor this; results never depend on it
// because all parallel writes go to preallocated, index-addressed slots.

namespace detail {
inline std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{0};  // 0 = use hardware_concurrency
    return cap;
}
}  // namespace detail

inline void set_max_threads(int n) { detail::thread_cap().store(n); }

inline int max_threads() {
    int cap = detail::thread_cap().load();
    if (cap > 0) return cap;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, n). fn must only touch state owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Dense row-major grid with 0-based indices. Domain types wrap this and expose
// their own 1-based accessors.

template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(int r, int c) { return data_[index(r, c)]; }
    const T& operator()(int r, int c) const { return data_[index(r, c)]; }

    const std::vector<T>& data() const { return data_; }

private:
    std::size_t index(int r, int c) const {
        return static_cast<std::size_t>(r) * cols_ + c;
    }
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// Number formatting. Shortest round-trip representation so that artifacts are
// byte-stable across runs.

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Stamped into the first line of every artifact so that runs are traceable
/// to their configuration and master seed.
struct ArtifactMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    std::string comment() const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "# coforecast config=%llx seed=%llu",
                      static_cast<unsigned long long>(config_hash),
                      static_cast<unsigned long long>(seed));
        return buf;
    }
};

// ---------------------------------------------------------------------------
// 64-bit string/value hashing for seed derivation and config fingerprints.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t scramble64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return scramble64(a ^ scramble64(b));
}

/// Stage- or stream-scoped seed derived from a master seed and a label.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return mix64(master, fnv1a64(label));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index) {
    return mix64(derive_seed(master, label), index);
}

}  // namespace cofo
