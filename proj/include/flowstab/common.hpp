// Copyright 2026 The flowstab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWSTAB_COMMON_HPP_
#define FLOWSTAB_COMMON_HPP_

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace flowstab {

/// Base class of every error raised by the library. The category maps onto
/// the process exit code used by the command-line tool.
class Error : public std::runtime_error {
public:
    enum class Category { Config = 2, Numerical = 3, Io = 4 };

    Error(Category category, const std::string &what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }
    int exitCode() const noexcept { return static_cast<int>(category_); }

private:
    Category category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string &what) : Error(Category::Config, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string &what) : Error(Category::Numerical, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string &what) : Error(Category::Io, what) {}
};

namespace detail {

inline std::function<void(std::string_view)> &warningSink() {
    static std::function<void(std::string_view)> sink = [](std::string_view msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return sink;
}

inline std::mutex &warningMutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// Replace the warning handler. Passing an empty function silences warnings.
inline void setWarningHandler(std::function<void(std::string_view)> handler) {
    std::lock_guard lock(detail::warningMutex());
    detail::warningSink() = std::move(handler);
}

inline void warn(std::string_view msg) {
    std::lock_guard lock(detail::warningMutex());
    if (detail::warningSink())
        detail::warningSink()(msg);
}

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mixSeed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mixSeed(mixSeed(mixSeed(master) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

/// Uniform integer in [0, bound) from a 64-bit engine. Unlike
/// std::uniform_int_distribution the result is identical across standard
/// library implementations.
template <typename Engine>
std::uint64_t uniformBelow(Engine &eng, std::uint64_t bound) {
    if (bound <= 1)
        return 0;
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % bound);
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
template <typename Engine>
double uniformUnit(Engine &eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <typename T, typename Engine>
void shuffle(std::vector<T> &v, Engine &eng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[uniformBelow(eng, i)]);
}

/// Run body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any worker is rethrown.
inline void parallelFor(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &body) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failureMutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

/// Fixed 17-significant-digit rendering shared by every numeric output.
inline std::string formatDouble(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

} // namespace flowstab

#endif // FLOWSTAB_COMMON_HPP_
