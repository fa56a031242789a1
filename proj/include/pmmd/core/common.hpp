#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pmmd {

// Invalid user input, config, or shape contract breach. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures at run time (I/O, NaN loss, corrupt files). CLI maps this to exit code 3.
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    format_into(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string strcat_msg(const Args&... args) {
    std::ostringstream os;
    detail::format_into(os, args...);
    return os.str();
}

}  // namespace pmmd

#define PMMD_CHECK(cond, ...)                                             \
    do {                                                                  \
        if (!(cond)) throw ::pmmd::ValidationError(::pmmd::strcat_msg(__VA_ARGS__)); \
    } while (0)

#define PMMD_RUNTIME_CHECK(cond, ...)                                     \
    do {                                                                  \
        if (!(cond)) throw ::pmmd::RuntimeError(::pmmd::strcat_msg(__VA_ARGS__)); \
    } while (0)

namespace pmmd {

// FNV-1a, used to fingerprint configs and shipped text assets.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace pmmd
