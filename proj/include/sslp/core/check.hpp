#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace sslp {

// Raised when a config file fails to parse or validate (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a runtime contract is violated mid-computation, e.g. a
// non-finite loss or a broken invariant (CLI exit code 4). Plain
// std::runtime_error maps to exit code 3.
struct AssertionFailure : std::runtime_error {
  explicit AssertionFailure(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
template <class E, class... Args>
[[noreturn]] void raise(const char* file, int line, Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  os << " [" << file << ":" << line << "]";
  throw E(os.str());
}
}  // namespace detail

}  // namespace sslp

#define SSLP_CHECK(cond, ...)                                                 \
  do {                                                                        \
    if (!(cond))                                                              \
      ::sslp::detail::raise<std::runtime_error>(__FILE__, __LINE__,           \
                                                __VA_ARGS__);                 \
  } while (0)

#define SSLP_CONFIG_CHECK(cond, ...)                                          \
  do {                                                                        \
    if (!(cond))                                                              \
      ::sslp::detail::raise<::sslp::ConfigError>(__FILE__, __LINE__,          \
                                                 __VA_ARGS__);                \
  } while (0)

#define SSLP_ASSERT(cond, ...)                                                \
  do {                                                                        \
    if (!(cond))                                                              \
      ::sslp::detail::raise<::sslp::AssertionFailure>(__FILE__, __LINE__,     \
                                                      __VA_ARGS__);           \
  } while (0)
