// core/common.hpp

// Copyright 2026 The voiceface Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VF_CORE_COMMON_HPP_
#define VF_CORE_COMMON_HPP_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vf {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using u32 = std::uint32_t;
using u8 = std::uint8_t;

// Error taxonomy. Every failure mode maps onto one of these; the CLI
// translates them into exit codes (usage/config -> 2, runtime -> 1).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};
struct InputError : Error {
  explicit InputError(const std::string& msg) : Error("input error: " + msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error("numeric error: " + msg) {}
};
struct StateError : Error {
  explicit StateError(const std::string& msg) : Error("state error: " + msg) {}
};

namespace detail {
template <typename E>
[[noreturn]] inline void throw_error(const char* cond, const char* file, int line,
                                     const std::string& msg) {
  std::ostringstream os;
  os << msg;
  if (cond != nullptr) os << " [" << cond << " failed at " << file << ":" << line << "]";
  throw E(os.str());
}
}  // namespace detail

#define VF_CHECK(cond, msg)                                                       \
  do {                                                                            \
    if (!(cond)) ::vf::detail::throw_error<::vf::Error>(#cond, __FILE__, __LINE__, (msg)); \
  } while (0)

#define VF_CHECK_CONFIG(cond, msg)                                                \
  do {                                                                            \
    if (!(cond)) ::vf::detail::throw_error<::vf::ConfigError>(nullptr, __FILE__, __LINE__, (msg)); \
  } while (0)

#define VF_CHECK_INPUT(cond, msg)                                                 \
  do {                                                                            \
    if (!(cond)) ::vf::detail::throw_error<::vf::InputError>(nullptr, __FILE__, __LINE__, (msg)); \
  } while (0)

#define VF_CHECK_STATE(cond, msg)                                                 \
  do {                                                                            \
    if (!(cond)) ::vf::detail::throw_error<::vf::StateError>(nullptr, __FILE__, __LINE__, (msg)); \
  } while (0)

#define VF_CHECK_NUMERIC(cond, msg)                                               \
  do {                                                                            \
    if (!(cond)) ::vf::detail::throw_error<::vf::NumericError>(nullptr, __FILE__, __LINE__, (msg)); \
  } while (0)

}  // namespace vf

#endif  // VF_CORE_COMMON_HPP_
