/*
 * Copyright 2026 The RLT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RLT_COMMON_H_
#define RLT_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlt {

inline constexpr char kToolkitVersion[] = "1.0.0";

// All recoverable failures in the toolkit are reported with this type. The
// message is meant to be shown to a user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Whole-file helpers; both throw Error naming the path on failure.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace rlt

#endif  // RLT_COMMON_H_
