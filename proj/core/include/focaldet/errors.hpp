/* Copyright 2026 The focaldet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FOCALDET_ERRORS_HPP_
#define FOCALDET_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace focaldet {

/// Violated precondition, postcondition or type invariant. The CLI maps this
/// to exit code 2.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Unusable external input: files, flags, configuration. The CLI maps this to
/// exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace focaldet

#endif  // FOCALDET_ERRORS_HPP_
