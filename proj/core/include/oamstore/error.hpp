// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OAMSTORE_ERROR_HPP
#define OAMSTORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace oamstore {

/// Invalid input from the caller: bad parameters, malformed files, bad config.
/// The command-line tool maps this to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An estimator could not produce a value from the data it was given
/// (zero denominators, singular systems, empty peaks). Exit code 2.
class EstimatorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oamstore

#endif
