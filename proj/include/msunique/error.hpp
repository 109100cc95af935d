// Copyright 2026 The MS-UNIQUE Authors. All Rights Reserved.
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

#ifndef MSUNIQUE_ERROR_HPP_
#define MSUNIQUE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace msunique {

// Invalid input data: malformed files, mismatched shapes, degenerate
// statistics. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A persisted artifact (model bank) failed validation. Maps to exit code 3.
class CorruptArtifact : public std::runtime_error {
 public:
  explicit CorruptArtifact(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace msunique

#endif  // MSUNIQUE_ERROR_HPP_
