// Copyright 2026 The mipt-decoder Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mipt {

/// Argument outside the mathematical domain of an operation (bad gamma,
/// overlapping index sets, mismatched shapes).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a fixed resource guard (qubit count, enumeration size).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical self-check failed (probability outside [0,1], negative variance).
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Autodiff graph misuse, e.g. backward twice or after a parameter update.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Non-finite activation inside a model forward pass.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during optimisation.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or incompatible file contents.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mipt
