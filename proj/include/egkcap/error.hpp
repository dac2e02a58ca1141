// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace egkcap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (pole, zero argument, bad parameter).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not reach its requested accuracy.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Integral or series that does not converge for the given arguments.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Caller supplied data violating a documented contract.
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace egkcap
