// Copyright 2026-present the diga authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace diga {

/// Base of every exception thrown by the library. The subclass tells the
/// CLI which exit code to use.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration, detected before any work starts.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {
    }

    std::size_t
    line() const noexcept {
        return line_;
    }

private:
    std::size_t line_;
};

class DuplicateIdError : public Error {
public:
    using Error::Error;
};

/// Runtime failure of a computation (empty corpus, zero-norm vector, ...).
class ComputationError : public Error {
public:
    using Error::Error;
};

/// Network failure after all retries.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The remote side answered, but not according to the wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace diga
