// Copyright 2026 The detoxcorp Authors
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
#include <utility>

namespace detox {

// Root of every error the library throws. Callers that only need to
// distinguish "ours" from std failures catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A declared column / key is absent from a source row.
class SchemaError : public Error {
 public:
  SchemaError(std::string column, std::size_t line)
      : Error("missing column '" + column + "' at line " + std::to_string(line)),
        column_(std::move(column)),
        line_(line) {}

  const std::string& column() const noexcept { return column_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string column_;
  std::size_t line_;
};

class EmptySourceError : public Error {
 public:
  using Error::Error;
};

class PolicyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Retry budget exhausted on a transient failure. status 0 means timeout or
// connection failure.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int last_status, int attempts)
      : Error(what), last_status_(last_status), attempts_(attempts) {}

  int last_status() const noexcept { return last_status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int last_status_;
  int attempts_;
};

// Non-retryable rejection (4xx other than 429, or a request that can never
// be sent such as a missing credential).
class RequestError : public Error {
 public:
  RequestError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class VerdictError : public Error {
 public:
  using Error::Error;
};

class ServiceError : public Error {
 public:
  using Error::Error;
};

class GateError : public Error {
 public:
  using Error::Error;
};

class ResumeError : public Error {
 public:
  using Error::Error;
};

}  // namespace detox
