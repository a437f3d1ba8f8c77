// Copyright (c) 2026 The send-diar Authors
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

#ifndef SEND_ERROR_HPP_
#define SEND_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace send {

/// Base of every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Raised when a frame has more active speakers than the codec admits.
class CardinalityError : public Error {
 public:
  CardinalityError(const std::string& what, unsigned mask, long frame = -1)
      : Error(what), mask_(mask), frame_(frame) {}
  unsigned mask() const { return mask_; }
  long frame() const { return frame_; }

 private:
  unsigned mask_;
  long frame_;
};

class UpdateError : public Error {
 public:
  UpdateError(const std::string& what, std::string param)
      : Error(what), param_(std::move(param)) {}
  const std::string& param() const { return param_; }

 private:
  std::string param_;
};

class CheckError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace send

#endif  // SEND_ERROR_HPP_
