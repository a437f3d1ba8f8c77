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

#ifndef SEND_PARAMS_HPP_
#define SEND_PARAMS_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "send/autograd.hpp"

namespace send {

/// Ordered collection of named tensors. Insertion order is the canonical
/// order for serialization and for gradient reduction.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& value(std::size_t i) { return values_[i]; }
  const Tensor& value(std::size_t i) const { return values_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  /// Total scalar count.
  Eigen::Index numel() const;

  /// Same names and shapes, all zeros.
  ParamStore zeros_like() const;

  /// True when names and shapes agree entry by entry.
  bool same_layout(const ParamStore& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Places every parameter on the tape as a gradient-carrying leaf.
std::vector<Var> bind(Tape& tape, const ParamStore& params);

/// Reads leaf gradients back into a store laid out like `params`. Leaves
/// the backward pass never reached contribute zeros.
ParamStore collect_grads(const ParamStore& params, std::span<const Var> leaves);

}  // namespace send

#endif  // SEND_PARAMS_HPP_
