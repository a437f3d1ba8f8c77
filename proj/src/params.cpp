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

#include "send/params.hpp"

namespace send {

void ParamStore::add(const std::string& name, Tensor value) {
  if (index_.count(name) != 0) {
    throw Error("parameter '" + name + "' already defined");
  }
  index_.emplace(name, values_.size());
  names_.push_back(name);
  values_.push_back(std::move(value));
}

bool ParamStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown parameter '" + name + "'");
  return values_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw IndexError("unknown parameter '" + name + "'");
  return values_[it->second];
}

Eigen::Index ParamStore::numel() const {
  Eigen::Index n = 0;
  for (const Tensor& v : values_) n += v.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (std::size_t i = 0; i < size(); ++i) {
    out.add(names_[i], Tensor::Zero(values_[i].rows(), values_[i].cols()));
  }
  return out;
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (names_[i] != other.names_[i] ||
        values_[i].rows() != other.values_[i].rows() ||
        values_[i].cols() != other.values_[i].cols()) {
      return false;
    }
  }
  return true;
}

std::vector<Var> bind(Tape& tape, const ParamStore& params) {
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    leaves.push_back(tape.leaf(params.value(i)));
  }
  return leaves;
}

ParamStore collect_grads(const ParamStore& params,
                         std::span<const Var> leaves) {
  if (leaves.size() != params.size()) {
    throw DimensionError("collect_grads: " + std::to_string(leaves.size()) +
                         " leaves for " + std::to_string(params.size()) +
                         " parameters");
  }
  ParamStore grads;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = leaves[i].grad();
    if (g.size() == 0) {
      grads.add(params.name(i), Tensor::Zero(params.value(i).rows(),
                                             params.value(i).cols()));
    } else {
      grads.add(params.name(i), g);
    }
  }
  return grads;
}

}  // namespace send
