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

#include "send/optim.hpp"

#include <cmath>

namespace send {

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state,
               double lr) {
  if (!params.same_layout(grads)) {
    throw DimensionError("adam_step: gradient layout differs from parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads.value(i).allFinite()) {
      throw UpdateError("adam_step: non-finite gradient for '" +
                            grads.name(i) + "'",
                        grads.name(i));
    }
  }
  if (state.first_moment.empty()) {
    state.first_moment = params.zeros_like();
    state.second_moment = params.zeros_like();
  } else if (!state.first_moment.same_layout(params)) {
    throw DimensionError("adam_step: optimizer state layout differs");
  }

  const AdamOptions& o = state.options;
  state.step += 1;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.value(i);
    Tensor& m = state.first_moment.value(i);
    Tensor& v = state.second_moment.value(i);
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseAbs2();
    params.value(i).array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  }
}

double global_norm(const ParamStore& grads) {
  double sq = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    sq += grads.value(i).squaredNorm();
  }
  return std::sqrt(sq);
}

double clip_grad_norm(ParamStore& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) scale_all(grads, max_norm / norm);
  return norm;
}

void accumulate_into(ParamStore& a, const ParamStore& b) {
  if (!a.same_layout(b)) throw DimensionError("accumulate_into: layouts differ");
  for (std::size_t i = 0; i < a.size(); ++i) a.value(i) += b.value(i);
}

void scale_all(ParamStore& a, double s) {
  for (std::size_t i = 0; i < a.size(); ++i) a.value(i) *= s;
}

}  // namespace send
