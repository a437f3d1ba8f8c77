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

#ifndef SEND_OPTIM_HPP_
#define SEND_OPTIM_HPP_

#include "send/params.hpp"

namespace send {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators are created on the first step with the parameter
/// layout; later steps require the same layout.
struct AdamState {
  AdamOptions options;
  long step = 0;
  ParamStore first_moment;
  ParamStore second_moment;
};

/// One bias-corrected Adam update. Validates every gradient before touching
/// any parameter, so a failed call leaves params and state unchanged.
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state,
               double lr);

double global_norm(const ParamStore& grads);

/// Rescales grads in place so their global L2 norm is at most max_norm.
/// Returns the norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(ParamStore& grads, double max_norm);

/// a += b, entry by entry.
void accumulate_into(ParamStore& a, const ParamStore& b);
void scale_all(ParamStore& a, double s);

}  // namespace send

#endif  // SEND_OPTIM_HPP_
