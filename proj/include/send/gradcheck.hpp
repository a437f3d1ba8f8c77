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

#ifndef SEND_GRADCHECK_HPP_
#define SEND_GRADCHECK_HPP_

#include <functional>
#include <string>

#include "send/params.hpp"

namespace send {

/// Builds a 1x1 objective on `tape` from leaves bound in ParamStore order.
using ScalarFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  Eigen::Index checked = 0;
};

/// Compares reverse-mode gradients with central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every scalar in `point`.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckResult grad_check(const ScalarFn& f, const ParamStore& point,
                           double eps);

}  // namespace send

#endif  // SEND_GRADCHECK_HPP_
