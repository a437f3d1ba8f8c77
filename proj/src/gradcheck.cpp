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

#include "send/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace send {

namespace {

double evaluate(const ScalarFn& f, const ParamStore& point) {
  Tape tape;
  std::vector<Var> leaves = bind(tape, point);
  Var out = f(tape, leaves);
  if (out.rows() != 1 || out.cols() != 1) {
    throw CheckError("grad_check: objective must be 1x1");
  }
  const double v = out.value()(0, 0);
  if (!std::isfinite(v)) throw CheckError("grad_check: non-finite objective");
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const ParamStore& point,
                           double eps) {
  if (!(eps > 0.0)) throw CheckError("grad_check: eps must be positive");

  Tape tape;
  std::vector<Var> leaves = bind(tape, point);
  Var out = f(tape, leaves);
  if (out.rows() != 1 || out.cols() != 1) {
    throw CheckError("grad_check: objective must be 1x1");
  }
  if (!std::isfinite(out.value()(0, 0))) {
    throw CheckError("grad_check: non-finite objective");
  }
  tape.backward(out);
  ParamStore analytic = collect_grads(point, leaves);

  GradCheckResult result;
  ParamStore probe = point;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    Tensor& x = probe.value(p);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double saved = x.data()[i];
      x.data()[i] = saved + eps;
      const double up = evaluate(f, probe);
      x.data()[i] = saved - eps;
      const double down = evaluate(f, probe);
      x.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic.value(p).data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = std::max(rel, result.max_rel_error);
        result.worst_param = probe.name(p);
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace send
