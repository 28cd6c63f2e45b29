// Copyright 2026 The cisimkit Authors.
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

#include "cisimkit/fcn/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "cisimkit/fcn/conv.h"

namespace cisimkit::fcn {
namespace {

// Objective value plus everything that decides which branch of a
// piecewise-defined operation was taken.
struct Probe {
  double objective = 0.0;
  std::vector<char> pattern;
};

Probe Evaluate(const FcnModel& model, const Utterance& u, double alpha, metrics::StoiEvaluator& stoi,
               const metrics::StoiEvaluator::Reference& ref) {
  Probe p;
  std::vector<double> cur = u.noisy;
  const std::size_t n = cur.size();
  for (int i = 0; i < model.num_layers(); ++i) {
    const LayerSpec& l = model.architecture().layers[i];
    std::vector<double> out(static_cast<std::size_t>(l.filters) * n);
    ConvForward({model.in_channels(i), l.filters, l.filter_len, n, ConvMode::kSame}, cur.data(), model.weights(i),
                model.biases(i), out.data());
    if (l.activation == Activation::kLeakyRelu) {
      for (double& v : out) {
        p.pattern.push_back(v > 0.0 ? 1 : 0);
        if (v <= 0.0) v *= kLeakySlope;
      }
    } else if (l.activation == Activation::kTanh) {
      for (double& v : out) v = std::tanh(v);
    }
    cur = std::move(out);
  }
  p.objective = Objective(u.clean, cur, alpha, stoi).objective;
  const std::vector<char> clip = stoi.ClipPattern(ref, cur);
  p.pattern.insert(p.pattern.end(), clip.begin(), clip.end());
  return p;
}

}  // namespace

GradCheckResult CheckGradient(const FcnModel& model, const Utterance& utt, double alpha, double h, double abs_floor) {
  const Utterance* batch[] = {&utt};
  const BatchGradient analytic = ComputeGradient(model, batch, alpha);
  metrics::StoiEvaluator stoi({}, utt.sample_rate);
  const metrics::StoiEvaluator::Reference ref = stoi.Prepare(utt.clean);
  const Probe base = Evaluate(model, utt, alpha, stoi, ref);

  GradCheckResult r;
  FcnModel probe = model;
  for (std::size_t k = 0; k < model.num_params(); ++k) {
    const double orig = model.params()[k];
    probe.params()[k] = orig + h;
    const Probe plus = Evaluate(probe, utt, alpha, stoi, ref);
    probe.params()[k] = orig - h;
    const Probe minus = Evaluate(probe, utt, alpha, stoi, ref);
    probe.params()[k] = orig;
    if (plus.pattern != base.pattern || minus.pattern != base.pattern) {
      ++r.excluded;
      continue;
    }
    const double numeric = (plus.objective - minus.objective) / (2.0 * h);
    const double a = analytic.grad[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), abs_floor});
    ++r.checked;
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_param = k;
    }
  }
  return r;
}

}  // namespace cisimkit::fcn
