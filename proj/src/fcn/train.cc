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

#include "cisimkit/fcn/train.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/fcn/conv.h"

namespace cisimkit::fcn {
namespace {

bool AllFinite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Layer inputs (acts[0] is the waveform) and post-activation outputs.
struct ForwardCache {
  std::vector<std::vector<double>> acts;  // num_layers + 1 entries
};

ForwardCache ForwardWithCache(const FcnModel& model, std::span<const double> x) {
  ForwardCache cache;
  cache.acts.emplace_back(x.begin(), x.end());
  for (int i = 0; i < model.num_layers(); ++i) {
    const LayerSpec& l = model.architecture().layers[i];
    const ConvShape shape{model.in_channels(i), l.filters, l.filter_len, x.size(), ConvMode::kSame};
    std::vector<double> out(static_cast<std::size_t>(l.filters) * x.size());
    ConvForward(shape, cache.acts.back().data(), model.weights(i), model.biases(i), out.data());
    switch (l.activation) {
      case Activation::kLinear: break;
      case Activation::kLeakyRelu:
        for (double& v : out) v = v > 0.0 ? v : kLeakySlope * v;
        break;
      case Activation::kTanh:
        for (double& v : out) v = std::tanh(v);
        break;
    }
    if (!AllFinite(out)) throw Error("non-finite activation in FCN layer " + std::to_string(i));
    cache.acts.push_back(std::move(out));
  }
  return cache;
}

// Accumulates the parameter gradient for one utterance into `grad`, given
// g = dO/d(output).
void Backward(const FcnModel& model, const ForwardCache& cache, std::vector<double> g, double* grad) {
  const std::size_t n = cache.acts.front().size();
  for (int i = model.num_layers() - 1; i >= 0; --i) {
    const LayerSpec& l = model.architecture().layers[i];
    const std::vector<double>& out = cache.acts[i + 1];
    // The derivative is recovered from the stored output: leaky rectifier
    // outputs keep the sign of their input, and tanh' = 1 - tanh^2.
    if (l.activation == Activation::kLeakyRelu) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] *= out[k] > 0.0 ? 1.0 : kLeakySlope;
    } else if (l.activation == Activation::kTanh) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] *= 1.0 - out[k] * out[k];
    }
    const ConvShape shape{model.in_channels(i), l.filters, l.filter_len, n, ConvMode::kSame};
    std::vector<double> gx;
    if (i > 0) gx.resize(static_cast<std::size_t>(model.in_channels(i)) * n);
    ConvBackward(shape, cache.acts[i].data(), model.weights(i), g.data(), i > 0 ? gx.data() : nullptr,
                 grad + model.weight_offset(i), grad + model.bias_offset(i));
    if (!AllFinite(g) || (i > 0 && !AllFinite(gx))) {
      throw Error("non-finite gradient in FCN layer " + std::to_string(i));
    }
    g = std::move(gx);
  }
}

}  // namespace

ObjectiveTerms Objective(std::span<const double> clean, std::span<const double> estimate, double alpha,
                         metrics::StoiEvaluator& stoi, std::vector<double>* grad) {
  Require(clean.size() == estimate.size(), "objective needs equal-length clean and estimate");
  Require(!clean.empty(), "objective needs a non-empty signal");
  const double n = static_cast<double>(clean.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) sq += (clean[i] - estimate[i]) * (clean[i] - estimate[i]);
  ObjectiveTerms t;
  t.mse_term = sq / n;
  const metrics::StoiEvaluator::Reference ref = stoi.Prepare(clean);
  t.stoi_term = stoi.ValueAndGradient(ref, estimate, grad);
  t.objective = alpha * t.mse_term - t.stoi_term;
  if (grad) {
    for (std::size_t i = 0; i < clean.size(); ++i) {
      (*grad)[i] = 2.0 * alpha / n * (estimate[i] - clean[i]) - (*grad)[i];
    }
  }
  return t;
}

void TrainConfig::Validate() const {
  Require(alpha >= 0.0 && std::isfinite(alpha), "train.alpha must be a non-negative number");
  // Zero is allowed: the run then only scores the objective.
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate), "train.learning_rate must be non-negative");
  Require(batch_size >= 1, "train.batch_size must be at least 1");
  Require(epochs >= 1, "train.epochs must be at least 1");
  Require(grad_clip >= 0.0, "train.grad_clip must be non-negative");
  stoi.Validate();
}

TrainConfig TrainConfig::FromConfig(const KeyValueConfig& kv) {
  TrainConfig c;
  c.alpha = kv.GetDouble("train.alpha").value_or(c.alpha);
  c.learning_rate = kv.GetDouble("train.learning_rate").value_or(c.learning_rate);
  c.batch_size = kv.GetInt("train.batch_size").value_or(c.batch_size);
  c.epochs = kv.GetInt("train.epochs").value_or(c.epochs);
  if (auto s = kv.GetDouble("train.seed")) {
    Require(*s >= 0 && *s == std::floor(*s), "train.seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*s);
  }
  c.grad_clip = kv.GetDouble("train.grad_clip").value_or(c.grad_clip);
  c.Validate();
  return c;
}

BatchGradient ComputeGradient(const FcnModel& model, std::span<const Utterance* const> batch, double alpha,
                              const metrics::StoiConfig& stoi_cfg) {
  Require(!batch.empty(), "gradient needs a non-empty batch");
  const long count = static_cast<long>(batch.size());
  std::vector<std::vector<double>> grads(count);
  std::vector<ObjectiveTerms> terms(count);
  std::vector<std::exception_ptr> errors(count);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < count; ++b) {
    try {
      const Utterance& u = *batch[b];
      Require(u.clean.size() == u.noisy.size(), "utterance " + u.id + ": clean/noisy length mismatch");
      metrics::StoiEvaluator stoi(stoi_cfg, u.sample_rate);
      const ForwardCache cache = ForwardWithCache(model, u.noisy);
      std::vector<double> g(u.clean.size());
      terms[b] = Objective(u.clean, cache.acts.back(), alpha, stoi, &g);
      if (!std::isfinite(terms[b].objective)) throw Error("non-finite objective");
      grads[b].assign(model.num_params(), 0.0);
      Backward(model, cache, std::move(g), grads[b].data());
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (long b = 0; b < count; ++b) {
    if (!errors[b]) continue;
    try {
      std::rethrow_exception(errors[b]);
    } catch (const std::exception& e) {
      throw Error("utterance " + batch[b]->id + ": " + e.what());
    }
  }

  BatchGradient out;
  out.grad.assign(model.num_params(), 0.0);
  for (long b = 0; b < count; ++b) {
    for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += grads[b][k];
    out.mean.objective += terms[b].objective;
    out.mean.mse_term += terms[b].mse_term;
    out.mean.stoi_term += terms[b].stoi_term;
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : out.grad) v *= inv;
  out.mean.objective *= inv;
  out.mean.mse_term *= inv;
  out.mean.stoi_term *= inv;
  return out;
}

void SgdStep(FcnModel& model, std::span<const double> grad, double learning_rate, double grad_clip) {
  Require(grad.size() == model.num_params(), "gradient size does not match the model");
  double scale = learning_rate;
  if (grad_clip > 0.0) {
    const double norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    if (norm > grad_clip) scale *= grad_clip / norm;
  }
  std::span<double> p = model.params();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= scale * grad[k];
}

TrainResult Train(FcnModel model, const std::vector<Utterance>& data, const TrainConfig& cfg,
                  const std::function<void(const LossRecord&)>& progress) {
  cfg.Validate();
  Require(!data.empty(), "training set is empty");
  std::vector<const Utterance*> order;
  for (const Utterance& u : data) order.push_back(&u);
  std::mt19937_64 rng(cfg.seed);

  TrainResult result;
  long iteration = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ++iteration;
      BatchGradient bg;
      try {
        bg = ComputeGradient(model, std::span(order).subspan(start, end - start), cfg.alpha, cfg.stoi);
      } catch (const Error& e) {
        throw Error("training diverged at iteration " + std::to_string(iteration) + ": " + e.what());
      }
      const LossRecord rec{iteration, bg.mean};
      result.history.push_back(rec);
      if (progress) progress(rec);
      SgdStep(model, bg.grad, cfg.learning_rate, cfg.grad_clip);
      if (!model.AllFinite()) {
        throw Error("training diverged at iteration " + std::to_string(iteration) + ": non-finite parameters");
      }
    }
  }
  model.RoundToStorage();
  result.model = std::move(model);
  return result;
}

void WriteLossCsv(const std::filesystem::path& path, const std::vector<LossRecord>& history) {
  std::ostringstream out;
  out << "iter,objective,mse_term,stoi_term\n";
  out.precision(17);
  for (const LossRecord& r : history) {
    out << r.iteration << ',' << r.terms.objective << ',' << r.terms.mse_term << ',' << r.terms.stoi_term << '\n';
  }
  WriteTextFile(path, out.str());
}

std::vector<double> Enhance(const FcnModel& model, std::span<const double> noisy, int sample_rate, double segment_s,
                            double overlap) {
  Require(sample_rate > 0, "sample rate must be positive");
  Require(segment_s > 0.0, "segment length must be positive");
  Require(overlap >= 0.0 && overlap < 1.0, "segment overlap must be in [0, 1)");
  Require(!noisy.empty(), "cannot enhance an empty signal");
  const std::size_t seg = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(segment_s * sample_rate)));
  if (noisy.size() <= seg) return model.Forward(noisy);

  const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seg * (1.0 - overlap))));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + seg < noisy.size(); s += hop) starts.push_back(s);
  starts.push_back(noisy.size() - seg);

  // Strictly positive triangle so every covered sample has weight.
  std::vector<double> win(seg);
  for (std::size_t i = 0; i < seg; ++i) {
    win[i] = 1.0 - std::abs(2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(seg) - 1.0);
  }
  std::vector<double> acc(noisy.size(), 0.0), wsum(noisy.size(), 0.0);
  for (std::size_t s : starts) {
    const std::vector<double> y = model.Forward(noisy.subspan(s, seg));
    for (std::size_t i = 0; i < seg; ++i) {
      acc[s + i] += win[i] * y[i];
      wsum[s + i] += win[i];
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= wsum[i];
  return acc;
}

}  // namespace cisimkit::fcn
