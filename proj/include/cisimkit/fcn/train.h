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

#ifndef CISIMKIT_FCN_TRAIN_H_
#define CISIMKIT_FCN_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cisimkit/config.h"
#include "cisimkit/fcn/model.h"
#include "cisimkit/metrics/stoi.h"

namespace cisimkit::fcn {

struct Utterance {
  std::string id;
  std::vector<double> clean;
  std::vector<double> noisy;
  int sample_rate = 16000;
};

// O = alpha * mse_term - stoi_term, mse_term = |w - w_hat|^2 / L, and
// stoi_term is the training-variant STOI (no silent-frame removal).
struct ObjectiveTerms {
  double objective = 0.0;
  double mse_term = 0.0;
  double stoi_term = 0.0;
};

// Writes dO/d(estimate) into grad when non-null. `stoi` must run at the
// utterance rate and is only used through its training variant.
ObjectiveTerms Objective(std::span<const double> clean, std::span<const double> estimate, double alpha,
                         metrics::StoiEvaluator& stoi, std::vector<double>* grad = nullptr);

struct TrainConfig {
  double alpha = 1e-4;
  double learning_rate = 0.05;
  int batch_size = 1;
  int epochs = 20;
  std::uint64_t seed = 0;
  double grad_clip = 1.0;  // max global L2 norm; 0 disables
  metrics::StoiConfig stoi;

  void Validate() const;
  // Keys train.alpha, train.learning_rate, train.batch_size, train.epochs,
  // train.seed, train.grad_clip.
  static TrainConfig FromConfig(const KeyValueConfig& kv);
};

struct BatchGradient {
  std::vector<double> grad;  // same layout as FcnModel::params()
  ObjectiveTerms mean;       // averaged over the batch
};

// Batch-mean objective and its gradient with respect to every parameter.
// Utterances are processed in parallel; the reduction runs in batch order
// so results do not depend on scheduling. Throws Error naming the layer if
// a non-finite value appears.
BatchGradient ComputeGradient(const FcnModel& model, std::span<const Utterance* const> batch, double alpha,
                              const metrics::StoiConfig& stoi_cfg = {});

// params -= learning_rate * grad, after scaling grad down to norm
// grad_clip when it is longer (grad_clip > 0).
void SgdStep(FcnModel& model, std::span<const double> grad, double learning_rate, double grad_clip = 0.0);

struct LossRecord {
  long iteration = 0;  // 1-based batch counter
  ObjectiveTerms terms;
};

struct TrainResult {
  FcnModel model;
  std::vector<LossRecord> history;
};

// epochs x ceil(N / batch_size) gradient steps; the utterance order is
// reshuffled every epoch from `seed`. The returned model is rounded to
// float32 storage precision. Aborts with Error on a non-finite objective.
TrainResult Train(FcnModel model, const std::vector<Utterance>& data, const TrainConfig& cfg,
                  const std::function<void(const LossRecord&)>& progress = {});

// iter,objective,mse_term,stoi_term
void WriteLossCsv(const std::filesystem::path& path, const std::vector<LossRecord>& history);

// Segment-wise inference: overlapping segments of segment_s seconds,
// cross-faded with triangular windows normalized by their running sum.
// Inputs no longer than one segment go through in one pass.
std::vector<double> Enhance(const FcnModel& model, std::span<const double> noisy, int sample_rate,
                            double segment_s = 1.0, double overlap = 0.5);

}  // namespace cisimkit::fcn

#endif  // CISIMKIT_FCN_TRAIN_H_
