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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "cisimkit/corpus/corpus.h"
#include "cisimkit/corpus/synthetic.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/fcn/conv.h"
#include "cisimkit/fcn/gradcheck.h"
#include "cisimkit/fcn/model.h"
#include "cisimkit/fcn/train.h"
#include "test_util.h"

namespace cisimkit::fcn {
namespace {

std::vector<double> Random(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Utterance NoisyUtterance(std::uint64_t seed, double seconds, double snr_db) {
  const dsp::AudioBuffer clean = corpus::SyntheticUtterance(seed, seconds);
  const dsp::AudioBuffer noise = testing::WhiteNoise(seconds + 1.0, clean.sample_rate, 0.05, seed + 100);
  const corpus::MixResult mix = corpus::MixAtSnr(clean, noise, snr_db, seed);
  return {"u" + std::to_string(seed), clean.samples, mix.noisy.samples, clean.sample_rate};
}

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Conv, HandComputedValidAndSame) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> w{1, 0, -1};
  std::vector<double> y(4);
  ConvShape s{1, 1, 3, 4, ConvMode::kValid};
  ASSERT_EQ(s.OutputLength(), 2u);
  ConvForward(s, x.data(), w.data(), nullptr, y.data());
  EXPECT_EQ(y[0], -2);
  EXPECT_EQ(y[1], -2);

  s.mode = ConvMode::kSame;
  const double bias = 0.5;
  ConvForward(s, x.data(), w.data(), &bias, y.data());
  EXPECT_EQ(y, (std::vector<double>{-1.5, -1.5, -1.5, 3.5}));
}

TEST(Conv, ValidOutputLengthIsInputMinusFilterPlusOne) {
  for (std::size_t len : {1u, 2u, 7u, 55u, 100u, 16000u}) {
    for (int l : {1, 2, 3, 9, 54, 55}) {
      const ConvShape s{1, 1, l, len, ConvMode::kValid};
      if (static_cast<std::size_t>(l) > len) {
        EXPECT_THROW(s.OutputLength(), Error);
        continue;
      }
      ASSERT_EQ(s.OutputLength(), len - l + 1) << len << " " << l;
      std::vector<double> x = Random(len, len + l), w = Random(l, l), y(s.OutputLength());
      ConvForward(s, x.data(), w.data(), nullptr, y.data());
      std::vector<double> ref(y.size());
      reference::ConvForward(s, x.data(), w.data(), nullptr, ref.data());
      EXPECT_LT(MaxAbsDiff(y, ref), 1e-12);
    }
  }
}

TEST(Conv, ParallelMatchesReferenceForwardAndBackward) {
  for (ConvMode mode : {ConvMode::kSame, ConvMode::kValid}) {
    for (int len : {1, 4, 9, 55}) {
      const ConvShape s{3, 5, len, 5000, mode};
      const std::size_t out = s.OutputLength();
      const std::vector<double> x = Random(3 * 5000, 1), w = Random(5 * 3 * len, 2), b = Random(5, 3);
      const std::vector<double> gy = Random(5 * out, 4);
      std::vector<double> y(5 * out), y_ref(5 * out);
      ConvForward(s, x.data(), w.data(), b.data(), y.data());
      reference::ConvForward(s, x.data(), w.data(), b.data(), y_ref.data());
      EXPECT_LT(MaxAbsDiff(y, y_ref), 1e-11);

      std::vector<double> gx(x.size(), 7.0), gw(w.size(), 1.0), gb(5, 1.0);
      std::vector<double> gx_ref(x.size(), -7.0), gw_ref(w.size(), 1.0), gb_ref(5, 1.0);
      ConvBackward(s, x.data(), w.data(), gy.data(), gx.data(), gw.data(), gb.data());
      reference::ConvBackward(s, x.data(), w.data(), gy.data(), gx_ref.data(), gw_ref.data(), gb_ref.data());
      EXPECT_LT(MaxAbsDiff(gx, gx_ref), 1e-11);
      EXPECT_LT(MaxAbsDiff(gw, gw_ref), 1e-9);
      EXPECT_LT(MaxAbsDiff(gb, gb_ref), 1e-9);
    }
  }
}

// Loss = <r, y> so dLoss/dy = r; perturb every input, weight and bias.
TEST(Conv, BackwardMatchesFiniteDifferences) {
  for (ConvMode mode : {ConvMode::kSame, ConvMode::kValid}) {
    const ConvShape s{2, 3, 5, 24, mode};
    const std::size_t out = s.OutputLength();
    std::vector<double> x = Random(2 * 24, 10), w = Random(3 * 2 * 5, 11), b = Random(3, 12);
    const std::vector<double> r = Random(3 * out, 13);
    auto loss = [&]() {
      std::vector<double> y(3 * out);
      ConvForward(s, x.data(), w.data(), b.data(), y.data());
      double acc = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) acc += r[i] * y[i];
      return acc;
    };
    std::vector<double> gx(x.size()), gw(w.size(), 0.0), gb(3, 0.0);
    ConvBackward(s, x.data(), w.data(), r.data(), gx.data(), gw.data(), gb.data());
    const double h = 1e-5;
    for (auto [vec, grad] : {std::pair{&x, &gx}, std::pair{&w, &gw}, std::pair{&b, &gb}}) {
      for (std::size_t i = 0; i < vec->size(); ++i) {
        const double orig = (*vec)[i];
        (*vec)[i] = orig + h;
        const double up = loss();
        (*vec)[i] = orig - h;
        const double down = loss();
        (*vec)[i] = orig;
        EXPECT_NEAR((*grad)[i], (up - down) / (2 * h), 1e-8);
      }
    }
  }
}

TEST(Conv, RejectsDegenerateShapes) {
  EXPECT_THROW((ConvShape{0, 1, 1, 10, ConvMode::kSame}.OutputLength()), Error);
  EXPECT_THROW((ConvShape{1, 1, 11, 10, ConvMode::kValid}.OutputLength()), Error);
}

TEST(Model, ParameterLayoutFollowsArchitecture) {
  const FcnModel m(Architecture::Default());
  // 8*1*55+8, 8*8*55+8 twice, 1*8*55+1
  EXPECT_EQ(m.num_params(), 448u + 3528u * 2 + 441u);
  EXPECT_EQ(m.bias_offset(0), 440u);
  EXPECT_EQ(m.weight_offset(1), 448u);
  EXPECT_EQ(m.architecture().layers.back().activation, Activation::kLinear);
}

TEST(Model, IdentityPassesInputThrough) {
  const std::vector<double> x = Random(300, 5);
  EXPECT_EQ(FcnModel::Identity().Forward(x), x);
  EXPECT_EQ(FcnModel::Identity(9).Forward(x), x);
}

TEST(Model, InitializeIsSeededAndFloatExact) {
  const FcnModel a = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 42);
  const FcnModel b = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 42);
  const FcnModel c = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 43);
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  EXPECT_FALSE(std::equal(a.params().begin(), a.params().end(), c.params().begin()));
  for (double p : a.params()) EXPECT_EQ(p, static_cast<double>(static_cast<float>(p)));
  const double limit = std::sqrt(6.0 / (9 + 27));
  for (std::size_t k = 0; k < 27; ++k) EXPECT_LE(std::abs(a.params()[k]), limit);
  EXPECT_EQ(a.biases(0)[0], 0.0);
}

TEST(Model, SaveLoadRoundTripIsExact) {
  const auto dir = testing::ScratchDir("fcn_io");
  Architecture arch = Architecture::Uniform(2, 4, 7);
  arch.layers[1].activation = Activation::kTanh;
  const FcnModel m = FcnModel::Initialize(arch, 3);
  SaveModel(m, dir / "m.fcn");
  const FcnModel r = LoadModel(dir / "m.fcn");
  ASSERT_EQ(r.num_layers(), 3);
  EXPECT_EQ(r.architecture().layers[1].activation, Activation::kTanh);
  EXPECT_TRUE(std::equal(m.params().begin(), m.params().end(), r.params().begin(), r.params().end()));
  const std::vector<double> x = Random(500, 9);
  EXPECT_EQ(m.Forward(x), r.Forward(x));
}

TEST(Model, LoadRejectsDamagedFiles) {
  const auto dir = testing::ScratchDir("fcn_bad");
  SaveModel(FcnModel::Initialize(Architecture::Uniform(1, 2, 3), 1), dir / "good.fcn");
  const std::string good = ReadTextFile(dir / "good.fcn");

  auto expect_error = [&](const std::string& bytes, const std::string& needle) {
    WriteTextFile(dir / "bad.fcn", bytes);
    try {
      LoadModel(dir / "bad.fcn");
      ADD_FAILURE() << "no error for " << needle;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(good.substr(0, good.size() - 3), "corrupt model file");
  expect_error(good.substr(0, 4), "corrupt model file");
  expect_error("XXXXX" + good.substr(5), "corrupt model file");
  expect_error(good + "junk", "corrupt model file");
  std::string future = good;
  future[5] = '9';
  expect_error(future, "unsupported version");
  EXPECT_THROW(LoadModel(dir / "missing.fcn"), Error);
}

TEST(Activation, NamesRoundTrip) {
  for (Activation a : {Activation::kLinear, Activation::kLeakyRelu, Activation::kTanh}) {
    EXPECT_EQ(ParseActivation(ActivationName(a)), a);
  }
  EXPECT_THROW(ParseActivation("relu6"), Error);
}

TEST(Architecture, ConfigKeys) {
  const KeyValueConfig kv = KeyValueConfig::Parse("[fcn]\nlayers = 1\nfilters = 4\nfilter_len = 11\n");
  const Architecture a = Architecture::FromConfig(kv);
  ASSERT_EQ(a.layers.size(), 2u);
  EXPECT_EQ(a.layers[0].filters, 4);
  EXPECT_EQ(a.layers[1].filter_len, 11);
  EXPECT_THROW(Architecture{}.Validate(), Error);
  Architecture wide;
  wide.layers.push_back({2, 3, Activation::kLinear});
  EXPECT_THROW(wide.Validate(), Error);
}

TEST(Objective, PerfectEstimateHasZeroGradient) {
  const Utterance u = NoisyUtterance(1, 0.5, 5.0);
  metrics::StoiEvaluator stoi({}, u.sample_rate);
  std::vector<double> g(u.clean.size());
  const ObjectiveTerms t = Objective(u.clean, u.clean, 0.0, stoi, &g);
  EXPECT_NEAR(t.stoi_term, 1.0, 1e-12);
  EXPECT_EQ(t.mse_term, 0.0);
  double inf_norm = 0.0;
  for (double v : g) inf_norm = std::max(inf_norm, std::abs(v));
  EXPECT_LT(inf_norm, 1e-6);

  // Same through the network: identity model fed the clean signal.
  Utterance same = u;
  same.noisy = u.clean;
  const Utterance* batch[] = {&same};
  const BatchGradient bg = ComputeGradient(FcnModel::Identity(), batch, 0.0);
  for (double v : bg.grad) EXPECT_LT(std::abs(v), 1e-6);
}

TEST(Objective, CombinesWeightedMseAndStoi) {
  const Utterance u = NoisyUtterance(2, 0.5, 0.0);
  metrics::StoiEvaluator stoi({}, u.sample_rate);
  const ObjectiveTerms t = Objective(u.clean, u.noisy, 0.25, stoi);
  double mse = 0.0;
  for (std::size_t i = 0; i < u.clean.size(); ++i) mse += std::pow(u.clean[i] - u.noisy[i], 2);
  mse /= static_cast<double>(u.clean.size());
  EXPECT_NEAR(t.mse_term, mse, 1e-15);
  EXPECT_NEAR(t.objective, 0.25 * mse - t.stoi_term, 1e-15);
  EXPECT_LT(t.stoi_term, 0.99);
  EXPECT_THROW(Objective(u.clean, std::vector<double>(10), 0.1, stoi), Error);
}

TEST(Gradient, MatchesFiniteDifferencesOnTinyModels) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Utterance u = NoisyUtterance(seed + 20, 0.5, 1.0 + 3.0 * (seed % 2));
    const FcnModel m = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), seed);
    const double alpha = seed % 2 ? 1.0 : 1e-4;
    const GradCheckResult r = CheckGradient(m, u, alpha);
    EXPECT_LT(r.max_rel_error, 1e-4) << "model " << seed << " param " << r.worst_param;
    EXPECT_GE(r.checked, m.num_params() / 2) << "model " << seed;
  }
}

// Smooth hidden units: only STOI clip flips can disqualify a coordinate.
TEST(Gradient, MatchesFiniteDifferencesWithTanhUnits) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Utterance u = NoisyUtterance(seed + 50, 0.5, 1.0);
    Architecture arch = Architecture::Uniform(1, 3, 9);
    arch.layers[0].activation = Activation::kTanh;
    const FcnModel m = FcnModel::Initialize(arch, seed);
    const GradCheckResult r = CheckGradient(m, u, 1e-4);
    EXPECT_LT(r.max_rel_error, 1e-4) << "model " << seed << " param " << r.worst_param;
    EXPECT_GE(r.checked, m.num_params() - 3) << "model " << seed;
  }
}

TEST(Gradient, BatchAveragesUtterances) {
  const Utterance a = NoisyUtterance(3, 0.5, 4.0);
  const Utterance b = NoisyUtterance(4, 0.5, 1.0);
  const FcnModel m = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 7);
  const Utterance* one[] = {&a};
  const Utterance* twice[] = {&a, &a};
  const Utterance* pair[] = {&a, &b};
  const Utterance* only_b[] = {&b};
  const BatchGradient g1 = ComputeGradient(m, one, 1e-4);
  const BatchGradient g2 = ComputeGradient(m, twice, 1e-4);
  EXPECT_LT(MaxAbsDiff(g1.grad, g2.grad), 1e-15);
  EXPECT_EQ(g1.mean.objective, g2.mean.objective);

  const BatchGradient gp = ComputeGradient(m, pair, 1e-4);
  const BatchGradient gb = ComputeGradient(m, only_b, 1e-4);
  for (std::size_t k = 0; k < gp.grad.size(); ++k) EXPECT_NEAR(gp.grad[k], 0.5 * (g1.grad[k] + gb.grad[k]), 1e-14);
}

TEST(Gradient, NonFiniteActivationNamesTheLayer) {
  FcnModel m(Architecture::Uniform(1, 2, 9));
  for (double& p : m.params()) p = 1e308;
  Utterance u = NoisyUtterance(5, 0.5, 4.0);
  const Utterance* batch[] = {&u};
  try {
    ComputeGradient(m, batch, 1e-4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
  }
}

TEST(Sgd, UpdatesElementwise) {
  FcnModel m = FcnModel::Identity();
  m.params()[0] = 1.0;
  m.params()[1] = -0.5;
  SgdStep(m, std::vector<double>{2.0, 0.0}, 0.1);
  EXPECT_EQ(m.params()[0], 0.8);
  EXPECT_EQ(m.params()[1], -0.5);
  EXPECT_THROW(SgdStep(m, std::vector<double>{1.0}, 0.1), Error);
}

TEST(Sgd, ZeroGradientLeavesModelBitIdentical) {
  FcnModel m = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 1);
  const std::vector<double> before(m.params().begin(), m.params().end());
  SgdStep(m, std::vector<double>(m.num_params(), 0.0), 0.3, 1.0);
  for (std::size_t k = 0; k < before.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(before[k]), std::bit_cast<std::uint64_t>(m.params()[k]));
  }
}

TEST(Sgd, ClipsToMaximumNorm) {
  FcnModel m(Architecture::Uniform(0, 1, 2));  // 2 weights + 1 bias
  SgdStep(m, std::vector<double>{3.0, 4.0, 0.0}, 1.0, 1.0);
  EXPECT_NEAR(m.params()[0], -0.6, 1e-15);
  EXPECT_NEAR(m.params()[1], -0.8, 1e-15);
  SgdStep(m, std::vector<double>{0.3, 0.4, 0.0}, 1.0, 1.0);  // short enough: unclipped
  EXPECT_NEAR(m.params()[0], -0.9, 1e-15);
}

TEST(Train, IsDeterministicAndRecordsEveryBatch) {
  std::vector<Utterance> data;
  for (std::uint64_t s = 0; s < 3; ++s) data.push_back(NoisyUtterance(30 + s, 0.5, 1.0));
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 2;
  cfg.seed = 11;
  const FcnModel init = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 5);
  int calls = 0;
  const TrainResult a = Train(init, data, cfg, [&](const LossRecord&) { ++calls; });
  const TrainResult b = Train(init, data, cfg);
  ASSERT_EQ(a.history.size(), 4u);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(a.history.back().iteration, 4);
  EXPECT_TRUE(std::equal(a.model.params().begin(), a.model.params().end(), b.model.params().begin()));
  for (double p : a.model.params()) EXPECT_EQ(p, static_cast<double>(static_cast<float>(p)));
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].terms.objective, b.history[i].terms.objective);
  }

  const auto dir = testing::ScratchDir("fcn_loss");
  WriteLossCsv(dir / "loss.csv", a.history);
  const auto rows = ParseCsv(ReadTextFile(dir / "loss.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"iter", "objective", "mse_term", "stoi_term"}));
  EXPECT_EQ(std::stod(rows[2][1]), a.history[1].terms.objective);
}

TEST(Train, ImprovesTrainingObjective) {
  std::vector<Utterance> data;
  for (std::uint64_t s = 0; s < 2; ++s) data.push_back(NoisyUtterance(40 + s, 1.0, 1.0));
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 2;
  const FcnModel init = FcnModel::Initialize(Architecture::Uniform(1, 4, 15), 9);
  const TrainResult r = Train(init, data, cfg);
  const Utterance* batch[] = {&data[0], &data[1]};
  const double before = ComputeGradient(init, batch, cfg.alpha).mean.objective;
  const double after = ComputeGradient(r.model, batch, cfg.alpha).mean.objective;
  EXPECT_LT(after, before);
}

TEST(Train, ZeroLearningRateKeepsInitialModel) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  const FcnModel init = FcnModel::Initialize(Architecture::Uniform(1, 3, 9), 21);
  const TrainResult r = Train(init, {NoisyUtterance(8, 0.5, 1.0), NoisyUtterance(9, 0.5, 4.0)}, cfg);
  EXPECT_TRUE(std::equal(init.params().begin(), init.params().end(), r.model.params().begin()));
  EXPECT_EQ(r.history.size(), 4u);
  EXPECT_GT(r.history.front().terms.objective, -1.0);
}

TEST(Train, ReportsDivergence) {
  FcnModel m(Architecture::Uniform(1, 2, 9));
  for (double& p : m.params()) p = 1e308;
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    Train(m, {NoisyUtterance(6, 0.5, 1.0)}, cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
  }
}

TEST(TrainConfig, ValidatesAndReadsKeys) {
  const TrainConfig c = TrainConfig::FromConfig(
      KeyValueConfig::Parse("[train]\nalpha = 0.5\nlearning_rate = 0.01\nbatch_size = 4\nepochs = 3\nseed = 9\n"));
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.batch_size, 4);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_THROW(TrainConfig::FromConfig(KeyValueConfig::Parse("[train]\nlearning_rate = -0.1\n")), Error);
  EXPECT_THROW(TrainConfig::FromConfig(KeyValueConfig::Parse("[train]\nbatch_size = 0\n")), Error);
}

TEST(Enhance, OverlapAddIsAPartitionOfUnity) {
  const std::vector<double> x = Random(16000 * 2 + 3217, 8);
  const std::vector<double> y = Enhance(FcnModel::Identity(), x, 16000);
  ASSERT_EQ(y.size(), x.size());
  EXPECT_LT(MaxAbsDiff(x, y), 1e-14);
  const std::vector<double> shrt = Random(900, 9);
  EXPECT_EQ(Enhance(FcnModel::Identity(), shrt, 16000), shrt);
  EXPECT_THROW(Enhance(FcnModel::Identity(), x, 16000, 1.0, 1.0), Error);
}

TEST(Enhance, SegmentsAgreeWithWholeSignalAwayFromEdges) {
  // A purely linear model is shift-invariant, so segment boundaries only
  // matter within half a filter of each segment edge.
  FcnModel m = FcnModel::Initialize(Architecture::Uniform(0, 1, 9), 4);
  const std::vector<double> x = Random(40000, 10);
  const std::vector<double> whole = m.Forward(x);
  const std::vector<double> seg = Enhance(m, x, 16000);
  EXPECT_LT(MaxAbsDiff(whole, seg), 1.0);
  double inner = 0.0;
  for (std::size_t i = 0; i < 4000; ++i) inner = std::max(inner, std::abs(whole[i] - seg[i]));
  EXPECT_LT(inner, 1e-12);
}

}  // namespace
}  // namespace cisimkit::fcn
