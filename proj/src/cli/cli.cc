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

#include "cisimkit/cli/cli.h"

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "cisimkit/config.h"
#include "cisimkit/corpus/corpus.h"
#include "cisimkit/corpus/synthetic.h"
#include "cisimkit/csv.h"
#include "cisimkit/dsp/resample.h"
#include "cisimkit/dsp/spectrogram.h"
#include "cisimkit/dsp/wav_io.h"
#include "cisimkit/error.h"
#include "cisimkit/fcn/model.h"
#include "cisimkit/fcn/train.h"
#include "cisimkit/metrics/report.h"
#include "cisimkit/service/server.h"
#include "cisimkit/stats/anova.h"
#include "cisimkit/stats/table.h"
#include "cisimkit/stats/ttest.h"
#include "cisimkit/vocoder/vocoder.h"

namespace cisimkit::cli {
namespace {

namespace fs = std::filesystem;

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool verbose = false;
};

void RequireInput(const fs::path& p) {
  Require(!p.empty(), "missing input path");
  Require(fs::is_regular_file(p), "input file not found: " + p.string());
}

void RequireOutput(const fs::path& p) {
  Require(!p.empty(), "missing output path");
  const fs::path parent = p.parent_path();
  Require(parent.empty() || fs::is_directory(parent), "output directory does not exist: " + parent.string());
}

KeyValueConfig LoadConfig(const Common& c) {
  if (c.config_path.empty()) return {};
  RequireInput(c.config_path);
  return KeyValueConfig::Load(c.config_path);
}

// Every signal is processed at the pipeline rate.
dsp::AudioBuffer LoadAudio(const fs::path& p) {
  dsp::AudioBuffer x = dsp::ReadWav(p);
  if (x.sample_rate != dsp::kProcessingRate) x = dsp::Resample(x, dsp::kProcessingRate);
  return x;
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Writes to `path`, or to `out` when no path was given.
void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    WriteTextFile(path, text);
  }
}

// ---- vocode ----------------------------------------------------------------

struct VocodeArgs {
  std::string in, out;
};

void CmdVocode(const VocodeArgs& a, const Common& c) {
  RequireInput(a.in);
  RequireOutput(a.out);
  const vocoder::VocoderConfig cfg = vocoder::VocoderConfig::FromConfig(LoadConfig(c));
  const dsp::AudioBuffer x = LoadAudio(a.in);
  dsp::WriteWav(a.out, vocoder::Vocoder(cfg, x.sample_rate).Vocode(x));
}

// ---- mix -------------------------------------------------------------------

struct MixArgs {
  std::string speech, noise, out, manifest, utterance;
  std::string condition = "Noisy_E";
  double snr_db = 0.0;
  bool append = false;
};

void CmdMix(const MixArgs& a, const Common& c, std::ostream& out) {
  RequireInput(a.speech);
  RequireInput(a.noise);
  RequireOutput(a.out);
  if (!a.manifest.empty()) RequireOutput(a.manifest);
  const corpus::Condition cond = corpus::ParseCondition(a.condition);
  Require(corpus::HasNoise(cond) && !corpus::IsEnhanced(cond), "mix condition must be Noisy_E or Noisy_S");

  const corpus::MixResult m = corpus::MixAtSnr(LoadAudio(a.speech), LoadAudio(a.noise), a.snr_db, c.seed);
  dsp::WriteWav(a.out, m.noisy);

  corpus::ManifestRow row;
  row.utterance = a.utterance.empty() ? fs::path(a.speech).stem().string() : a.utterance;
  row.condition = cond;
  row.snr_db = a.snr_db;
  row.scale = m.scale;
  row.offset = m.offset;
  std::vector<corpus::ManifestRow> rows;
  if (a.append && !a.manifest.empty() && fs::exists(a.manifest)) rows = corpus::ReadManifest(a.manifest);
  rows.push_back(row);
  if (a.manifest.empty()) {
    out << corpus::ManifestToCsv(rows);
  } else {
    corpus::WriteManifest(a.manifest, rows);
  }
}

// ---- train / enhance -------------------------------------------------------

struct TrainArgs {
  std::string list, out, init, save_init, loss_csv;
  std::optional<double> lr, alpha;
  std::optional<int> epochs, batch;
};

// CSV with columns utterance,clean,noisy; paths relative to the list file.
std::vector<fcn::Utterance> LoadPairs(const fs::path& list) {
  const std::vector<CsvRow> rows = ReadCsv(list);
  Require(rows.size() > 1, "training list " + list.string() + " has no rows");
  const std::string ctx = "training list " + list.string();
  const std::size_t cu = CsvColumn(rows[0], "utterance", ctx);
  const std::size_t cc = CsvColumn(rows[0], "clean", ctx);
  const std::size_t cn = CsvColumn(rows[0], "noisy", ctx);
  const fs::path base = list.parent_path();
  std::vector<fs::path> paths;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    Require(rows[i].size() == rows[0].size(), ctx + ": row " + std::to_string(i) + " has the wrong column count");
    paths.push_back(base / rows[i][cc]);
    paths.push_back(base / rows[i][cn]);
  }
  for (const fs::path& p : paths) RequireInput(p);

  std::vector<fcn::Utterance> data;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    fcn::Utterance u;
    u.id = rows[i][cu];
    u.clean = LoadAudio(base / rows[i][cc]).samples;
    u.noisy = LoadAudio(base / rows[i][cn]).samples;
    u.sample_rate = dsp::kProcessingRate;
    Require(u.clean.size() == u.noisy.size(), "utterance " + u.id + ": clean and noisy lengths differ");
    data.push_back(std::move(u));
  }
  return data;
}

void CmdTrain(const TrainArgs& a, const Common& c, std::ostream& err) {
  RequireInput(a.list);
  if (!a.init.empty()) RequireInput(a.init);
  RequireOutput(a.out);
  if (!a.save_init.empty()) RequireOutput(a.save_init);
  if (!a.loss_csv.empty()) RequireOutput(a.loss_csv);

  KeyValueConfig kv = LoadConfig(c);
  kv.Set("train.seed", std::to_string(c.seed));
  if (a.lr) kv.Set("train.learning_rate", FormatNumber(*a.lr));
  if (a.alpha) kv.Set("train.alpha", FormatNumber(*a.alpha));
  if (a.epochs) kv.Set("train.epochs", std::to_string(*a.epochs));
  if (a.batch) kv.Set("train.batch_size", std::to_string(*a.batch));
  const fcn::TrainConfig cfg = fcn::TrainConfig::FromConfig(kv);
  cfg.Validate();

  const fcn::FcnModel init = a.init.empty()
                                 ? fcn::FcnModel::Initialize(fcn::Architecture::FromConfig(kv), c.seed)
                                 : fcn::LoadModel(a.init);
  const std::vector<fcn::Utterance> data = LoadPairs(a.list);
  if (!a.save_init.empty()) fcn::SaveModel(init, a.save_init);

  std::function<void(const fcn::LossRecord&)> progress;
  if (c.verbose) {
    progress = [&err](const fcn::LossRecord& r) {
      err << "iter " << r.iteration << " objective " << r.terms.objective << " stoi " << r.terms.stoi_term << "\n";
    };
  }
  const fcn::TrainResult result = fcn::Train(init, data, cfg, progress);
  fcn::SaveModel(result.model, a.out);
  if (!a.loss_csv.empty()) fcn::WriteLossCsv(a.loss_csv, result.history);
}

struct EnhanceArgs {
  std::string in, model, out;
  double segment_s = 1.0;
  double overlap = 0.5;
};

void CmdEnhance(const EnhanceArgs& a) {
  RequireInput(a.in);
  RequireInput(a.model);
  RequireOutput(a.out);
  const fcn::FcnModel model = fcn::LoadModel(a.model);
  const dsp::AudioBuffer x = LoadAudio(a.in);
  dsp::WriteWav(a.out, dsp::AudioBuffer(fcn::Enhance(model, x.samples, x.sample_rate, a.segment_s, a.overlap),
                                        x.sample_rate));
}

// ---- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::vector<std::string> inputs;
  std::string out, condition = "processed", utterance;
};

void CmdMetrics(const MetricsArgs& a, std::ostream& out) {
  Require(a.inputs.size() == 1 || a.inputs.size() == 2,
          "metrics takes CLEAN PROCESSED or one list CSV (utterance,condition,clean,processed)");
  for (const std::string& p : a.inputs) RequireInput(p);
  if (!a.out.empty() && a.out != "-") RequireOutput(a.out);

  std::vector<metrics::MetricInput> inputs;
  if (a.inputs.size() == 2) {
    metrics::MetricInput in;
    in.utterance = a.utterance.empty() ? fs::path(a.inputs[0]).stem().string() : a.utterance;
    in.condition = a.condition;
    in.clean = LoadAudio(a.inputs[0]);
    in.processed = LoadAudio(a.inputs[1]);
    inputs.push_back(std::move(in));
  } else {
    const fs::path list = a.inputs[0];
    const std::vector<CsvRow> rows = ReadCsv(list);
    Require(rows.size() > 1, "metric list " + list.string() + " has no rows");
    const std::string ctx = "metric list " + list.string();
    const std::size_t cu = CsvColumn(rows[0], "utterance", ctx);
    const std::size_t cd = CsvColumn(rows[0], "condition", ctx);
    const std::size_t cc = CsvColumn(rows[0], "clean", ctx);
    const std::size_t cp = CsvColumn(rows[0], "processed", ctx);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      Require(rows[i].size() == rows[0].size(), ctx + ": row " + std::to_string(i) + " has the wrong column count");
      RequireInput(list.parent_path() / rows[i][cc]);
      RequireInput(list.parent_path() / rows[i][cp]);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      metrics::MetricInput in;
      in.utterance = rows[i][cu];
      in.condition = rows[i][cd];
      in.clean = LoadAudio(list.parent_path() / rows[i][cc]);
      in.processed = LoadAudio(list.parent_path() / rows[i][cp]);
      inputs.push_back(std::move(in));
    }
  }
  Emit(a.out, metrics::ComputeReport(inputs).ToCsv(), out);
}

// ---- stats -----------------------------------------------------------------

struct TableArgs {
  std::string table, out;
  std::string response = "stoi";
  std::string label_factors;  // names for ':'-separated condition labels
  bool per_trial = false;
  int practice_trials = 20;
};

// A metric report becomes one observation per row: subject = utterance,
// factor levels = the condition label split on ':'.
stats::ObservationTable ReportToTable(const metrics::MetricReport& report, const TableArgs& a) {
  Require(a.response == "stoi" || a.response == "ncm", "--response must be stoi or ncm");
  Require(!report.rows.empty(), "metric report has no rows");
  const std::size_t k = SplitOn(report.rows.front().condition, ':').size();
  stats::ObservationTable t;
  if (!a.label_factors.empty()) {
    t.factors = SplitOn(a.label_factors, ',');
    Require(t.factors.size() == k, "--label-factors names " + std::to_string(t.factors.size()) +
                                       " factors but condition labels have " + std::to_string(k) + " parts");
  } else if (k == 1) {
    t.factors = {"Condition"};
  } else {
    for (std::size_t i = 0; i < k; ++i) t.factors.push_back("Factor" + std::to_string(i + 1));
  }
  for (const metrics::MetricRow& r : report.rows) {
    std::vector<std::string> levels = SplitOn(r.condition, ':');
    Require(levels.size() == k, "condition label '" + r.condition + "' has the wrong number of ':' parts");
    t.rows.push_back({r.utterance, std::move(levels), a.response == "stoi" ? r.stoi : r.ncm});
  }
  return t;
}

// Accepts service results, a metric report, or a subject,<factors>,response table.
stats::ObservationTable LoadTable(const TableArgs& a) {
  RequireInput(a.table);
  const std::string text = ReadTextFile(a.table);
  stats::ObservationTable t;
  if (stats::LooksLikeResultsCsv(text)) {
    stats::AggregateOptions opts;
    opts.per_trial = a.per_trial;
    opts.practice_trials = a.practice_trials;
    t = stats::AggregateResults(stats::ParseResultsCsv(text), opts);
  } else if (text.rfind("utterance,condition,stoi,ncm", 0) == 0) {
    t = ReportToTable(metrics::MetricReport::FromCsv(text), a);
  } else {
    t = stats::ObservationTable::FromCsv(text);
  }
  t.Validate();
  return t;
}

struct AnovaArgs {
  std::string factors;
  std::string format = "csv";
};

void CmdAnova(const TableArgs& t, const AnovaArgs& a, std::ostream& out) {
  Require(a.format == "csv" || a.format == "text", "--format must be csv or text for anova");
  if (!t.out.empty() && t.out != "-") RequireOutput(t.out);
  const stats::ObservationTable table = LoadTable(t);
  const stats::AnovaTable anova =
      stats::AnovaFactorial(table, a.factors.empty() ? std::vector<std::string>{} : SplitOn(a.factors, ','));
  Emit(t.out, a.format == "csv" ? anova.ToCsv() : anova.ToText(), out);
}

struct TTestArgs {
  std::string factor = "Condition";
  std::string level_a, level_b;
  bool pooled = false;
};

void CmdTTest(const TableArgs& t, const TTestArgs& a, std::ostream& out) {
  if (!t.out.empty() && t.out != "-") RequireOutput(t.out);
  const stats::ObservationTable table = LoadTable(t);
  const std::size_t f = table.FactorIndex(a.factor);
  stats::TTestResult r;
  if (a.pooled) {
    std::vector<double> xa, xb;
    for (const stats::Observation& o : table.rows) {
      if (o.levels[f] == a.level_a) xa.push_back(o.response);
      if (o.levels[f] == a.level_b) xb.push_back(o.response);
    }
    r = stats::PooledTTest(xa, xb);
  } else {
    // Per-subject means at each level; subjects paired in order of first
    // appearance.
    std::vector<std::string> order;
    std::map<std::string, std::array<std::pair<double, int>, 2>> acc;
    for (const stats::Observation& o : table.rows) {
      const int side = o.levels[f] == a.level_a ? 0 : o.levels[f] == a.level_b ? 1 : -1;
      if (side < 0) continue;
      auto [it, inserted] = acc.try_emplace(o.subject);
      if (inserted) order.push_back(o.subject);
      it->second[side].first += o.response;
      it->second[side].second += 1;
    }
    std::vector<double> xa, xb;
    for (const std::string& s : order) {
      const auto& v = acc[s];
      if (v[0].second == 0 || v[1].second == 0) continue;
      xa.push_back(v[0].first / v[0].second);
      xb.push_back(v[1].first / v[1].second);
    }
    r = stats::PairedTTest(xa, xb);
  }
  std::string text = "test,level_a,level_b,n,mean_a,mean_b,sd_a,sd_b,t,df,p\n";
  text += CsvLine({a.pooled ? "pooled" : "paired", a.level_a, a.level_b, std::to_string(r.n), FormatNumber(r.mean_a),
                   FormatNumber(r.mean_b), FormatNumber(r.sd_a), FormatNumber(r.sd_b), FormatNumber(r.t),
                   FormatNumber(r.df), FormatNumber(r.p)});
  Emit(t.out, text, out);
}

void CmdDescribe(const TableArgs& t, const std::string& by, std::ostream& out) {
  if (!t.out.empty() && t.out != "-") RequireOutput(t.out);
  const stats::ObservationTable table = LoadTable(t);
  const std::vector<std::string> group_by = by.empty() ? table.factors : SplitOn(by, ',');
  Emit(t.out, stats::SummaryToCsv(group_by, stats::DescriptiveSummary(table, group_by)), out);
}

// ---- session / serve -------------------------------------------------------

std::string DefaultCorpusRoot() {
  const char* env = std::getenv("CISIMKIT_DATA_DIR");
  return env ? env : "";
}

struct SessionArgs {
  std::string corpus, out;
  double snr_db = 1.0;
};

void CmdSession(const SessionArgs& a, const Common& c, std::ostream& out) {
  const std::string root = a.corpus.empty() ? DefaultCorpusRoot() : a.corpus;
  Require(!root.empty(), "no corpus root: pass --corpus or set CISIMKIT_DATA_DIR");
  RequireInput(fs::path(root) / "test_ids.txt");
  if (!a.out.empty() && a.out != "-") RequireOutput(a.out);
  const corpus::SessionPlan plan =
      corpus::BuildSessionPlan(corpus::ReadIdList(fs::path(root) / "test_ids.txt"), a.snr_db, c.seed);
  Emit(a.out, plan.ToJson() + "\n", out);
}

struct ServeArgs {
  std::string corpus, state, host = "127.0.0.1", static_dir;
  int port = 8080;
};

void CmdServe(const ServeArgs& a, std::ostream& out) {
  service::ServerConfig cfg;
  cfg.corpus_root = a.corpus.empty() ? DefaultCorpusRoot() : a.corpus;
  Require(!cfg.corpus_root.empty(), "no corpus root: pass --corpus or set CISIMKIT_DATA_DIR");
  RequireInput(cfg.corpus_root / "test_ids.txt");
  Require(!a.state.empty(), "--state is required");
  if (!a.static_dir.empty()) Require(fs::is_directory(a.static_dir), "static directory not found: " + a.static_dir);
  Require(a.port >= 0 && a.port <= 65535, "--port must be in 0..65535");
  cfg.state_dir = a.state;
  cfg.host = a.host;
  cfg.port = a.port;
  cfg.static_dir = a.static_dir;

  // Server threads inherit the blocked mask, so the signal lands in sigwait.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  service::ExperimentServer server(cfg);
  const int port = server.Start();
  out << "listening on http://" << a.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.Stop();
  pthread_sigmask(SIG_UNBLOCK, &stop_signals, nullptr);
}

// ---- plots as data ---------------------------------------------------------

struct SpectrogramArgs {
  std::string in, out, format = "csv", window = "hann";
  std::size_t frame_len = 512, hop = 128;
  bool db = false;
  double floor_db = -80.0;
};

void CmdSpectrogram(const SpectrogramArgs& a) {
  Require(a.format == "csv" || a.format == "pgm", "--format must be csv or pgm");
  Require(a.window == "hann" || a.window == "rect", "--window must be hann or rect");
  RequireInput(a.in);
  RequireOutput(a.out);
  const dsp::AudioBuffer x = LoadAudio(a.in);
  const dsp::SpectrogramMatrix s = dsp::Spectrogram(
      x, a.frame_len, a.hop, a.window == "hann" ? dsp::Window::kHann : dsp::Window::kRectangular);
  if (a.format == "pgm") {
    dsp::WriteSpectrogramPgm(a.out, dsp::ToDecibels(s, a.floor_db), a.floor_db);
  } else {
    dsp::WriteSpectrogramCsv(a.out, a.db ? dsp::ToDecibels(s, a.floor_db) : s);
  }
}

struct EnvelopeArgs {
  std::string in, out;
  int channel = 1;
};

void CmdEnvelope(const EnvelopeArgs& a, const Common& c, std::ostream& out) {
  const vocoder::VocoderConfig cfg = vocoder::VocoderConfig::FromConfig(LoadConfig(c));
  Require(a.channel >= 1 && a.channel <= cfg.num_channels(),
          "channel out of range: " + std::to_string(a.channel) + " (the vocoder has " +
              std::to_string(cfg.num_channels()) + " channels)");
  RequireInput(a.in);
  if (!a.out.empty() && a.out != "-") RequireOutput(a.out);
  const dsp::AudioBuffer x = LoadAudio(a.in);
  const dsp::AudioBuffer env = vocoder::Vocoder(cfg, x.sample_rate).ChannelEnvelope(x, a.channel - 1);
  std::string text = "time_s,envelope\n";
  for (std::size_t n = 0; n < env.size(); ++n) {
    text += FormatNumber(static_cast<double>(n) / env.sample_rate) + "," + FormatNumber(env.samples[n]) + "\n";
  }
  Emit(a.out, text, out);
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind, out;
  double seconds = 2.0;
};

void CmdSynth(const SynthArgs& a, const Common& c) {
  RequireOutput(a.out);
  Require(a.seconds > 0.0, "--seconds must be positive");
  dsp::AudioBuffer x;
  if (a.kind == "speech") {
    x = corpus::SyntheticUtterance(c.seed, a.seconds);
  } else if (a.kind == "engine") {
    x = corpus::EngineNoise(c.seed, a.seconds);
  } else if (a.kind == "street") {
    x = corpus::StreetNoise(c.seed, a.seconds);
  } else {
    throw Error("unknown synth kind '" + a.kind + "' (expected speech, engine or street)");
  }
  dsp::WriteWav(a.out, x);
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cochlear-implant simulation and speech-enhancement toolkit", "cisimkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  app.add_option("--config", common.config_path, "Key/value config file (flags take precedence)");
  app.add_option("--seed", common.seed, "Seed for every random choice");
  app.add_flag("-v,--verbose", common.verbose, "Progress on stderr");

  VocodeArgs vocode;
  auto* vocode_cmd = app.add_subcommand("vocode", "Run the vocoder on a WAV file");
  vocode_cmd->add_option("input", vocode.in)->required();
  vocode_cmd->add_option("--out", vocode.out)->required();

  MixArgs mix;
  auto* mix_cmd = app.add_subcommand("mix", "Mix speech with noise at an exact SNR");
  mix_cmd->add_option("speech", mix.speech)->required();
  mix_cmd->add_option("noise", mix.noise)->required();
  mix_cmd->add_option("--snr", mix.snr_db, "SNR in dB")->required();
  mix_cmd->add_option("--out", mix.out)->required();
  mix_cmd->add_option("--manifest", mix.manifest, "Manifest CSV (stdout when omitted)");
  mix_cmd->add_flag("--append", mix.append, "Add to an existing manifest");
  mix_cmd->add_option("--condition", mix.condition, "Noisy_E or Noisy_S");
  mix_cmd->add_option("--utterance", mix.utterance, "Utterance id (default: speech file stem)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the FCN enhancer");
  train_cmd->add_option("list", train.list, "CSV with utterance,clean,noisy")->required();
  train_cmd->add_option("--out", train.out)->required();
  train_cmd->add_option("--init", train.init, "Start from this model instead of a seeded one");
  train_cmd->add_option("--save-init", train.save_init, "Also save the starting model here");
  train_cmd->add_option("--loss-csv", train.loss_csv);
  train_cmd->add_option("--lr", train.lr);
  train_cmd->add_option("--alpha", train.alpha);
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--batch", train.batch);

  EnhanceArgs enhance;
  auto* enhance_cmd = app.add_subcommand("enhance", "Enhance a noisy WAV with a trained model");
  enhance_cmd->add_option("input", enhance.in)->required();
  enhance_cmd->add_option("--model", enhance.model)->required();
  enhance_cmd->add_option("--out", enhance.out)->required();
  enhance_cmd->add_option("--segment", enhance.segment_s, "Segment length in seconds");
  enhance_cmd->add_option("--overlap", enhance.overlap, "Segment overlap fraction");

  MetricsArgs met;
  auto* metrics_cmd = app.add_subcommand("metrics", "STOI and NCM report");
  metrics_cmd->add_option("inputs", met.inputs, "CLEAN PROCESSED, or one list CSV")->required();
  metrics_cmd->add_option("--out", met.out);
  metrics_cmd->add_option("--condition", met.condition);
  metrics_cmd->add_option("--utterance", met.utterance);

  TableArgs table;
  AnovaArgs anova;
  TTestArgs ttest;
  std::string describe_by;
  auto* stats_cmd = app.add_subcommand("stats", "ANOVA, t-tests and summaries");
  stats_cmd->require_subcommand(1);
  auto add_table_options = [&table](CLI::App* cmd) {
    cmd->add_option("table", table.table, "Results CSV, metric report or subject,<factors>,response table")
        ->required();
    cmd->add_option("--out", table.out);
    cmd->add_option("--response", table.response, "Metric report column: stoi or ncm");
    cmd->add_option("--label-factors", table.label_factors, "Names for ':'-separated condition labels");
    cmd->add_flag("--per-trial", table.per_trial, "One observation per trial for results input");
    cmd->add_option("--practice-trials", table.practice_trials);
  };
  auto* anova_cmd = stats_cmd->add_subcommand("anova", "Factorial ANOVA");
  add_table_options(anova_cmd);
  anova_cmd->add_option("--factors", anova.factors, "Comma-separated subset of factors");
  anova_cmd->add_option("--format", anova.format, "csv or text");
  auto* ttest_cmd = stats_cmd->add_subcommand("ttest", "Two-level t-test");
  add_table_options(ttest_cmd);
  ttest_cmd->add_option("--factor", ttest.factor);
  ttest_cmd->add_option("--a", ttest.level_a)->required();
  ttest_cmd->add_option("--b", ttest.level_b)->required();
  ttest_cmd->add_flag("--pooled", ttest.pooled, "Independent samples instead of paired subjects");
  auto* describe_cmd = stats_cmd->add_subcommand("describe", "Mean and SD per group");
  add_table_options(describe_cmd);
  describe_cmd->add_option("--by", describe_by, "Comma-separated grouping factors (default: all)");

  SessionArgs session;
  auto* session_cmd = app.add_subcommand("session", "Print the trial plan of a listening session");
  session_cmd->add_option("--snr", session.snr_db, "1 or 4")->required();
  session_cmd->add_option("--corpus", session.corpus, "Corpus root (default: $CISIMKIT_DATA_DIR)");
  session_cmd->add_option("--out", session.out);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the listening-test server");
  serve_cmd->add_option("--corpus", serve.corpus, "Corpus root (default: $CISIMKIT_DATA_DIR)");
  serve_cmd->add_option("--state", serve.state, "Session log directory")->required();
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port, "0 picks a free port");
  serve_cmd->add_option("--static", serve.static_dir, "Directory served at /");

  SpectrogramArgs spec;
  auto* spec_cmd = app.add_subcommand("spectrogram", "Magnitude spectrogram as CSV or PGM");
  spec_cmd->add_option("input", spec.in)->required();
  spec_cmd->add_option("--out", spec.out)->required();
  spec_cmd->add_option("--format", spec.format, "csv or pgm");
  spec_cmd->add_option("--frame-len", spec.frame_len);
  spec_cmd->add_option("--hop", spec.hop);
  spec_cmd->add_option("--window", spec.window, "hann or rect");
  spec_cmd->add_flag("--db", spec.db, "CSV in dB relative to the peak");
  spec_cmd->add_option("--floor", spec.floor_db, "dB floor");

  EnvelopeArgs envelope;
  auto* env_cmd = app.add_subcommand("envelope", "Post-lowpass envelope of one vocoder channel");
  env_cmd->add_option("input", envelope.in)->required();
  env_cmd->add_option("--channel", envelope.channel, "1-based channel")->required();
  env_cmd->add_option("--out", envelope.out);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic speech-like or noise signal");
  synth_cmd->add_option("kind", synth.kind, "speech, engine or street")->required();
  synth_cmd->add_option("--seconds", synth.seconds);
  synth_cmd->add_option("--out", synth.out)->required();

  // CLI11 consumes arguments from the back.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*vocode_cmd) CmdVocode(vocode, common);
    else if (*mix_cmd) CmdMix(mix, common, out);
    else if (*train_cmd) CmdTrain(train, common, err);
    else if (*enhance_cmd) CmdEnhance(enhance);
    else if (*metrics_cmd) CmdMetrics(met, out);
    else if (*anova_cmd) CmdAnova(table, anova, out);
    else if (*ttest_cmd) CmdTTest(table, ttest, out);
    else if (*describe_cmd) CmdDescribe(table, describe_by, out);
    else if (*session_cmd) CmdSession(session, common, out);
    else if (*serve_cmd) CmdServe(serve, out);
    else if (*spec_cmd) CmdSpectrogram(spec);
    else if (*env_cmd) CmdEnvelope(envelope, common, out);
    else if (*synth_cmd) CmdSynth(synth, common);
  } catch (const Error& e) {
    err << "cisimkit: " << e.what() << "\n";
    return kExitUser;
  } catch (const service::ServiceError& e) {
    err << "cisimkit: " << e.what() << "\n";
    return e.status() < 500 ? kExitUser : kExitInternal;
  } catch (const std::exception& e) {
    err << "cisimkit: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace cisimkit::cli
