// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "aesmpn/cli/gradcheck_suite.hpp"
#include "aesmpn/data/dataset.hpp"
#include "aesmpn/data/generator.hpp"
#include "aesmpn/data/normalize.hpp"
#include "aesmpn/data/split.hpp"
#include "aesmpn/model/model.hpp"
#include "aesmpn/nn/checkpoint.hpp"
#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/kernels.hpp"
#include "aesmpn/numerics/random.hpp"
#include "aesmpn/train/trainer.hpp"

#ifndef AESMPN_VERSION
#define AESMPN_VERSION "unknown"
#endif

namespace aesmpn::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::array<const char*, 4> kVariants{"ae-mpnn", "ae-smpn2", "ae-smpn3", "ae-smpn4"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Run record in <out>/manifest.json. Written once before any other output
// and again on success with the timings filled in.
class Manifest {
 public:
  Manifest(fs::path dir, std::string command) : dir_(std::move(dir)) {
    doc_["command"] = std::move(command);
    doc_["code_version"] = AESMPN_VERSION;
    doc_["status"] = "running";
    doc_["seed"] = nullptr;
    doc_["config"] = json::object();
    doc_["datasets"] = json::array();
    doc_["outputs"] = json::array();
    doc_["timings"] = json::object();
  }

  json& doc() { return doc_; }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void dataset(const fs::path& path, const std::string& bytes) {
    doc_["datasets"].push_back({{"path", path.string()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  void output(const std::string& relative) { doc_["outputs"].push_back(relative); }

  void start() {
    fs::create_directories(dir_);
    started_ = std::chrono::steady_clock::now();
    doc_["timings"]["started_utc"] = utc_now();
    write();
  }

  void finish() {
    for (const auto& rel : doc_["outputs"]) {
      if (!fs::exists(dir_ / rel.get<std::string>())) {
        throw std::runtime_error("declared output missing: " + rel.get<std::string>());
      }
    }
    doc_["status"] = "complete";
    doc_["timings"]["finished_utc"] = utc_now();
    doc_["timings"]["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    write();
  }

 private:
  void write() { write_atomic(dir_ / "manifest.json", doc_.dump(2) + "\n"); }

  fs::path dir_;
  json doc_;
  std::chrono::steady_clock::time_point started_;
};

std::array<double, 3> parse_split(const std::string& text) {
  std::array<double, 3> f{};
  std::istringstream in(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(in, part, ',')) {
    if (i == 3) throw UsageError("--split needs three comma-separated fractions, got '" + text + "'");
    try {
      std::size_t used = 0;
      f[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw UsageError("--split: '" + part + "' is not a number");
    }
    ++i;
  }
  if (i != 3) throw UsageError("--split needs three comma-separated fractions, got '" + text + "'");
  return f;
}

std::string split_string(const std::array<double, 3>& f) { return fmt(f[0]) + "," + fmt(f[1]) + "," + fmt(f[2]); }

std::vector<std::string> parse_models(const std::string& text) {
  if (text == "all") return {kVariants.begin(), kVariants.end()};
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (std::find(kVariants.begin(), kVariants.end(), name) == kVariants.end()) {
      throw UsageError("unknown model '" + name + "' (expected ae-mpnn, ae-smpn2, ae-smpn3, ae-smpn4 or all)");
    }
    if (std::find(out.begin(), out.end(), name) != out.end()) throw UsageError("model '" + name + "' listed twice");
    out.push_back(name);
  }
  if (out.empty()) throw UsageError("--model is empty");
  return out;
}

void select_kernels(const std::string& name) {
  try {
    numerics::kernels::select(numerics::kernels::parse_preference(name));
  } catch (const std::exception& e) {
    throw UsageError(std::string("--kernels: ") + e.what());
  }
}

struct LoadedData {
  std::vector<data::SampleRecord> records;
  std::vector<model::NetworkSample> samples;
  std::string bytes;
};

LoadedData load_data(const fs::path& path, bool strict, const data::NormalizationSpec& spec, std::ostream& err) {
  if (!fs::exists(path)) throw UsageError("dataset not found: " + path.string());
  LoadedData d;
  d.bytes = read_file(path);
  std::istringstream in(d.bytes);
  data::ValidationOptions options;
  options.strict = strict;
  data::LoadResult loaded = data::read_dataset(in, options);
  for (const auto& w : loaded.warnings) err << "warning: " << path.string() << ": " << w << "\n";
  if (loaded.samples.empty()) throw UsageError("dataset " + path.string() + " has no samples");
  d.records = std::move(loaded.samples);
  d.samples.reserve(d.records.size());
  for (const auto& r : d.records) d.samples.push_back(data::to_network_sample(r, spec, strict));
  return d;
}

std::string compact_spec(const data::NormalizationSpec& spec) { return json::parse(data::serialize_spec(spec)).dump(); }

std::string metrics_row(const std::string& name, const train::MetricsReport& tr, const train::MetricsReport& va,
                        const train::MetricsReport& te) {
  return name + "," + fmt(tr.mape_pct) + "," + fmt(va.mape_pct) + "," + fmt(te.mape_pct) + "," + fmt(te.mae) + "," +
         fmt(te.mse) + "," + fmt(te.msle);
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  data::GeneratorConfig config;
  std::string out = "out";
};

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  try {
    o.config.validate();
  } catch (const data::GenerationError& e) {
    throw UsageError(e.what());
  }
  const fs::path dir(o.out);
  Manifest manifest(dir, "gen");
  manifest.seed(o.config.seed);
  json& c = manifest.doc()["config"];
  c["samples"] = o.config.samples;
  c["nodes_min"] = o.config.nodes_min;
  c["nodes_max"] = o.config.nodes_max;
  c["directed_edges_min"] = o.config.directed_edges_min;
  c["directed_edges_max"] = o.config.directed_edges_max;
  c["capacities_gbps"] = o.config.capacities_gbps;
  c["flows_min"] = o.config.flows_min;
  c["flows_max"] = o.config.flows_max;
  c["rho_max"] = o.config.rho_max;
  c["max_retries"] = o.config.max_retries;
  manifest.output("dataset.jsonl");
  manifest.start();

  if (o.config.samples == 0) err << "warning: --samples 0 writes an empty dataset\n";
  const std::vector<data::SampleRecord> samples = data::generate_synthetic(o.config);
  data::save_dataset(dir / "dataset.jsonl", samples);
  std::size_t flows = 0;
  for (const auto& s : samples) flows += s.flows.size();
  manifest.finish();
  out << "wrote " << samples.size() << " samples (" << flows << " flows) to " << (dir / "dataset.jsonl").string()
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string data;
  std::string models = "all";
  std::size_t epochs = 50;
  double lr = 0.001;
  std::uint64_t seed = 42;
  std::size_t hidden = 64;
  std::size_t iterations = 8;
  std::string split = "0.8,0.1,0.1";
  std::size_t ae_pretrain_steps = 0;
  double clip_norm = 5.0;
  std::string norm;
  std::string config;
  bool strict = false;
  std::string kernels = "auto";
  std::string out = "out";
};

// Config file keys mirror the long flag names with '-' replaced by '_'.
void apply_config_file(TrainOptions& o, const CLI::App& sub) {
  if (o.config.empty()) return;
  json j;
  try {
    j = json::parse(read_file(o.config));
  } catch (const json::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + o.config + " must hold a JSON object");
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "model") {
        if (!given("--model")) o.models = value.get<std::string>();
      } else if (key == "epochs") {
        if (!given("--epochs")) o.epochs = value.get<std::size_t>();
      } else if (key == "lr") {
        if (!given("--lr")) o.lr = value.get<double>();
      } else if (key == "seed") {
        if (!given("--seed")) o.seed = value.get<std::uint64_t>();
      } else if (key == "hidden") {
        if (!given("--hidden")) o.hidden = value.get<std::size_t>();
      } else if (key == "iterations") {
        if (!given("--iterations")) o.iterations = value.get<std::size_t>();
      } else if (key == "split") {
        if (!given("--split")) o.split = value.get<std::string>();
      } else if (key == "ae_pretrain_steps") {
        if (!given("--ae-pretrain-steps")) o.ae_pretrain_steps = value.get<std::size_t>();
      } else if (key == "clip_norm") {
        if (!given("--clip-norm")) o.clip_norm = value.get<double>();
      } else if (key == "norm") {
        if (!given("--norm")) o.norm = value.get<std::string>();
      } else if (key == "strict") {
        if (!given("--strict")) o.strict = value.get<bool>();
      } else if (key == "kernels") {
        if (!given("--kernels")) o.kernels = value.get<std::string>();
      } else {
        throw UsageError("config " + o.config + ": unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  select_kernels(o.kernels);
  const std::vector<std::string> models = parse_models(o.models);
  const std::array<double, 3> fractions = parse_split(o.split);
  train::TrainConfig base;
  base.epochs = o.epochs;
  base.learning_rate = o.lr;
  base.seed = o.seed;
  base.ae_pretrain = o.ae_pretrain_steps > 0;
  base.ae_pretrain_steps = o.ae_pretrain_steps;
  base.clip_norm = o.clip_norm;
  base.validate();
  model::ModelConfig mc;
  mc.iterations = o.iterations;
  mc.hidden = o.hidden;
  mc.latent = o.hidden;
  mc.flow_features = data::kFlowFeatureWidth;
  mc.l2_features = data::kLinkFeatureWidth;
  mc.l3_features = data::kLinkFeatureWidth;
  mc.validate();
  data::NormalizationSpec spec;
  if (!o.norm.empty()) spec = data::load_spec(o.norm);
  spec.validate();

  const LoadedData d = load_data(o.data, o.strict, spec, err);
  const auto split = data::split_dataset(d.samples, fractions, o.seed);

  const fs::path dir(o.out);
  Manifest manifest(dir, "train");
  manifest.seed(o.seed);
  manifest.dataset(o.data, d.bytes);
  json& c = manifest.doc()["config"];
  c["hyperparameters"] = {{"epochs", base.epochs},
                          {"ae_embedding_size", mc.latent},
                          {"mpnn_iterations", mc.iterations},
                          {"learning_rate", base.learning_rate},
                          {"activation", "SELU"},
                          {"optimizer", "Adam"},
                          {"loss", "MAPE"},
                          {"evaluation_metrics", {"MAPE", "MAE", "MSE", "MSLE"}}};
  c["models"] = models;
  c["adam"] = {{"beta1", base.beta1}, {"beta2", base.beta2}, {"eps", base.eps}};
  c["batch_size"] = 1;
  c["clip_norm"] = base.clip_norm;
  c["ae_pretrain_steps"] = base.ae_pretrain_steps;
  c["split"] = fractions;
  c["split_sizes"] = {split.train.size(), split.val.size(), split.test.size()};
  c["strict"] = o.strict;
  c["kernels"] = std::string(numerics::kernels::active().name);
  c["normalization"] = json::parse(data::serialize_spec(spec));
  for (const auto& m : models) {
    manifest.output(m + "/checkpoint.txt");
    manifest.output(m + "/loss.csv");
  }
  manifest.output("metrics.csv");
  manifest.start();

  std::string metrics = std::string(kMetricsHeader) + "\n";
  for (const auto& name : models) {
    model::ModelConfig cfg = mc;
    cfg.readout_depth = model::readout_depth_for(name);
    train::TrainConfig tc = base;
    tc.readout_depth = cfg.readout_depth;
    const std::size_t epochs = tc.epochs;
    train::TrainResult result =
        train::train(model::ModelParams::create(cfg, o.seed), split.train, split.val, spec, tc,
                     [&](const train::EpochRecord& r) {
                       out << "[" << name << "] epoch " << r.epoch << "/" << epochs << " train_mape "
                           << std::setprecision(6) << r.train_mape << " val_mape " << r.val_mape << "\n";
                       out.flush();
                     });
    const auto tr = train::evaluate(result.best, split.train, spec, "train");
    const auto va = train::evaluate(result.best, split.val, spec, "val");
    const auto te = train::evaluate(result.best, split.test, spec, "test");

    fs::create_directories(dir / name);
    nn::Checkpoint ck;
    ck.meta["model"] = name;
    ck.meta["hidden"] = std::to_string(cfg.hidden);
    ck.meta["latent"] = std::to_string(cfg.latent);
    ck.meta["iterations"] = std::to_string(cfg.iterations);
    ck.meta["readout_depth"] = std::to_string(cfg.readout_depth);
    ck.meta["flow_features"] = std::to_string(cfg.flow_features);
    ck.meta["l2_features"] = std::to_string(cfg.l2_features);
    ck.meta["l3_features"] = std::to_string(cfg.l3_features);
    ck.meta["seed"] = std::to_string(o.seed);
    ck.meta["split"] = split_string(fractions);
    ck.meta["normalization"] = compact_spec(spec);
    ck.meta["best_epoch"] = std::to_string(result.best_epoch);
    ck.meta["train_mape"] = fmt(tr.mape_pct);
    ck.meta["dataset_fnv1a64"] = hex64(fnv1a64(d.bytes));
    ck.params = result.best.store;
    nn::save_checkpoint(dir / name / "checkpoint.txt", ck);

    std::string loss = std::string(kLossHeader) + "\n";
    for (const auto& r : result.history) {
      loss += std::to_string(r.epoch) + "," + fmt(r.train_mape) + "," + fmt(r.val_mape) + "\n";
    }
    write_atomic(dir / name / "loss.csv", loss);
    metrics += metrics_row(name, tr, va, te) + "\n";
    out << "[" << name << "] best epoch " << result.best_epoch << ": train " << tr.mape_pct << "% val "
        << va.mape_pct << "% test " << te.mape_pct << "%\n";
  }
  write_atomic(dir / "metrics.csv", metrics);
  manifest.finish();
  return kExitOk;
}

// ---------------------------------------------------------------- eval / predict

struct LoadedModel {
  std::string name;
  model::ModelParams params;
  data::NormalizationSpec spec;
  std::uint64_t seed = 0;
  std::array<double, 3> split{};
};

const std::string& meta(const nn::Checkpoint& ck, const std::string& key) {
  const auto it = ck.meta.find(key);
  if (it == ck.meta.end()) throw nn::CheckpointError("checkpoint lacks meta '" + key + "'");
  return it->second;
}

std::size_t meta_size(const nn::Checkpoint& ck, const std::string& key) {
  const std::string& v = meta(ck, key);
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::logic_error&) {
    throw nn::CheckpointError("checkpoint meta '" + key + "' is not an integer: " + v);
  }
}

struct ModelOverrides {
  std::string model;
  std::size_t hidden = 0;
  std::size_t iterations = 0;
};

LoadedModel load_model(const std::string& path, const ModelOverrides& req) {
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path);
  nn::Checkpoint ck = nn::load_checkpoint(path);
  model::ModelConfig cfg;
  cfg.hidden = meta_size(ck, "hidden");
  cfg.latent = meta_size(ck, "latent");
  cfg.iterations = meta_size(ck, "iterations");
  cfg.readout_depth = meta_size(ck, "readout_depth");
  cfg.flow_features = meta_size(ck, "flow_features");
  cfg.l2_features = meta_size(ck, "l2_features");
  cfg.l3_features = meta_size(ck, "l3_features");
  LoadedModel m;
  m.name = meta(ck, "model");
  if (!req.model.empty() && req.model != m.name) {
    throw DimensionError("checkpoint holds model " + m.name + " (readout depth " +
                         std::to_string(cfg.readout_depth) + "), requested " + req.model + " (readout depth " +
                         std::to_string(model::readout_depth_for(req.model)) + ")");
  }
  if (req.hidden != 0 && req.hidden != cfg.hidden) {
    throw DimensionError("checkpoint hidden width " + std::to_string(cfg.hidden) + ", requested " +
                         std::to_string(req.hidden));
  }
  if (req.iterations != 0 && req.iterations != cfg.iterations) {
    throw DimensionError("checkpoint has " + std::to_string(cfg.iterations) + " iterations, requested " +
                         std::to_string(req.iterations));
  }
  if (cfg.flow_features != data::kFlowFeatureWidth || cfg.l2_features != data::kLinkFeatureWidth ||
      cfg.l3_features != data::kLinkFeatureWidth) {
    throw DimensionError("checkpoint expects feature widths flow " + std::to_string(cfg.flow_features) + ", l2 " +
                         std::to_string(cfg.l2_features) + ", l3 " + std::to_string(cfg.l3_features) +
                         "; dataset provides flow " + std::to_string(data::kFlowFeatureWidth) + ", l2 " +
                         std::to_string(data::kLinkFeatureWidth) + ", l3 " +
                         std::to_string(data::kLinkFeatureWidth));
  }
  cfg.validate();
  m.params = model::ModelParams::from_store(cfg, std::move(ck.params));
  m.spec = data::parse_spec(meta(ck, "normalization"));
  m.seed = meta_size(ck, "seed");
  try {
    m.split = parse_split(meta(ck, "split"));
  } catch (const UsageError& e) {
    throw nn::CheckpointError(std::string("checkpoint meta 'split': ") + e.what());
  }
  return m;
}

struct EvalOptions {
  std::string data;
  std::string checkpoint;
  ModelOverrides overrides;
  bool whole = false;
  bool strict = false;
  std::string kernels = "auto";
  std::string out = "out";
};

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  select_kernels(o.kernels);
  const LoadedModel m = load_model(o.checkpoint, o.overrides);
  const LoadedData d = load_data(o.data, o.strict, m.spec, err);

  const fs::path dir(o.out);
  Manifest manifest(dir, "eval");
  manifest.seed(m.seed);
  manifest.dataset(o.data, d.bytes);
  manifest.doc()["config"] = {{"checkpoint", o.checkpoint},
                              {"model", m.name},
                              {"split", o.whole ? json("none") : json(m.split)},
                              {"kernels", std::string(numerics::kernels::active().name)}};
  manifest.output("metrics.csv");
  manifest.start();

  std::string row;
  if (o.whole) {
    const auto te = train::evaluate(m.params, d.samples, m.spec, "test");
    row = m.name + ",,," + fmt(te.mape_pct) + "," + fmt(te.mae) + "," + fmt(te.mse) + "," + fmt(te.msle);
    out << m.name << ": MAPE " << te.mape_pct << "% MAE " << te.mae << " MSE " << te.mse << " MSLE " << te.msle
        << " over " << d.samples.size() << " samples\n";
  } else {
    const auto split = data::split_dataset(d.samples, m.split, m.seed);
    const auto tr = train::evaluate(m.params, split.train, m.spec, "train");
    const auto va = train::evaluate(m.params, split.val, m.spec, "val");
    const auto te = train::evaluate(m.params, split.test, m.spec, "test");
    row = metrics_row(m.name, tr, va, te);
    out << m.name << ": train " << tr.mape_pct << "% val " << va.mape_pct << "% test " << te.mape_pct << "% (MAE "
        << te.mae << " MSE " << te.mse << " MSLE " << te.msle << ")\n";
  }
  write_atomic(dir / "metrics.csv", std::string(kMetricsHeader) + "\n" + row + "\n");
  manifest.finish();
  return kExitOk;
}

struct PredictOptions {
  std::string data;
  std::string checkpoint;
  ModelOverrides overrides;
  bool strict = false;
  std::string kernels = "auto";
  std::string out = "out";
};

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  select_kernels(o.kernels);
  const LoadedModel m = load_model(o.checkpoint, o.overrides);
  const LoadedData d = load_data(o.data, o.strict, m.spec, err);

  std::string csv = std::string(kPredictionsHeader) + "\n";
  std::size_t rows = 0;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const std::vector<double> p = model::predict(m.params, d.samples[i]);
    for (std::size_t f = 0; f < p.size(); ++f) {
      csv += std::to_string(d.records[i].id) + "," + std::to_string(f) + "," +
             fmt(data::denormalize_delay(p[f], m.spec)) + "\n";
      ++rows;
    }
  }

  const fs::path dir(o.out);
  Manifest manifest(dir, "predict");
  manifest.seed(m.seed);
  manifest.dataset(o.data, d.bytes);
  manifest.doc()["config"] = {{"checkpoint", o.checkpoint},
                              {"model", m.name},
                              {"kernels", std::string(numerics::kernels::active().name)}};
  manifest.output("predictions.csv");
  manifest.start();
  write_atomic(dir / "predictions.csv", csv);
  manifest.finish();
  out << "wrote " << rows << " predictions to " << (dir / "predictions.csv").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradSuiteOptions& o, std::ostream& out) {
  if (!(o.eps > 0.0) || !(o.e2e_eps > 0.0)) throw UsageError("--eps and --e2e-eps must be positive");
  const auto entries = run_gradcheck_suite(o);
  bool ok = true;
  for (const auto& e : entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-22s max_rel_error %.3e  tol %.0e  eps %.0e  coords %4zu  %s", e.group.c_str(),
                  e.name.c_str(), e.max_rel_error, e.tolerance, e.eps, e.coordinates, e.passed() ? "PASS" : "FAIL");
    out << line;
    if (!e.passed()) out << "  worst " << e.worst;
    out << "\n";
    ok = ok && e.passed();
  }
  out << (ok ? "all gradient checks passed" : "gradient check tolerance exceeded") << "\n";
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AE-SMPN network delay model: data generation, training and evaluation", "aesmpn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AESMPN_VERSION);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic M/M/1 dataset");
  g->add_option("--samples", gen.config.samples, "Number of samples")->capture_default_str();
  g->add_option("--nodes-min", gen.config.nodes_min, "Minimum nodes per topology")->capture_default_str();
  g->add_option("--nodes-max", gen.config.nodes_max, "Maximum nodes per topology")->capture_default_str();
  g->add_option("--edges-min", gen.config.directed_edges_min, "Minimum directed L3 links")->capture_default_str();
  g->add_option("--edges-max", gen.config.directed_edges_max, "Maximum directed L3 links")->capture_default_str();
  g->add_option("--flows-min", gen.config.flows_min, "Minimum flows per sample")->capture_default_str();
  g->add_option("--flows-max", gen.config.flows_max, "Maximum flows per sample")->capture_default_str();
  g->add_option("--rho-max", gen.config.rho_max, "Utilization bound per link, in (0, 1)")->capture_default_str();
  g->add_option("--max-retries", gen.config.max_retries, "Rate redraws per flow")->capture_default_str();
  g->add_option("--seed", gen.config.seed, "Seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train one or more model variants");
  t->add_option("--data", tr.data, "Dataset (JSON Lines)")->required();
  t->add_option("--model", tr.models, "ae-mpnn, ae-smpn2, ae-smpn3, ae-smpn4, a comma list, or all")
      ->capture_default_str();
  t->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  t->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  t->add_option("--seed", tr.seed, "Seed for init, shuffling and the split")->capture_default_str();
  t->add_option("--hidden", tr.hidden, "State width and AE embedding size")->capture_default_str();
  t->add_option("--iterations", tr.iterations, "Message-passing rounds")->capture_default_str();
  t->add_option("--split", tr.split, "Train,val,test fractions")->capture_default_str();
  t->add_option("--ae-pretrain-steps", tr.ae_pretrain_steps, "AE reconstruction steps before training (0: off)")
      ->capture_default_str();
  t->add_option("--clip-norm", tr.clip_norm, "Global gradient norm bound (0: off)")->capture_default_str();
  t->add_option("--norm", tr.norm, "Normalization spec (JSON)");
  t->add_option("--config", tr.config, "JSON config; explicit flags take precedence");
  t->add_flag("--strict", tr.strict, "Enforce the measured-testbed value ranges");
  t->add_option("--kernels", tr.kernels, "auto, scalar or avx2")->capture_default_str();
  t->add_option("--out", tr.out, "Output directory")->capture_default_str();

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--data", ev.data, "Dataset (JSON Lines)")->required();
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--model", ev.overrides.model, "Expected model variant");
  e->add_option("--hidden", ev.overrides.hidden, "Expected hidden width");
  e->add_option("--iterations", ev.overrides.iterations, "Expected message-passing rounds");
  e->add_flag("--no-split", ev.whole, "Score the whole dataset as the test split");
  e->add_flag("--strict", ev.strict, "Enforce the measured-testbed value ranges");
  e->add_option("--kernels", ev.kernels, "auto, scalar or avx2")->capture_default_str();
  e->add_option("--out", ev.out, "Output directory")->capture_default_str();

  PredictOptions pr;
  auto* p = app.add_subcommand("predict", "Write per-flow delay predictions");
  p->add_option("--data", pr.data, "Dataset (JSON Lines)")->required();
  p->add_option("--checkpoint", pr.checkpoint, "Checkpoint file")->required();
  p->add_option("--model", pr.overrides.model, "Expected model variant");
  p->add_option("--hidden", pr.overrides.hidden, "Expected hidden width");
  p->add_option("--iterations", pr.overrides.iterations, "Expected message-passing rounds");
  p->add_flag("--strict", pr.strict, "Enforce the measured-testbed value ranges");
  p->add_option("--kernels", pr.kernels, "auto, scalar or avx2")->capture_default_str();
  p->add_option("--out", pr.out, "Output directory")->capture_default_str();

  GradSuiteOptions gc;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  c->add_option("--eps", gc.eps, "Step for ops and layers")->capture_default_str();
  c->add_option("--e2e-eps", gc.e2e_eps, "Step for the full model")->capture_default_str();
  c->add_option("--tol", gc.tolerance, "Tolerance for ops and layers")->capture_default_str();
  c->add_option("--e2e-tol", gc.e2e_tolerance, "Tolerance for the full model")->capture_default_str();
  c->add_option("--seed", gc.seed, "Seed for inputs")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out, err);
    if (t->parsed()) {
      apply_config_file(tr, *t);
      return cmd_train(tr, out, err);
    }
    if (e->parsed()) return cmd_eval(ev, out, err);
    if (p->parsed()) return cmd_predict(pr, out, err);
    if (c->parsed()) return cmd_gradcheck(gc, out);
  } catch (const UsageError& x) {
    err << "error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const data::DataError& x) {
    err << "error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const nn::CheckpointError& x) {
    err << "error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& x) {
    err << "numeric error: " << x.what() << "\n";
    return kExitRuntime;
  } catch (const data::GenerationError& x) {
    err << "generation failed: " << x.what() << "\n";
    return kExitRuntime;
  } catch (const std::logic_error& x) {
    // DimensionError, ContractError and invalid_argument: inputs disagree with the contract
    err << "error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace aesmpn::cli
