#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairmine/checkpoint.hpp"
#include "fairmine/datagen.hpp"
#include "fairmine/eval.hpp"
#include "fairmine/io.hpp"
#include "fairmine/mining.hpp"
#include "fairmine/model.hpp"
#include "fairmine/sampling.hpp"

namespace fairmine {

struct EvalConfig {
  double target_far = 1e-3;
  /// Optimizer steps between validations.
  std::size_t validation_every = 200;
  /// Overall validation set used to calibrate theta during training.
  std::size_t val_pairs = 1000;
  /// Per-group validation pool feeding the dynamic weights.
  std::size_t val_pool = 300;
  std::size_t test_pairs = 2000;
  /// Per-group test pool; also the per-cell size of the FAR matrices.
  std::size_t test_pool = 300;
  bool country_matrix = false;
  std::size_t roc_splits = 5;
  double roc_fraction = 0.5;
  std::vector<double> roc_far_levels = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0};

  void validate() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  GeneratorConfig generator;
  /// Optional dataset file replacing the generated training set.
  std::string dataset_path;
  TrainingConfig training;
  SamplerSpec sampler;
  /// Sampler preset name as written in the config.
  std::string strategy = "natural";
  EvalConfig eval;

  void validate() const;
  /// Every effective setting in a fixed order; hash() is taken over this text.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const { return hex64(hash()); }

  /// Applies a root seed and re-derives the generator seed from it.
  void set_seed(std::uint64_t root);

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Sampler for a preset name: natural, equal, adjusted, fixed, dynamic,
/// homogeneous, homogeneous_dynamic.
SamplerSpec make_sampler(const std::string& strategy, Axis axis, const Vector& weights, double exponent,
                         double smoothing, double far_floor);

// Held-out data drawn from the same generator as the training set.
struct EvalData {
  EvalSet overall;
  std::vector<EvalSet> pools;  // one per group along the sampler axis
};

struct Splits {
  Generator generator;
  Dataset train;
  Dataset validation;
  std::vector<Dataset> validation_pools;  // along the sampler axis
};

Splits prepare_data(const ExperimentConfig& config);

struct EpochMetrics {
  std::uint64_t step = 0;
  std::uint64_t batches = 0;
  std::uint64_t triplets = 0;
  double mean_loss = 0.0;
  double theta = 0.0;
  PairCount overall_far;
  std::vector<PairCount> group_far;
  std::vector<double> group_frr;
  Vector weights;  // sampler weights in force after this validation; empty for natural
  std::string checkpoint;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct RunRecord {
  std::string config_hash;
  std::string strategy;
  Axis axis = Axis::Continent;
  std::vector<std::string> groups;
  std::vector<EpochMetrics> epochs;
  std::uint64_t steps = 0;
  std::uint64_t empty_batches = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

std::string to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

struct TrainOptions {
  std::filesystem::path out_dir;
  /// Checkpoint to resume from.
  std::optional<std::filesystem::path> resume;
  /// Stop after this many total optimizer steps, leaving resume.fmck behind.
  std::optional<std::uint64_t> stop_after;
  bool write_checkpoints = true;
};

struct TrainResult {
  RunRecord record;
  EmbeddingNetwork network;
  bool finished = false;
};

/// Runs (or resumes) training and writes config.ini, run.json, timings.json,
/// model.fmck and the periodic checkpoints into out_dir.
TrainResult run_training(const ExperimentConfig& config, const TrainOptions& options);

struct GroupReport {
  std::string group;
  PairCount far;
  std::uint64_t genuine = 0;
  std::uint64_t rejected = 0;
};

struct EvalReport {
  std::string config_hash;
  double target_far = 0.0;
  double theta = 0.0;
  PairCount overall_far;
  std::uint64_t genuine = 0;
  std::uint64_t rejected = 0;
  std::vector<GroupReport> continents;  // diagonal of the continent matrix
  std::vector<GroupReport> genders;
  FarMatrix continent_matrix;
  std::optional<FarMatrix> country_matrix;
  RocSummary roc;

  double overall_frr() const { return genuine == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(genuine); }
  /// Largest within-continent FAR divided by the overall FAR.
  double worst_ratio() const;
};

EvalReport evaluate(const ExperimentConfig& config, const EmbeddingNetwork& net);

/// Writes report.json, far_matrix_continent.csv (and far_matrix_country.csv),
/// roc.csv. The weight trajectory of record, when given, goes into the JSON.
void write_eval_report(const std::filesystem::path& out_dir, const EvalReport& report,
                       const RunRecord* record = nullptr);

/// Embedding rows (selfie then doc per pair) for the dataset.
std::vector<EmbeddingRow> export_embeddings(const EmbeddingNetwork& net, const Dataset& dataset);

/// Test split of the config, as used by evaluate().
Dataset test_dataset(const ExperimentConfig& config);

/// Aggregates report.json of several run directories into one CSV per table:
/// summary.csv (one row per run) and weights.csv (long-format trajectories).
void aggregate_reports(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

}  // namespace fairmine
