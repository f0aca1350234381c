#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "adagnn/boosting/adagnn.hpp"
#include "adagnn/cli/config.hpp"
#include "json.hpp"

namespace adagnn::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Dataset {
  std::shared_ptr<const graphdata::Graph> graph;
  /// Latent modes per node (synthetic data only).
  std::vector<std::vector<std::size_t>> node_modes;
  /// Generator ground truth (synthetic data only).
  nlohmann::json ground_truth;
};

Dataset load_dataset(const ExperimentConfig& config);

/// One trained model with everything needed to score and export it. The
/// context points into `dataset`, so keep the two together.
struct Run {
  Dataset dataset;
  boosting::TaskData data;
  gnn::GraphContext context;
  boosting::BoostResult result;
  double runtime_seconds = 0.0;
};

/// Generates or loads the data, splits it and runs boosting (or the single
/// baseline learner). Nothing is written.
std::unique_ptr<Run> run_experiment(const ExperimentConfig& config, const boosting::ProgressFn& progress = {});

/// metrics.json body: the report plus the run's labels and round records.
nlohmann::json metrics_json(const Run& run, const ExperimentConfig& config);

/// Writes metrics.json, margins.csv, error_curves.csv, embeddings_k{K}.csv,
/// checkpoint.json and manifest.json into `out`.
void write_run(const Run& run, const ExperimentConfig& config, const std::filesystem::path& out,
               const std::string& command);

/// Writes edges.csv, features.csv, labels.csv, ground_truth.json and manifest.json.
void cmd_synth(const ExperimentConfig& config, const std::filesystem::path& out);

std::unique_ptr<Run> cmd_train(const ExperimentConfig& config, const std::filesystem::path& out,
                               const boosting::ProgressFn& progress = {});

/// Rescores a checkpoint on one split ("train", "validation" or "test") and
/// writes eval.json. Returns the written document.
nlohmann::json cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                        const std::string& split, const std::filesystem::path& out);

enum class SweepAxis { num_learners, embed_dim, train_fraction };
SweepAxis parse_sweep_axis(const std::string& text);
std::string to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  double adagnn_test_ap = 0.0;
  double baseline_test_ap = 0.0;
  std::size_t adagnn_learners = 0;
  std::size_t baseline_embed_dim = 0;
  double adagnn_seconds = 0.0;
  double baseline_seconds = 0.0;
};

/// Config of one sweep arm. The baseline is a single learner whose embedding
/// dimension equals the ensemble's total (K x d_Z).
ExperimentConfig sweep_arm(const ExperimentConfig& base, SweepAxis axis, double value, std::uint64_t seed,
                           bool baseline);

/// One AdaGNN arm and one baseline arm per (value, seed), sharing every data
/// seed. Writes each arm under out/<axis>=<value>/seed=<s>/ plus sweep.csv
/// and sweep_summary.csv.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<double>& values,
                                const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out);

}  // namespace adagnn::cli
