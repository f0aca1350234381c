#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adagnn/boosting/adagnn.hpp"
#include "adagnn/graphdata/split.hpp"
#include "adagnn/graphdata/synthetic.hpp"
#include "json.hpp"

namespace adagnn::cli {

/// Bad command line or config contents; the tool exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  /// Generator parameters; the generator seed follows the run seed unless
  /// set explicitly.
  std::optional<graphdata::SyntheticParams> synthetic;
  bool synthetic_seed_set = false;
  /// File-backed dataset (used when no synthetic block is given).
  std::filesystem::path edges, features, labels;
  bool timestamps = false;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  graphdata::SplitSpec split;
  bool split_seed_set = false;
  std::optional<std::uint64_t> eval_negative_seed;
  gnn::EncoderConfig encoder;
  boosting::BoostConfig boosting;
  /// algorithm "none": one plain learner, reported as the baseline.
  bool baseline = false;
  gnn::TrainHyper training;
  gnn::Task task = gnn::Task::link_prediction;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  /// Lifts the hyper-parameter grid restrictions.
  bool allow_off_grid = false;

  /// Seeds of the generator, split and evaluation negatives: explicit values
  /// win, otherwise they are derived from `seed`.
  [[nodiscard]] std::uint64_t generator_seed() const;
  [[nodiscard]] std::uint64_t split_seed() const;
  [[nodiscard]] std::uint64_t negative_seed() const;
};

/// Parses a config document. Relative dataset paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Applies "dotted.key=value" to a config document. The value is read as
/// JSON when it parses, as a plain string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Fully resolved config including defaults and derived seeds.
nlohmann::json effective_config(const ExperimentConfig& config);

/// Structural and grid checks; throws UsageError.
void validate(const ExperimentConfig& config);

}  // namespace adagnn::cli
