#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adagnn::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-interpolated average precision: the mean, over positives, of the
/// precision at each positive's rank. Items are ranked by descending score;
/// ties keep input order (the example id order).
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// Fraction of thresholded predictions (f > tau -> 1) that disagree with y.
double error_rate(std::span<const double> scores, std::span<const int> labels, double tau = 0.5);

inline double margin(int y, double f, double tau = 0.5) { return (static_cast<double>(y) - tau) * (f - tau); }

struct MarginRecord {
  std::size_t example_id = 0;
  int label = 0;
  double score = 0.0;
  double tau = 0.5;
  double margin = 0.0;
};

std::vector<MarginRecord> margin_records(std::span<const double> scores, std::span<const int> labels,
                                         double tau = 0.5);

/// For each theta, the fraction of records with margin <= theta.
std::vector<double> margin_distribution(std::span<const MarginRecord> records, std::span<const double> thetas);

/// Evenly spaced grid over [-0.25, 0.25] with `points` entries.
std::vector<double> margin_grid(std::size_t points = 101);

/// Metrics of the ensemble truncated to its first `round` learners.
struct RoundMetrics {
  std::size_t round = 0;
  double train_ap = 0.0;
  double validation_ap = 0.0;
  double test_ap = 0.0;
  double weighted_train_error = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
  /// Node-part metrics of multitask runs (zero otherwise).
  double node_train_ap = 0.0;
  double node_validation_ap = 0.0;
  double node_test_ap = 0.0;
  double node_train_error = 0.0;
  double node_test_error = 0.0;
  [[nodiscard]] double gap() const { return test_error > train_error ? test_error - train_error : train_error - test_error; }
};

struct MetricsReport {
  /// Identifies the data splits the rounds were measured on.
  std::string split_signature;
  std::uint64_t eval_negative_seed = 0;
  std::vector<RoundMetrics> rounds;
  std::vector<MarginRecord> final_margins;
  double runtime_seconds = 0.0;
};

struct ErrorCurveRow {
  std::size_t k = 0;
  double train_error = 0.0;
  double test_error = 0.0;
  double gap = 0.0;
};

/// One row per K = 1..K_max across the given reports. Rounds may be spread
/// over several reports, but every report must share one split signature and
/// the union of rounds must be dense from 1.
std::vector<ErrorCurveRow> error_curves(std::span<const MetricsReport> reports);

}  // namespace adagnn::eval
