#include "adagnn/eval/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace adagnn::eval {

namespace {

void check_lengths(std::size_t scores, std::size_t labels, const char* what) {
  if (scores != labels) {
    throw EvalError(std::string(what) + ": " + std::to_string(scores) + " scores but " + std::to_string(labels) +
                    " labels");
  }
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size(), "average_precision");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const int y = labels[order[rank]];
    if (y != 0 && y != 1) throw EvalError("average_precision: labels must be 0 or 1");
    if (y == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) throw EvalError("average_precision: no positive labels");
  return sum / static_cast<double>(hits);
}

double error_rate(std::span<const double> scores, std::span<const int> labels, double tau) {
  check_lengths(scores.size(), labels.size(), "error_rate");
  if (scores.empty()) throw EvalError("error_rate: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if ((scores[i] > tau) != (labels[i] == 1)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

std::vector<MarginRecord> margin_records(std::span<const double> scores, std::span<const int> labels, double tau) {
  check_lengths(scores.size(), labels.size(), "margin_records");
  if (!(tau > 0.0 && tau < 1.0)) throw EvalError("margin_records: tau must lie in (0,1)");
  std::vector<MarginRecord> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = {i, labels[i], scores[i], tau, margin(labels[i], scores[i], tau)};
  }
  return out;
}

std::vector<double> margin_distribution(std::span<const MarginRecord> records, std::span<const double> thetas) {
  if (thetas.empty()) throw EvalError("margin_distribution: empty theta grid");
  if (records.empty()) throw EvalError("margin_distribution: no records");
  std::vector<double> margins;
  margins.reserve(records.size());
  for (const auto& r : records) margins.push_back(r.margin);
  std::ranges::sort(margins);
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    const auto upto = std::ranges::upper_bound(margins, theta) - margins.begin();
    out.push_back(static_cast<double>(upto) / static_cast<double>(margins.size()));
  }
  return out;
}

std::vector<double> margin_grid(std::size_t points) {
  if (points < 2) throw EvalError("margin_grid: need at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = -0.25 + 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<ErrorCurveRow> error_curves(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw EvalError("error_curves: no reports");
  std::map<std::size_t, ErrorCurveRow> rows;
  for (const auto& report : reports) {
    if (report.split_signature != reports.front().split_signature) {
      throw EvalError("error_curves: reports come from different data splits ('" + reports.front().split_signature +
                      "' vs '" + report.split_signature + "')");
    }
    for (const auto& r : report.rounds) {
      rows[r.round] = {r.round, r.train_error, r.test_error, r.gap()};
    }
  }
  std::vector<ErrorCurveRow> out;
  std::size_t expect = 1;
  for (const auto& [k, row] : rows) {
    if (k != expect) throw EvalError("error_curves: rounds are not dense, missing K=" + std::to_string(expect));
    out.push_back(row);
    ++expect;
  }
  return out;
}

}  // namespace adagnn::eval
