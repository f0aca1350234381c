#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "adagnn/eval/metrics.hpp"

namespace adagnn::eval {

/// Shortest decimal text that reads back to the same double.
std::string shortest(double x);

/// Report as JSON. The runtime is left out so that equal runs produce equal
/// bytes; callers keep it elsewhere (the run manifest).
nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

/// Cumulative margin fractions for each ensemble size: curves[k][t] is the
/// fraction of examples whose margin under the (k+1)-learner ensemble is <= thetas[t].
std::vector<std::vector<double>> margin_curves(std::span<const std::vector<double>> ensemble_scores,
                                               std::span<const int> labels, std::span<const double> thetas,
                                               double tau = 0.5);

/// "theta,K1,...,Kn", one row per theta.
void write_margins_csv(std::span<const double> thetas, std::span<const std::vector<double>> curves,
                       const std::string& path);

/// "K,train_error,test_error,gap", one row per K.
void write_error_curves_csv(std::span<const ErrorCurveRow> rows, const std::string& path);

}  // namespace adagnn::eval
