#include "adagnn/eval/report_io.hpp"

#include <charconv>
#include <fstream>

namespace adagnn::eval {

using nlohmann::json;

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json to_json(const MetricsReport& report) {
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    rounds.push_back({{"round", r.round},
                      {"train_ap", r.train_ap},
                      {"validation_ap", r.validation_ap},
                      {"test_ap", r.test_ap},
                      {"weighted_train_error", r.weighted_train_error},
                      {"train_error", r.train_error},
                      {"test_error", r.test_error},
                      {"gap", r.gap()},
                      {"node_train_ap", r.node_train_ap},
                      {"node_validation_ap", r.node_validation_ap},
                      {"node_test_ap", r.node_test_ap},
                      {"node_train_error", r.node_train_error},
                      {"node_test_error", r.node_test_error}});
  }
  json margins = json::array();
  for (const auto& m : report.final_margins) {
    margins.push_back({{"id", m.example_id}, {"label", m.label}, {"score", m.score}, {"margin", m.margin}});
  }
  return {{"split_signature", report.split_signature},
          {"eval_negative_seed", report.eval_negative_seed},
          {"tau", report.final_margins.empty() ? 0.5 : report.final_margins.front().tau},
          {"rounds", rounds},
          {"final_margins", margins}};
}

MetricsReport report_from_json(const json& j) {
  try {
    MetricsReport r;
    r.split_signature = j.at("split_signature").get<std::string>();
    r.eval_negative_seed = j.at("eval_negative_seed").get<std::uint64_t>();
    const double tau = j.value("tau", 0.5);
    for (const auto& x : j.at("rounds")) {
      RoundMetrics m;
      m.round = x.at("round").get<std::size_t>();
      m.train_ap = x.at("train_ap").get<double>();
      m.validation_ap = x.at("validation_ap").get<double>();
      m.test_ap = x.at("test_ap").get<double>();
      m.weighted_train_error = x.at("weighted_train_error").get<double>();
      m.train_error = x.at("train_error").get<double>();
      m.test_error = x.at("test_error").get<double>();
      m.node_train_ap = x.value("node_train_ap", 0.0);
      m.node_validation_ap = x.value("node_validation_ap", 0.0);
      m.node_test_ap = x.value("node_test_ap", 0.0);
      m.node_train_error = x.value("node_train_error", 0.0);
      m.node_test_error = x.value("node_test_error", 0.0);
      r.rounds.push_back(m);
    }
    for (const auto& x : j.value("final_margins", json::array())) {
      r.final_margins.push_back({x.at("id").get<std::size_t>(), x.at("label").get<int>(), x.at("score").get<double>(),
                                 tau, x.at("margin").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw EvalError(std::string("malformed metrics report: ") + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw EvalError("cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) throw EvalError("failed writing " + path);
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw EvalError("cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw EvalError(path + ": " + e.what());
  }
}

std::vector<std::vector<double>> margin_curves(std::span<const std::vector<double>> ensemble_scores,
                                               std::span<const int> labels, std::span<const double> thetas,
                                               double tau) {
  std::vector<std::vector<double>> out;
  for (const auto& scores : ensemble_scores) {
    const auto records = margin_records(scores, labels, tau);
    out.push_back(margin_distribution(records, thetas));
  }
  return out;
}

void write_margins_csv(std::span<const double> thetas, std::span<const std::vector<double>> curves,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw EvalError("cannot write " + path);
  os << "theta";
  for (std::size_t k = 0; k < curves.size(); ++k) os << ",K" << k + 1;
  os << '\n';
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    os << shortest(thetas[t]);
    for (const auto& c : curves) os << ',' << shortest(c.at(t));
    os << '\n';
  }
  if (!os) throw EvalError("failed writing " + path);
}

void write_error_curves_csv(std::span<const ErrorCurveRow> rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw EvalError("cannot write " + path);
  os << "K,train_error,test_error,gap\n";
  for (const auto& r : rows) os << r.k << ',' << shortest(r.train_error) << ',' << shortest(r.test_error) << ',' << shortest(r.gap) << '\n';
  if (!os) throw EvalError("failed writing " + path);
}

}  // namespace adagnn::eval
