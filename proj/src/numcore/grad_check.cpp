#include "adagnn/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "adagnn/numcore/tape.hpp"

namespace adagnn::numcore {

bool GradCheckReport::passed() const {
  return std::ranges::all_of(entries, [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_relative_error);
  return worst;
}

GradCheckReport grad_check(const std::function<Tensor()>& program, std::span<Tensor> params,
                           double tolerance, double step, double floor) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor out = program();
    backward(out, tape);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    if (p.has_grad()) {
      analytic.emplace_back(p.grad().begin(), p.grad().end());
    } else {
      analytic.emplace_back(p.size(), 0.0);
    }
  }

  GradCheckReport report;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_values();
    GradCheckEntry entry;
    entry.param_index = i;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + step;
      const double up = program().item();
      values[j] = saved - step;
      const double down = program().item();
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      entry.max_relative_error = std::max(entry.max_relative_error, std::abs(a - numeric) / denom);
    }
    entry.passed = entry.max_relative_error < tolerance;
    report.entries.push_back(entry);
  }
  for (auto& p : params) p.zero_grad();
  return report;
}

}  // namespace adagnn::numcore
