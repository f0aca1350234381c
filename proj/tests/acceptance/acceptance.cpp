// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail N]... [--only N]...
// Exit status is 0 when the set of failing criteria equals the expected set,
// so a recorded shortfall stays visible without hiding a new regression (or
// a surprise pass).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "adagnn/boosting/weights.hpp"
#include "adagnn/cli/commands.hpp"
#include "adagnn/eval/embeddings.hpp"
#include "adagnn/eval/metrics.hpp"
#include "adagnn/gnn/decoder.hpp"
#include "adagnn/gnn/encoder.hpp"
#include "adagnn/gnn/loss.hpp"
#include "adagnn/numcore/grad_check.hpp"
#include "adagnn/numcore/ops.hpp"

using namespace adagnn;
namespace fs = std::filesystem;
using numcore::Tensor;

namespace {

constexpr std::uint64_t kSeeds[] = {0, 1, 2, 3, 4};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("adagnn_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

cli::ExperimentConfig reference_config(std::size_t max_learners, std::uint64_t seed) {
  auto c = cli::load_config(fs::path(ADAGNN_SOURCE_DIR) / "configs" / "reference.json");
  c.boosting.max_learners = max_learners;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------
// Invariant bookkeeping shared by the experiment runs.

struct Violations {
  std::size_t checked = 0;
  std::vector<std::string> found;
  void check(bool ok, const std::string& what) {
    ++checked;
    if (!ok && found.size() < 20) found.push_back(what);
    if (!ok && found.size() >= 20) found.back() = "(more)";
  }
};

void check_simplex(Violations& v, std::span<const double> w, const std::string& where) {
  if (w.empty()) return;
  double sum = 0.0;
  bool positive = true;
  for (double x : w) {
    positive = positive && x > 0.0 && std::isfinite(x);
    sum += x;
  }
  v.check(positive && std::abs(sum - 1.0) <= 1e-9, where + " weights off the simplex (sum " + fmt(sum, 12) + ")");
}

boosting::ProgressFn simplex_probe(Violations& v, const std::string& label) {
  return [&v, label](const boosting::BoostState& s, const boosting::RoundRecord& r, const eval::RoundMetrics&) {
    const std::string where = label + " round " + std::to_string(r.round);
    check_simplex(v, s.edge_weights, where + " edge");
    check_simplex(v, s.node_weights, where + " node");
  };
}

// ---------------------------------------------------------------------------
// The reference experiment: per seed, a 15-learner AdaGNN run (its prefixes
// give K = 1, 5, 8, 10 and 15) and the single wide learner.

struct SeedRuns {
  std::uint64_t seed = 0;
  std::unique_ptr<cli::Run> adagnn;
  std::unique_ptr<cli::Run> baseline;
  double adagnn_seconds = 0.0;
  double baseline_seconds = 0.0;
};

struct Reference {
  std::vector<SeedRuns> seeds;
  Violations simplex;
};

// Metrics of the ensemble a budget of K learners produces. Once a stopping
// rule has fired, a larger budget adds nothing, so K past the retained count
// is the final ensemble.
const eval::RoundMetrics& at_budget(const cli::Run& run, std::size_t k) {
  const auto& rounds = run.result.report.rounds;
  return rounds.at(std::min(k, rounds.size()) - 1);
}

const std::vector<double>& train_scores_at_budget(const cli::Run& run, std::size_t k) {
  const auto& e = run.result.cache.ensemble_train_eval;
  return e.at(std::min(k, e.size()) - 1);
}

Reference run_reference() {
  Reference ref;
  for (std::uint64_t seed : kSeeds) {
    SeedRuns s;
    s.seed = seed;
    auto t = std::chrono::steady_clock::now();
    s.adagnn = cli::run_experiment(reference_config(15, seed), simplex_probe(ref.simplex, "seed " + std::to_string(seed)));
    s.adagnn_seconds = seconds_since(t);
    t = std::chrono::steady_clock::now();
    const auto base = cli::sweep_arm(reference_config(5, seed), cli::SweepAxis::num_learners, 5, seed, true);
    s.baseline = cli::run_experiment(base);
    s.baseline_seconds = seconds_since(t);
    std::cerr << "  reference seed " << seed << ": " << s.adagnn->result.state.learners.size() << " learners ("
              << boosting::to_string(s.adagnn->result.state.stop_reason) << "), " << fmt(s.adagnn_seconds, 1)
              << " s; baseline " << fmt(s.baseline_seconds, 1) << " s\n";
    ref.seeds.push_back(std::move(s));
  }
  return ref;
}

// ---------------------------------------------------------------------------

Outcome multi_space_advantage(const Reference& ref) {
  double a = 0.0, b = 0.0, seconds = 0.0;
  std::ostringstream per;
  for (const auto& s : ref.seeds) {
    const double ak = at_budget(*s.adagnn, 5).test_ap;
    const double bk = s.baseline->result.report.rounds.back().test_ap;
    a += ak;
    b += bk;
    seconds += s.adagnn_seconds + s.baseline_seconds;
    per << " " << fmt(ak - bk);
  }
  a /= std::size(kSeeds);
  b /= std::size(kSeeds);
  const bool fast = seconds < 600.0;
  std::ostringstream d;
  d << "mean test AP K=5 " << fmt(a) << " vs d=80 baseline " << fmt(b) << " (needs >= " << fmt(b + 0.01)
    << "); per-seed diff" << per.str() << "; runtime " << fmt(seconds, 1) << " s";
  return {a >= b + 0.01 && fast, d.str()};
}

Outcome margin_shift(const Reference& ref) {
  bool ok = true;
  std::ostringstream d;
  for (const auto& s : ref.seeds) {
    const auto& labels = s.adagnn->result.cache.train_labels;
    const double tau = s.adagnn->result.state.config.tau;
    auto share = [&](std::size_t k) {
      const auto records = eval::margin_records(train_scores_at_budget(*s.adagnn, k), labels, tau);
      const double zero = 0.0;
      return eval::margin_distribution(records, std::span(&zero, 1)).front();
    };
    const double f1 = share(1), f5 = share(5);
    ok = ok && f5 <= f1 + 0.01;
    d << "seed " << s.seed << ": " << fmt(f1) << " -> " << fmt(f5) << "; ";
  }
  return {ok, "fraction of training margins <= 0, K=1 -> K=5: " + d.str()};
}

Outcome stable_gap(const Reference& ref) {
  bool ok = true;
  std::ostringstream d;
  for (const auto& s : ref.seeds) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
      const double g = at_budget(*s.adagnn, k).gap();
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    ok = ok && hi - lo < 0.05;
    d << "seed " << s.seed << ": " << fmt(hi - lo) << "; ";
  }
  return {ok, "spread of |test - train error| over K=1..8: " + d.str()};
}

Outcome data_ratio_robustness() {
  const std::vector<double> ratios{0.1, 0.3, 0.5, 0.7, 0.9};
  const std::vector<std::uint64_t> seeds(std::begin(kSeeds), std::end(kSeeds));
  const fs::path out = scratch("sweep");
  const auto rows = cli::cmd_sweep(reference_config(5, 0), cli::SweepAxis::train_fraction, ratios, seeds, out);
  bool ok = true;
  std::ostringstream d;
  for (double r : ratios) {
    double a = 0.0, b = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row.value != r) continue;
      a += row.adagnn_test_ap;
      b += row.baseline_test_ap;
      ++n;
    }
    a /= static_cast<double>(n);
    b /= static_cast<double>(n);
    ok = ok && a >= b;
    d << r << ": " << fmt(a) << " vs " << fmt(b) << "; ";
  }
  fs::remove_all(out);
  return {ok, "mean test AP AdaGNN vs baseline per train_fraction: " + d.str()};
}

Outcome budget_sufficiency(const Reference& ref) {
  double gain = 0.0;
  std::ostringstream d;
  for (const auto& s : ref.seeds) {
    const double g = at_budget(*s.adagnn, 15).test_ap - at_budget(*s.adagnn, 10).test_ap;
    gain += g;
    d << " " << fmt(g);
  }
  gain /= std::size(kSeeds);
  return {gain < 0.005, "mean test AP gain K=10 -> K=15 " + fmt(gain) + " (per seed" + d.str() + ")"};
}

// ---------------------------------------------------------------------------
// Weight updates against hand derivations and an extended precision oracle.

using LD = long double;

std::vector<LD> oracle_samme_r(std::span<const double> w, std::span<const int> y, std::span<const double> s,
                               double alpha) {
  std::vector<LD> out(w.size());
  LD total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const LD p = std::clamp<LD>(s[i], 1e-12L, 1.0L - 1e-12L);
    const LD coded = y[i] == 1 ? std::log(p / (1.0L - p)) : std::log((1.0L - p) / p);
    out[i] = static_cast<LD>(w[i]) * std::exp(-0.5L * static_cast<LD>(alpha) * coded);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

struct OracleR2 {
  bool violated = false;
  std::vector<LD> weights;
  LD coefficient = 0;
};

OracleR2 oracle_r2_losses(std::span<const double> w, std::vector<LD> loss) {
  LD avg = 0;
  for (std::size_t i = 0; i < w.size(); ++i) avg += static_cast<LD>(w[i]) * loss[i];
  OracleR2 r;
  if (avg >= 0.5L) {
    r.violated = true;
    return r;
  }
  const LD beta = avg / (1.0L - avg);
  r.coefficient = std::log(1.0L / beta);
  LD total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    r.weights.push_back(static_cast<LD>(w[i]) * std::pow(beta, 1.0L - loss[i]));
    total += r.weights.back();
  }
  for (auto& v : r.weights) v /= total;
  return r;
}

OracleR2 oracle_r2(std::span<const double> w, std::span<const int> y, std::span<const double> s) {
  std::vector<LD> loss(w.size());
  LD worst = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    loss[i] = std::fabs(static_cast<LD>(y[i]) - static_cast<LD>(s[i]));
    worst = std::max(worst, loss[i]);
  }
  if (worst > 0) {
    for (auto& l : loss) l /= worst;
  }
  return oracle_r2_losses(w, loss);
}

Outcome weight_updates() {
  using namespace boosting;
  double worst_hand = 0.0;
  auto hand = [&](double got, LD want) {
    worst_hand = std::max(worst_hand, static_cast<double>(std::fabs(static_cast<LD>(got) - want)));
  };
  const LD e = std::exp(1.0L);
  const double s1 = 1.0 / (1.0 + std::exp(-1.0)), sm1 = 1.0 / (1.0 + std::exp(1.0));

  // s = 0.5 leaves a weight unchanged.
  const auto same = samme_r_update(std::vector<double>{0.2, 0.3, 0.5}, std::vector<int>{1, 0, 1},
                                   std::vector<double>{0.5, 0.5, 0.5}, 1.0);
  hand(same[0], 0.2L);
  hand(same[1], 0.3L);
  hand(same[2], 0.5L);
  // Positive at sigma(1), alpha 1: multiplier e^-0.5 next to a neutral example.
  const auto single = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0},
                                     std::vector<double>{s1, 0.5}, 1.0);
  hand(single[0] / single[1], std::exp(-0.5L));
  // Two positives at sigma(1), sigma(-1): weights 1/(1+e), e/(1+e).
  const auto pair = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 1},
                                   std::vector<double>{s1, sm1}, 1.0);
  hand(pair[0], 1.0L / (1.0L + e));
  hand(pair[1], e / (1.0L + e));

  // R2 boundaries and the two-example recurrence on losses (0, 0.4).
  const R2Round perfect = adaboost_r2_update(std::vector<double>{0.3, 0.7}, std::vector<double>{0.0, 0.0}, 1);
  bool r2_flags = perfect.perfect && perfect.beta == 0.0;
  const R2Round equal = adaboost_r2_update(std::vector<double>{0.1, 0.6, 0.3}, std::vector<double>{0.3, 0.3, 0.3}, 1);
  hand(equal.weights[0], 0.1L);
  hand(equal.weights[1], 0.6L);
  hand(equal.weights[2], 0.3L);
  const R2Round two = adaboost_r2_update(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 0.4}, 1);
  const LD m2 = std::pow(0.25L, 0.6L);
  hand(two.average_loss, 0.2L);
  hand(two.beta, 0.25L);
  hand(two.weights[0], 0.25L / (0.25L + m2));
  hand(two.weights[1], m2 / (0.25L + m2));
  // Through the round form: scores whose max-normalized linear losses are (0, 0.4).
  const R2Round round = adaboost_r2_round(std::vector<double>{0.5, 0.5, 0.0}, std::vector<int>{1, 0, 1},
                                          std::vector<double>{1.0, 0.4, 0.0}, 1);
  hand(round.weights[0], 0.25L / (0.25L + m2));
  hand(round.weights[1], m2 / (0.25L + m2));
  bool violation_rejected = false;
  try {
    (void)adaboost_r2_update(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}, 1);
  } catch (const WeakLearningViolation&) {
    violation_rejected = true;
  }

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0), pos(0.05, 1.0);
  double worst_samme = 0.0, worst_r2 = 0.0;
  std::size_t r2_agree = 0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = size(rng);
    std::vector<double> w(n);
    for (auto& x : w) x = pos(rng);
    renormalize(w);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.5;
      const double off = u(rng) < 0.8 ? 0.45 * u(rng) : u(rng);
      s[i] = y[i] == 1 ? 1.0 - off : off;
    }
    const double alpha = 1.0 + static_cast<double>(c % 3);
    const auto got = samme_r_update(w, y, s, alpha);
    const auto want = oracle_samme_r(w, y, s, alpha);
    for (std::size_t i = 0; i < n; ++i) {
      worst_samme = std::max(worst_samme, static_cast<double>(std::fabs(static_cast<LD>(got[i]) - want[i])));
    }
    const OracleR2 o = oracle_r2(w, y, s);
    try {
      const R2Round r = adaboost_r2_round(w, y, s, 5);
      if (o.violated) continue;
      for (std::size_t i = 0; i < n; ++i) {
        worst_r2 = std::max(worst_r2, static_cast<double>(std::fabs(static_cast<LD>(r.weights[i]) - o.weights[i])));
      }
      worst_r2 = std::max(worst_r2, static_cast<double>(std::fabs(static_cast<LD>(r.coefficient) - o.coefficient)));
      ++r2_agree;
    } catch (const WeakLearningViolation&) {
      if (o.violated) ++r2_agree;
    }
  }
  const bool ok = worst_hand <= 1e-9 && r2_flags && violation_rejected && worst_samme <= 1e-9 && worst_r2 <= 1e-9 &&
                  r2_agree == 1000;
  return {ok, "hand examples max error " + sci(worst_hand) + "; oracle over 1000 cases: SAMME.R " +
                  sci(worst_samme) + ", R2 " + sci(worst_r2) + " (" + std::to_string(r2_agree) +
                  "/1000 agree on accept or reject)"};
}

// ---------------------------------------------------------------------------
// Gradients.

Tensor random_tensor(numcore::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(shape.size());
  for (double& x : v) x = d(rng);
  return Tensor(shape, v, true);
}

graphdata::NeighborhoodSample hood(graphdata::NodeId center, std::vector<graphdata::NodeId> nbrs,
                                   bool include_self = true) {
  graphdata::NeighborhoodSample s;
  s.center = center;
  s.neighbor_ids = std::move(nbrs);
  s.include_self = include_self;
  s.isolated = s.neighbor_ids.empty();
  return s;
}

Outcome gradients() {
  using namespace numcore;
  std::size_t programs = 0, failures = 0;
  double worst = 0.0;
  std::string first_failure;
  auto check = [&](const std::string& name, std::function<Tensor()> program, std::vector<Tensor> params) {
    const auto report = grad_check(program, params, 1e-4);
    ++programs;
    worst = std::max(worst, report.max_relative_error());
    if (!report.passed()) {
      ++failures;
      if (first_failure.empty()) first_failure = name;
    }
  };
  auto contract = [](const Tensor& y, const Tensor& w) { return reduce_sum(mul(y, w)); };

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    const Shape s{dim(rng), dim(rng)};
    const Shape s2{s.cols, dim(rng)};
    Tensor x = random_tensor(s, rng), y = random_tensor(s, rng), z = random_tensor(s2, rng);
    Tensor row = random_tensor({1, s.cols}, rng), col = random_tensor({s.rows, 1}, rng);
    Tensor pos = random_tensor(s, rng, 0.2, 2.0);
    // leaky_relu inputs kept away from the kink.
    Tensor kinkless = random_tensor(s, rng, 1e-3, 1.5);
    {
      auto v = kinkless.mutable_values();
      std::bernoulli_distribution flip(0.5);
      for (double& q : v) q = flip(rng) ? -q : q;
    }
    const Tensor w = random_tensor(s, rng), w_mm = random_tensor({s.rows, s2.cols}, rng);
    const Tensor w_cat = random_tensor({s.rows, 2 * s.cols}, rng), w_row = random_tensor({1, s.cols}, rng);
    const std::string tag = " seed " + std::to_string(seed);

    check("matmul" + tag, [&] { return contract(matmul(x, z), w_mm); }, {x, z});
    check("add" + tag, [&] { return contract(add(x, y), w); }, {x, y});
    if (s.rows > 1) check("add_row_broadcast" + tag, [&] { return contract(add(x, row), w); }, {x, row});
    check("mul" + tag, [&] { return contract(mul(x, y), w); }, {x, y});
    if (s.cols > 1) check("mul_col_broadcast" + tag, [&] { return contract(mul(x, col), w); }, {x, col});
    check("concat_columns" + tag, [&] { return contract(concat_columns(x, y), w_cat); }, {x, y});
    check("row_mean" + tag, [&] { return contract(row_mean(x), w_row); }, {x});
    check("reduce_sum" + tag, [&] { return mul(reduce_sum(x), reduce_sum(x)); }, {x});
    check("sigmoid" + tag, [&] { return contract(sigmoid(x), w); }, {x});
    check("exp" + tag, [&] { return contract(exp(x), w); }, {x});
    check("log" + tag, [&] { return contract(log(pos), w); }, {pos});
    check("log_clamped" + tag, [&] { return contract(log_clamped(pos, 1e-12, 10.0), w); }, {pos});
    check("leaky_relu" + tag, [&] { return contract(leaky_relu(kinkless), w); }, {kinkless});
    check("softmax_rows" + tag, [&] { return contract(softmax_rows(x), w); }, {x});
    check("affine" + tag, [&] { return contract(affine(x, -1.7, 0.3), w); }, {x});
    std::vector<std::size_t> idx;
    std::uniform_int_distribution<std::size_t> pick(0, s.rows - 1);
    for (std::size_t i = 0; i < s.rows + 2; ++i) idx.push_back(pick(rng));
    const Tensor w_g = random_tensor({idx.size(), s.cols}, rng);
    check("gather_rows" + tag, [&] { return contract(gather_rows(x, idx), w_g); }, {x});
    const std::vector<std::size_t> offsets{0, s.rows / 2, s.rows / 2, s.rows};
    const Tensor w_seg = random_tensor({3, s.cols}, rng), w_col = random_tensor({s.rows, 1}, rng);
    check("segment_sum" + tag, [&] { return contract(segment_sum(x, offsets), w_seg); }, {x});
    check("segment_mean" + tag, [&] { return contract(segment_mean(x, offsets), w_seg); }, {x});
    check("segment_softmax" + tag, [&] { return contract(segment_softmax(col, offsets), w_col); }, {col});
  }

  // Encoder -> both decoders -> multitask loss on a 7-node graph.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed * 131 + 7);
    const Tensor features = random_tensor({7, 3}, rng);
    for (gnn::EncoderKind kind : {gnn::EncoderKind::mean_pool, gnn::EncoderKind::attention}) {
      gnn::EncoderConfig c;
      c.kind = kind;
      c.input_dim = 3;
      c.embed_dim = 4;
      c.num_heads = kind == gnn::EncoderKind::attention ? 2 : 1;
      gnn::WeakLearnerParams p;
      p.config = c;
      p.encoder = gnn::EncoderParams::init(c, rng);
      p.node_decoder = gnn::MlpDecoder::init(4, 3, 2, rng);
      std::vector<Tensor> params;
      for (auto& [name, t] : p.named()) {
        auto v = t.mutable_values();
        for (double& q : v) q += std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
        params.push_back(t);
      }
      gnn::BatchNeighborhoods pairs;
      pairs.add(hood(0, {2}));
      pairs.add(hood(3, {2, 4}));
      pairs.add(hood(1, {2}));
      pairs.add(hood(6, {}));
      gnn::BatchNeighborhoods nodes;
      nodes.include_self = false;
      nodes.add(hood(2, {0, 1, 3}, false));
      nodes.add(hood(5, {4}, false));
      const std::vector<int> y{1, 0};
      const std::vector<double> w{0.7, 1.3}, nw{1.0, 0.4};
      const std::vector<std::vector<double>> labels{{1.0, 0.0}, {0.5, 0.5}};
      const std::vector<std::size_t> first{0, 1}, second{2, 3};
      check("encoder/decoder/loss " + gnn::to_string(kind) + " seed " + std::to_string(seed),
            [&] {
              const Tensor zp = gnn::encode_batch(p.encoder, c, features, pairs);
              const Tensor s = gnn::decode_pairwise_batch(gather_rows(zp, first), gather_rows(zp, second));
              const Tensor zn = gnn::encode_batch(p.encoder, c, features, nodes);
              const Tensor r = gnn::decode_node_batch(*p.node_decoder, zn);
              return gnn::multitask_loss(gnn::link_loss(s, y, w), gnn::node_loss(r, labels, nw), 0.5);
            },
            params);
    }
  }
  std::string d = std::to_string(programs) + " programs, max relative error " + sci(worst);
  if (failures > 0) d += ", " + std::to_string(failures) + " failed (first: " + first_failure + ")";
  return {failures == 0, d};
}

// ---------------------------------------------------------------------------

double oracle_ap(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<std::size_t> ranks;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (y[p] != 1) continue;
    std::size_t rank = 1;
    for (std::size_t q = 0; q < s.size(); ++q) rank += s[q] > s[p] || (s[q] == s[p] && q < p);
    ranks.push_back(rank);
  }
  std::sort(ranks.begin(), ranks.end());
  double sum = 0.0;
  for (std::size_t h = 0; h < ranks.size(); ++h) sum += static_cast<double>(h + 1) / static_cast<double>(ranks[h]);
  return sum / static_cast<double>(ranks.size());
}

Outcome metric_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> cont(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);
  std::size_t instances = 0, mismatches = 0, expected = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    expected += 100 * ((std::size_t{1} << n) - 1);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = (mask >> i) & 1u;
      for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> s(n);
        for (double& v : s) v = rep % 4 == 3 ? coarse(rng) / 3.0 : cont(rng);
        ++instances;
        mismatches += eval::average_precision(s, y) != oracle_ap(s, y);
      }
    }
  }
  return {mismatches == 0 && instances == expected,
          std::to_string(instances) + " instances (every labeling with a positive), " + std::to_string(mismatches) +
              " mismatches"};
}

// ---------------------------------------------------------------------------

Outcome invariants(const Reference& ref) {
  Violations v = ref.simplex;

  // Node weights too: a multitask run.
  {
    auto c = cli::load_config(fs::path(ADAGNN_SOURCE_DIR) / "configs" / "multitask.json");
    (void)cli::run_experiment(c, simplex_probe(v, "multitask"));
  }

  // Attention rows, on random encoders and on the trained ones.
  std::mt19937_64 rng(404);
  auto attention_rows = [&](const gnn::EncoderParams& p, const gnn::EncoderConfig& c, const Tensor& features,
                            const std::string& label) {
    gnn::BatchNeighborhoods batch;
    std::uniform_int_distribution<std::size_t> deg(0, 12), node(0, features.shape().rows - 1);
    for (std::size_t b = 0; b < 16; ++b) {
      std::vector<graphdata::NodeId> nbrs(deg(rng));
      for (auto& q : nbrs) q = node(rng);
      batch.add(hood(node(rng), nbrs));
    }
    gnn::AttentionTrace trace;
    (void)gnn::encode_batch(p, c, features, batch, &trace);
    for (const auto& w : trace.weights) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch.offsets[b] == batch.offsets[b + 1]) continue;
        double sum = 0.0;
        for (std::size_t i = batch.offsets[b]; i < batch.offsets[b + 1]; ++i) sum += w.at(i, 0);
        v.check(std::abs(sum - 1.0) <= 1e-12, label + " attention row sums to " + fmt(sum, 15));
      }
    }
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gnn::EncoderConfig c;
    c.input_dim = 5;
    c.embed_dim = 8;
    c.num_heads = 1 + seed % 2;
    const auto p = gnn::EncoderParams::init(c, rng);
    attention_rows(p, c, random_tensor({30, 5}, rng, -2.0, 2.0), "random encoder " + std::to_string(seed));
  }
  const auto& trained = ref.seeds.front().adagnn;
  for (const auto& l : trained->result.state.learners) {
    attention_rows(l.encoder, l.config, trained->context.features, "trained learner");
  }

  // Permutation invariance of encode.
  for (const auto& l : trained->result.state.learners) {
    const Tensor& f = trained->context.features;
    std::uniform_int_distribution<std::size_t> node(0, f.shape().rows - 1), deg(1, 12);
    for (int t = 0; t < 50; ++t) {
      std::vector<graphdata::NodeId> nbrs(deg(rng));
      for (auto& q : nbrs) q = node(rng);
      const auto center = node(rng);
      gnn::BatchNeighborhoods a, b;
      a.add(hood(center, nbrs));
      std::shuffle(nbrs.begin(), nbrs.end(), rng);
      b.add(hood(center, nbrs));
      const Tensor za = gnn::encode_batch(l.encoder, l.config, f, a);
      const Tensor zb = gnn::encode_batch(l.encoder, l.config, f, b);
      double worst = 0.0;
      for (std::size_t i = 0; i < za.size(); ++i) {
        worst = std::max(worst, std::abs(za.values()[i] - zb.values()[i]) / std::max(1.0, std::abs(za.values()[i])));
      }
      v.check(worst <= 1e-12, "encode changed by " + fmt(worst, 15) + " under a neighbor permutation");
    }
  }

  // Pairwise decoder symmetry on trained embeddings.
  {
    std::vector<graphdata::NodeId> nodes(trained->dataset.graph->num_nodes());
    std::iota(nodes.begin(), nodes.end(), graphdata::NodeId{0});
    const auto tables = eval::export_embeddings(trained->result.state, trained->context, nodes);
    std::uniform_int_distribution<std::size_t> node(0, nodes.size() - 1);
    for (const auto& t : tables) {
      for (int q = 0; q < 200; ++q) {
        const auto a = node(rng), b = node(rng);
        v.check(gnn::decode_pairwise(t.row(a), t.row(b)) == gnn::decode_pairwise(t.row(b), t.row(a)),
                "decoder asymmetric");
      }
    }
  }

  // Determinism: the same seed twice gives byte-identical metrics JSON.
  {
    const auto c = reference_config(5, 0);
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    (void)cli::cmd_train(c, a);
    (void)cli::cmd_train(c, b);
    const std::string ma = slurp(a / "metrics.json"), mb = slurp(b / "metrics.json");
    v.check(!ma.empty() && ma == mb, "metrics.json differs between identical runs");
    fs::remove_all(a);
    fs::remove_all(b);
  }

  std::string d = std::to_string(v.checked) + " checks, " + std::to_string(v.found.size()) + " violations";
  if (!v.found.empty()) d += " (first: " + v.found.front() + ")";
  return {v.found.empty(), d};
}

// ---------------------------------------------------------------------------

Outcome space_differentiation(const Reference& ref) {
  bool ok = true;
  std::ostringstream d;
  for (const auto& s : ref.seeds) {
    const cli::Run& run = *s.adagnn;
    const auto& modes = run.dataset.node_modes;
    const graphdata::Adjacency adj = graphdata::Adjacency::from_graph(*run.dataset.graph);
    // Center: the best-connected node that carries two or more modes.
    std::optional<graphdata::NodeId> center;
    for (graphdata::NodeId n = 0; n < modes.size(); ++n) {
      if (modes[n].size() < 2) continue;
      if (!center || adj.degree(n) > adj.degree(*center)) center = n;
    }
    if (!center) {
      ok = false;
      d << "seed " << s.seed << ": no multi-mode node; ";
      continue;
    }
    std::vector<graphdata::NodeId> candidates;
    for (graphdata::NodeId n = 0; n < modes.size(); ++n) {
      if (n == *center) continue;
      const bool shared = std::ranges::any_of(modes[n], [&](std::size_t m) {
        return std::ranges::find(modes[*center], m) != modes[*center].end();
      });
      if (shared) candidates.push_back(n);
    }
    auto state = run.result.state;
    state.learners.resize(std::min<std::size_t>(5, state.learners.size()));
    std::vector<graphdata::NodeId> all(modes.size());
    std::iota(all.begin(), all.end(), graphdata::NodeId{0});
    const auto tables = eval::export_embeddings(state, run.context, all);
    if (tables.size() < 2) {
      ok = false;
      d << "seed " << s.seed << ": only one learner; ";
      continue;
    }
    double lowest = 1.0;
    for (const auto& c : eval::compare_spaces(tables, *center, candidates)) lowest = std::min(lowest, c.spearman);
    ok = ok && lowest < 0.9;
    d << "seed " << s.seed << ": min " << fmt(lowest) << " over " << candidates.size() << " candidates; ";
  }
  return {ok, "lowest Spearman between learners' neighbor rankings: " + d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--expect-fail" || a == "--only") && i + 1 < argc) {
      (a == "--only" ? only : expected_failures).insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--expect-fail N]... [--only N]...\n";
      return 2;
    }
  }
  auto wanted = [&](int n) { return only.empty() || only.contains(n); };

  const char* names[] = {"",
                         "multi-space advantage",
                         "margin shift",
                         "stable generalization gap",
                         "data-ratio robustness",
                         "learner-budget sufficiency",
                         "weight-update correctness",
                         "gradient correctness",
                         "metric oracle equivalence",
                         "invariant suite",
                         "multi-space differentiation"};
  std::set<int> failed;
  auto report = [&](int n, const std::function<Outcome()>& body) {
    if (!wanted(n)) return;
    const auto t = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) failed.insert(n);
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << names[n] << "): " << o.detail << " ["
              << fmt(seconds_since(t), 1) << " s]" << std::endl;
  };

  report(6, weight_updates);
  report(7, gradients);
  report(8, metric_oracle);

  const bool need_reference = wanted(1) || wanted(2) || wanted(3) || wanted(5) || wanted(9) || wanted(10);
  Reference ref;
  if (need_reference) {
    std::cerr << "running the reference experiment on " << std::size(kSeeds) << " seeds\n";
    ref = run_reference();
  }
  report(1, [&] { return multi_space_advantage(ref); });
  report(2, [&] { return margin_shift(ref); });
  report(3, [&] { return stable_gap(ref); });
  report(5, [&] { return budget_sufficiency(ref); });
  report(9, [&] { return invariants(ref); });
  report(10, [&] { return space_differentiation(ref); });
  report(4, data_ratio_robustness);

  std::cout << failed.size() << " of " << (only.empty() ? 10 : only.size()) << " criteria failed";
  for (int n : failed) std::cout << ' ' << n;
  std::cout << '\n';
  std::set<int> expected;
  for (int n : expected_failures) {
    if (wanted(n)) expected.insert(n);
  }
  if (failed != expected) {
    std::cout << "failures differ from the recorded expectation\n";
    return 1;
  }
  if (!expected.empty()) std::cout << "all failures match the recorded expectation\n";
  return 0;
}
