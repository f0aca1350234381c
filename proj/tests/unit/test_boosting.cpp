#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "adagnn/boosting/adagnn.hpp"
#include "adagnn/boosting/checkpoint.hpp"
#include "adagnn/boosting/ensemble.hpp"
#include "adagnn/boosting/weights.hpp"
#include "adagnn/eval/embeddings.hpp"
#include "adagnn/eval/report_io.hpp"
#include "adagnn/graphdata/sampling.hpp"
#include "adagnn/graphdata/synthetic.hpp"
#include "doctest.h"

using namespace adagnn;
using namespace adagnn::boosting;

namespace {

using LD = long double;

// Direct evaluation of the two-class SAMME.R update in extended precision.
std::vector<LD> oracle_samme_r(const std::vector<double>& w, const std::vector<int>& y, const std::vector<double>& s,
                               double alpha) {
  std::vector<LD> out(w.size());
  LD total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const LD p = std::clamp<LD>(s[i], 1e-12L, 1.0L - 1e-12L);
    const LD coded = y[i] == 1 ? std::log(p) - std::log(1.0L - p) : std::log(1.0L - p) - std::log(p);
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

OracleR2 oracle_r2(const std::vector<double>& w, const std::vector<int>& y, const std::vector<double>& s) {
  std::vector<LD> loss(w.size());
  LD worst = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    loss[i] = std::fabs(static_cast<LD>(y[i]) - static_cast<LD>(s[i]));
    worst = std::max(worst, loss[i]);
  }
  if (worst > 0) {
    for (auto& l : loss) l /= worst;
  }
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

std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  renormalize(w);
  return w;
}

void check_simplex(std::span<const double> w) {
  double sum = 0.0;
  for (double x : w) {
    CHECK(x > 0.0);
    sum += x;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-9);
}

struct SmallProblem {
  graphdata::SyntheticGraph synth;
  TaskData data;
  gnn::GraphContext context;
  gnn::EncoderConfig encoder;
  gnn::TrainHyper hyper;
};

SmallProblem small_problem(gnn::Task task = gnn::Task::link_prediction) {
  graphdata::SyntheticParams p;
  p.num_nodes = 90;
  p.num_modes = 3;
  p.feature_dim_per_mode = 3;
  p.modes_per_node = 2;
  p.intra_mode_edge_prob = 0.12;
  p.noise_edge_prob = 0.05;
  p.seed = 4;
  SmallProblem s{graphdata::gen_synthetic_multimodal(p), {}, {}, {}, {}};
  graphdata::SplitSpec split;
  split.seed = 2;
  s.data = prepare_task_data(s.synth.graph, task, split, 31);
  s.context = gnn::GraphContext::build(s.synth.graph, s.data.message_edges);
  s.encoder.input_dim = s.synth.graph.feature_dim();
  s.encoder.embed_dim = 8;
  s.hyper.epochs = 3;
  s.hyper.patience = 2;
  s.hyper.batch_size = 64;
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("adagnn_test_boosting_" + name)).string();
}

}  // namespace

TEST_CASE("init_weights") {
  CHECK(init_weights(4) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(init_weights(1) == std::vector<double>{1.0});
  const auto w = init_weights(7);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(init_weights(0), BoostError);
}

TEST_CASE("samme_r_update hand examples") {
  const double s1 = 1.0 / (1.0 + std::exp(-1.0));
  const double sm1 = 1.0 / (1.0 + std::exp(1.0));
  // Multipliers e^-0.5 and e^0.5, renormalized: 1/(1+e) and e/(1+e).
  const auto w = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 1}, std::vector<double>{s1, sm1}, 1.0);
  CHECK(std::abs(w[0] - 0.2689414213699951) <= 1e-9);
  CHECK(std::abs(w[1] - 0.7310585786300049) <= 1e-9);

  // Next to an s = 0.5 example (multiplier 1), the ratio is the bare multiplier.
  const auto r = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}, std::vector<double>{s1, 0.5}, 1.0);
  CHECK(std::abs(r[0] / r[1] - 0.6065306597126334) <= 1e-12);

  const auto same = samme_r_update(std::vector<double>{0.2, 0.3, 0.5}, std::vector<int>{1, 0, 1},
                                   std::vector<double>{0.5, 0.5, 0.5}, 3.0);
  CHECK(same[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(same[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(same[2] == doctest::Approx(0.5).epsilon(1e-15));

  // Saturated scores are clamped, not infinite.
  const auto sat = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}, std::vector<double>{0.0, 0.0}, 1.0);
  check_simplex(sat);
  CHECK(std::isfinite(samme_r_coded_term(1, 1.0)));

  CHECK_THROWS_AS(samme_r_update(std::vector<double>{1.0}, std::vector<int>{1, 0}, std::vector<double>{0.5}, 1.0),
                  BoostError);
  CHECK_THROWS_AS(samme_r_update(std::vector<double>{1.0}, std::vector<int>{2}, std::vector<double>{0.5}, 1.0),
                  BoostError);
}

TEST_CASE("adaboost_r2 hand examples") {
  // beta = 0.2/0.8 = 0.25; multipliers 0.25 and 0.25^0.6.
  const R2Round r = adaboost_r2_update(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 0.4}, 1);
  CHECK(r.average_loss == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.beta == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.coefficient == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(std::abs(r.weights[0] - 0.36481689431254416) <= 1e-9);
  CHECK(std::abs(r.weights[1] - 0.6351831056874558) <= 1e-9);
  CHECK(r.bootstrap.size() == 2);

  const R2Round perfect = adaboost_r2_update(std::vector<double>{0.3, 0.7}, std::vector<double>{0.0, 0.0}, 1);
  CHECK(perfect.perfect);
  CHECK(perfect.beta == 0.0);
  CHECK(perfect.coefficient == kPerfectCoefficient);
  CHECK(std::abs(kPerfectCoefficient - std::log(1e12)) < 1e-12);
  CHECK(perfect.weights[1] == doctest::Approx(0.7).epsilon(1e-15));

  const R2Round equal = adaboost_r2_update(std::vector<double>{0.1, 0.6, 0.3}, std::vector<double>{0.3, 0.3, 0.3}, 1);
  CHECK(equal.weights[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(equal.weights[1] == doctest::Approx(0.6).epsilon(1e-14));

  CHECK_THROWS_AS(adaboost_r2_update(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}, 1),
                  WeakLearningViolation);
  try {
    (void)adaboost_r2_update(std::vector<double>{0.5, 0.5}, std::vector<double>{0.9, 0.3}, 1);
    FAIL("expected a weak learning violation");
  } catch (const WeakLearningViolation& e) {
    CHECK(e.average_loss == doctest::Approx(0.6));
  }
  CHECK_THROWS_AS(adaboost_r2_update(std::vector<double>{1.0}, std::vector<double>{1.5}, 1), BoostError);

  // Round form: losses |y - s| divided by their maximum.
  const auto losses = r2_linear_losses(std::vector<int>{1, 0, 1}, std::vector<double>{0.9, 0.2, 0.6});
  CHECK(losses[0] == doctest::Approx(0.25));
  CHECK(losses[1] == doctest::Approx(0.5));
  CHECK(losses[2] == 1.0);
}

TEST_CASE("weight updates agree with the extended precision oracle on 1000 random cases") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t samme_cases = 0, r2_cases = 0, r2_violations = 0;
  double worst_samme = 0.0, worst_r2 = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = size(rng);
    const auto w = random_simplex(n, rng);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.5;
      // Mostly good guesses with some outright mistakes.
      const double off = u(rng) < 0.8 ? 0.45 * u(rng) : u(rng);
      s[i] = y[i] == 1 ? 1.0 - off : off;
    }
    const double alpha = 1.0 + static_cast<double>(c % 3);

    const auto got = samme_r_update(w, y, s, alpha);
    const auto want = oracle_samme_r(w, y, s, alpha);
    for (std::size_t i = 0; i < n; ++i) {
      worst_samme = std::max(worst_samme, static_cast<double>(std::fabs(static_cast<LD>(got[i]) - want[i])));
    }
    ++samme_cases;

    const OracleR2 o = oracle_r2(w, y, s);
    if (o.violated) {
      CHECK_THROWS_AS(adaboost_r2_round(w, y, s, 5), WeakLearningViolation);
      ++r2_violations;
    } else {
      const R2Round r = adaboost_r2_round(w, y, s, 5);
      for (std::size_t i = 0; i < n; ++i) {
        worst_r2 = std::max(worst_r2, static_cast<double>(std::fabs(static_cast<LD>(r.weights[i]) - o.weights[i])));
      }
      worst_r2 = std::max(worst_r2, static_cast<double>(std::fabs(static_cast<LD>(r.coefficient) - o.coefficient)));
      ++r2_cases;
    }
  }
  CHECK(samme_cases == 1000);
  CHECK(r2_cases + r2_violations == 1000);
  CHECK(r2_cases > 500);
  CHECK(worst_samme <= 1e-9);
  CHECK(worst_r2 <= 1e-9);
}

TEST_CASE("samme_r_update properties") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 200; ++t) {
    const auto w = random_simplex(6, rng);
    std::vector<int> y{1, 1, 0, 0, 1, 0};
    std::vector<double> s(6);
    for (auto& x : s) x = u(rng);
    const auto out = samme_r_update(w, y, s, 2.0);
    check_simplex(out);
    // Scaling the prior weights changes nothing after renormalization.
    std::vector<double> scaled(w);
    for (auto& x : scaled) x *= 37.5;
    const auto out2 = samme_r_update(scaled, y, s, 2.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(out[i] - out2[i]) <= 1e-12);
  }
  // Equal priors, same label: the worse score gets the larger weight.
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    const auto pos = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 1}, std::vector<double>{a, b}, 1.0);
    CHECK((a < b) == (pos[0] > pos[1]));
    const auto neg = samme_r_update(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 0}, std::vector<double>{a, b}, 1.0);
    CHECK((a > b) == (neg[0] > neg[1]));
  }
}

TEST_CASE("node SAMME.R update reduces to the binary rule for two one-hot classes") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const auto w = random_simplex(5, rng);
  std::vector<int> y{1, 0, 1, 1, 0};
  std::vector<double> s(5);
  std::vector<std::vector<double>> labels, preds;
  for (std::size_t i = 0; i < 5; ++i) {
    s[i] = u(rng);
    labels.push_back(y[i] == 1 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
    preds.push_back({1.0 - s[i], s[i]});
  }
  const auto a = samme_r_update(w, y, s, 2.0);
  const auto b = samme_r_node_update(w, labels, preds, 2.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("cap_weights") {
  std::vector<double> w{0.8, 0.1, 0.1};
  cap_weights(w, 0.5);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.25).epsilon(1e-15));

  // Redistribution can push another entry over the cap.
  std::vector<double> v{0.6, 0.35, 0.03, 0.02};
  cap_weights(v, 0.4);
  CHECK(v[0] == 0.4);
  CHECK(v[1] == 0.4);
  check_simplex(v);
  CHECK(v[2] / v[3] == doctest::Approx(1.5).epsilon(1e-12));

  std::vector<double> impossible{0.5, 0.5};
  CHECK_THROWS_AS(cap_weights(impossible, 0.4), BoostError);
}

TEST_CASE("convex combination of learners") {
  const std::vector<std::vector<double>> per{{0.6}, {0.8}};
  CHECK(combine_scores(per, std::vector<double>{0.5, 0.5})[0] == doctest::Approx(0.7).epsilon(1e-15));
  const std::vector<std::vector<double>> one{{0.3, 0.9}};
  CHECK(combine_scores(one, std::vector<double>{1.0}) == std::vector<double>{0.3, 0.9});
  CHECK_THROWS_AS(combine_scores(std::vector<std::vector<double>>{}, std::vector<double>{}), BoostError);
  CHECK_THROWS_AS(combine_scores(per, std::vector<double>{0.5, 0.6}), BoostError);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 1 + t % 6;
    std::vector<std::vector<double>> s(k, std::vector<double>(4));
    for (auto& row : s)
      for (auto& x : row) x = u(rng);
    const auto a = random_simplex(k, rng);
    const auto c = combine_scores(s, a);
    for (std::size_t i = 0; i < 4; ++i) {
      double lo = 1.0, hi = 0.0;
      for (const auto& row : s) {
        lo = std::min(lo, row[i]);
        hi = std::max(hi, row[i]);
      }
      CHECK(c[i] >= lo);
      CHECK(c[i] <= hi);
    }
  }

  const Tensor d1({2, 3}, {0.2, 0.3, 0.5, 0.1, 0.1, 0.8});
  const Tensor d2({2, 3}, {0.6, 0.2, 0.2, 0.3, 0.3, 0.4});
  const std::vector<Tensor> ds{d1, d2};
  const Tensor first = combine_distributions(ds, std::vector<double>{1.0, 0.0});
  CHECK(std::ranges::equal(first.values(), d1.values()));
  const Tensor mix = combine_distributions(ds, std::vector<double>{0.25, 0.75});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(mix.at(r, 0) + mix.at(r, 1) + mix.at(r, 2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stopping rules") {
  const std::vector<bool> none_wrong{false, false, false};
  const std::vector<bool> some_wrong{true, false, true};
  const std::vector<bool> fixed_one{false, false, true};
  const std::vector<bool> first{};

  auto d = should_stop(1, 5, first, none_wrong);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::perfect_fit);
  CHECK(to_string(d.reason) == "perfect fit");

  d = should_stop(2, 5, some_wrong, fixed_one);
  CHECK_FALSE(d.stop);

  d = should_stop(2, 5, some_wrong, some_wrong);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::no_correction);
  CHECK(d.drop_last);
  CHECK_FALSE(should_stop(2, 5, some_wrong, some_wrong, false).stop);

  d = should_stop(5, 5, some_wrong, fixed_one);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::budget);
  CHECK_FALSE(d.drop_last);
  CHECK(parse_stop_reason("weak learning violated") == StopReason::weak_learning);
}

TEST_CASE("boost config validation") {
  BoostConfig c;
  CHECK_NOTHROW(c.validate());
  c.boost_learning_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), BoostError);
  CHECK_NOTHROW(c.validate(true));
  c.tau = 1.0;
  CHECK_THROWS_AS(c.validate(true), BoostError);
  c = {};
  c.max_learners = 0;
  CHECK_THROWS_AS(c.validate(true), BoostError);
  CHECK(c.uses_combined_source(gnn::Task::multitask));
  CHECK_FALSE(c.uses_combined_source(gnn::Task::link_prediction));
  c.weight_source = WeightSource::per_learner;
  CHECK_FALSE(c.uses_combined_source(gnn::Task::multitask));
}

TEST_CASE("base64 float blobs round trip bit for bit") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  for (std::size_t n = 0; n < 10; ++n) {
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    if (n == 3) v[1] = -0.0;
    const auto back = decode_doubles(encode_doubles(v));
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::bit_cast<std::uint64_t>(back[i]) == std::bit_cast<std::uint64_t>(v[i]));
  }
  CHECK(encode_doubles(std::vector<double>{1.0}) == "AAAAAAAA8D8=");
  CHECK_THROWS_AS(decode_doubles("abc"), CheckpointError);
}

TEST_CASE("train_adagnn link prediction contracts") {
  SmallProblem p = small_problem();
  BoostConfig b;
  b.max_learners = 3;
  std::vector<std::vector<double>> weights_per_round;
  const auto record = [&](const BoostState& s, const RoundRecord&, const eval::RoundMetrics&) {
    weights_per_round.push_back(s.edge_weights);
  };
  const BoostResult r = train_adagnn(p.context, p.data, p.encoder, b, p.hyper, 7, record);
  const auto& s = r.state;
  REQUIRE(!s.learners.empty());
  CHECK(s.stopped);
  CHECK(s.round_errors.size() == s.learners.size());
  CHECK(r.report.rounds.size() == s.learners.size());
  CHECK(weights_per_round.size() == s.learners.size());
  for (const auto& w : weights_per_round) {
    CHECK(w.size() == 2 * p.data.train_positives.size());
    check_simplex(w);
    CHECK(*std::ranges::max_element(w) <= b.weight_cap);
  }
  for (std::size_t k = 1; k < s.rounds.size(); ++k) CHECK(s.rounds[k].corrected >= 1);
  for (std::size_t k = 0; k < r.report.rounds.size(); ++k) CHECK(r.report.rounds[k].round == k + 1);

  SUBCASE("identical seeds give identical bytes") {
    const BoostResult again = train_adagnn(p.context, p.data, p.encoder, b, p.hyper, 7);
    CHECK(eval::to_json(again.report).dump() == eval::to_json(r.report).dump());
    CHECK(to_json(again.state).dump() == to_json(s).dump());
  }

  SUBCASE("checkpoint round trip") {
    const auto path = temp_path("ckpt.json");
    save_checkpoint(s, path);
    const BoostState loaded = load_checkpoint(path);
    CHECK(to_json(loaded).dump() == to_json(s).dump());
    std::vector<graphdata::NodeId> nodes(p.synth.graph.num_nodes());
    std::iota(nodes.begin(), nodes.end(), graphdata::NodeId{0});
    const auto a = eval::export_embeddings(s, p.context, nodes);
    const auto c = eval::export_embeddings(loaded, p.context, nodes);
    REQUIRE(a.size() == s.learners.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].values == c[k].values);
      CHECK(a[k].nodes.size() == nodes.size());
      CHECK(a[k].dim == p.encoder.embed_dim);
    }
    const auto scores = gnn::score_pairs(loaded.learners[0], p.context, p.data.test.edges, loaded.eval_seed);
    CHECK(scores == r.cache.test[0]);

    {
      std::ofstream os(path);
      os << "{\"format\": \"adagnn-checkpoint\", \"version\": 1, \"task\": ";
    }
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
    {
      auto j = to_json(s);
      j["learners"][0]["tensors"]["encoder.combine_bias"]["data"] = "AAAA";
      std::ofstream os(path);
      os << j.dump();
    }
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
    std::remove(path.c_str());
  }
}

TEST_CASE("one-learner boosting equals a single weak learner") {
  SmallProblem p = small_problem();
  BoostConfig b;
  b.max_learners = 1;
  const std::uint64_t seed = 21;
  const BoostResult r = train_adagnn(p.context, p.data, p.encoder, b, p.hyper, seed);
  REQUIRE(r.state.learners.size() == 1);
  CHECK(r.state.stop_reason == StopReason::budget);

  gnn::ExampleSet train;
  train.edges = p.data.train_positives;
  const auto neg = graphdata::sample_negatives(p.synth.graph, p.data.train_positives,
                                               derive_seed(seed, SeedStream::negatives, 1));
  train.edges.insert(train.edges.end(), neg.begin(), neg.end());
  for (auto& e : train.edges) e.weight = 1.0 / static_cast<double>(train.edges.size());
  const auto fit = gnn::fit_weak_learner(p.context, gnn::Task::link_prediction, train, p.data.validation, p.encoder,
                                         p.hyper, derive_seed(seed, SeedStream::fit, 1));
  const auto eval_seed = derive_seed(seed, SeedStream::eval, 0);
  const auto s = gnn::score_pairs(fit.params, p.context, p.data.test.edges, eval_seed);
  CHECK(s == r.cache.test[0]);
  CHECK(r.report.rounds[0].test_ap == eval::average_precision(s, r.cache.test_labels));
  CHECK(r.report.rounds[0].test_error == eval::error_rate(s, r.cache.test_labels));
}

TEST_CASE("AdaBoost.R2 and concat variants keep their invariants") {
  SmallProblem p = small_problem();
  BoostConfig b;
  b.max_learners = 3;
  b.require_correction = false;
  for (Algorithm alg : {Algorithm::adaboost_r2, Algorithm::concat_nn}) {
    CAPTURE(to_string(alg));
    b.algorithm = alg;
    b.concat.epochs = 3;
    std::size_t rounds = 0;
    const BoostResult r = train_adagnn(p.context, p.data, p.encoder, b, p.hyper, 3,
                                       [&](const BoostState& s, const RoundRecord&, const eval::RoundMetrics& m) {
                                         check_simplex(s.edge_weights);
                                         CHECK(m.test_ap >= 0.0);
                                         CHECK(m.test_ap <= 1.0);
                                         ++rounds;
                                       });
    CHECK(rounds == r.state.learners.size());
    const auto a = prefix_alphas(r.state, r.state.learners.size());
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    if (alg == Algorithm::concat_nn) {
      REQUIRE(r.state.concat.has_value());
      CHECK(r.state.concat->num_learners == r.state.learners.size());
      CHECK(r.state.concat->pair->input_dim() == r.state.learners.size() * p.encoder.embed_dim);
      const auto path = temp_path("concat.json");
      save_checkpoint(r.state, path);
      CHECK(to_json(load_checkpoint(path)).dump() == to_json(r.state).dump());
      std::remove(path.c_str());
    }
  }
}

TEST_CASE("multitask boosting updates node weights from the combined prediction") {
  SmallProblem p = small_problem(gnn::Task::multitask);
  BoostConfig b;
  b.max_learners = 2;
  b.require_correction = false;
  const BoostResult r = train_adagnn(p.context, p.data, p.encoder, b, p.hyper, 9,
                                     [&](const BoostState& s, const RoundRecord&, const eval::RoundMetrics& m) {
                                       check_simplex(s.edge_weights);
                                       check_simplex(s.node_weights);
                                       CHECK(m.node_test_ap > 0.0);
                                       CHECK(m.test_ap > 0.0);
                                     });
  CHECK(r.state.learners.size() == 2);
  CHECK(r.state.learners[0].node_decoder.has_value());
}
