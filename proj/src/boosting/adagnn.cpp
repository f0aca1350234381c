#include "adagnn/boosting/adagnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "adagnn/boosting/weights.hpp"
#include "adagnn/graphdata/sampling.hpp"
#include "adagnn/numcore/ops.hpp"

namespace adagnn::boosting {

namespace nc = numcore;
using graphdata::NodeId;

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::samme_r: return "samme_r";
    case Algorithm::adaboost_r2: return "adaboost_r2";
    case Algorithm::concat_nn: return "concat_nn";
  }
  return "samme_r";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "samme_r") return Algorithm::samme_r;
  if (text == "adaboost_r2") return Algorithm::adaboost_r2;
  if (text == "concat_nn") return Algorithm::concat_nn;
  throw BoostError("unknown boosting algorithm '" + text + "' (expected samme_r, adaboost_r2 or concat_nn)");
}

std::string to_string(WeightSource source) {
  switch (source) {
    case WeightSource::automatic: return "auto";
    case WeightSource::per_learner: return "per_learner";
    case WeightSource::combined: return "combined";
  }
  return "auto";
}

WeightSource parse_weight_source(const std::string& text) {
  if (text == "auto") return WeightSource::automatic;
  if (text == "per_learner") return WeightSource::per_learner;
  if (text == "combined") return WeightSource::combined;
  throw BoostError("unknown weight source '" + text + "' (expected auto, per_learner or combined)");
}

void BoostConfig::validate(bool allow_off_grid) const {
  if (max_learners < 1) throw BoostError("boost: max_learners must be >= 1");
  if (!(boost_learning_rate > 0.0)) throw BoostError("boost: learning rate must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw BoostError("boost: tau must lie in (0,1)");
  if (!(weight_cap > 0.0 && weight_cap <= 1.0)) throw BoostError("boost: weight_cap must lie in (0,1]");
  if (allow_off_grid) return;
  if (boost_learning_rate != 1.0 && boost_learning_rate != 2.0 && boost_learning_rate != 3.0) {
    throw BoostError("boost: learning rate must be one of {1, 2, 3}, got " + std::to_string(boost_learning_rate));
  }
}

bool BoostConfig::uses_combined_source(gnn::Task task) const {
  if (weight_source == WeightSource::automatic) return task == gnn::Task::multitask;
  return weight_source == WeightSource::combined;
}

std::vector<double> prefix_alphas(const BoostState& state, std::size_t k) {
  if (k == 0 || k > state.learners.size()) throw BoostError("prefix_alphas: prefix out of range");
  if (state.config.algorithm == Algorithm::adaboost_r2) {
    return normalized_alphas(std::span(state.learners).first(k));
  }
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::vector<bool> node_mistakes(const Tensor& predictions, std::span<const NodeExample> nodes) {
  if (predictions.rows() != nodes.size()) throw BoostError("node_mistakes: row count mismatch");
  std::vector<bool> out(nodes.size());
  const std::size_t c = predictions.cols();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = predictions.values().subspan(i * c, c);
    const auto best = static_cast<std::size_t>(std::ranges::max_element(row) - row.begin());
    out[i] = !(nodes[i].label.at(best) > 0.0);
  }
  return out;
}

double node_error(const Tensor& predictions, std::span<const NodeExample> nodes) {
  const auto wrong = node_mistakes(predictions, nodes);
  if (wrong.empty()) throw BoostError("node_error: no nodes");
  return static_cast<double>(std::ranges::count(wrong, true)) / static_cast<double>(wrong.size());
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t round) {
  return splitmix(splitmix(seed ^ splitmix(stream)) + round);
}

enum Stream : std::uint64_t { kEval = 1, kFit, kNegatives, kBootstrap, kConcat };

std::vector<int> labels_of(std::span<const EdgeExample> edges) {
  std::vector<int> y;
  y.reserve(edges.size());
  for (const auto& e : edges) y.push_back(e.label);
  return y;
}

std::vector<bool> link_mistakes(std::span<const double> scores, std::span<const int> labels, double tau) {
  std::vector<bool> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] > tau) != (labels[i] == 1);
  return out;
}

std::vector<std::vector<double>> node_rows(const Tensor& t) {
  std::vector<std::vector<double>> rows(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto r = t.values().subspan(i * t.cols(), t.cols());
    rows[i].assign(r.begin(), r.end());
  }
  return rows;
}

// Total-variation distance between prediction and label rows: the R2 loss of
// a node example, in [0,1].
std::vector<double> node_losses(const Tensor& predictions, std::span<const NodeExample> nodes) {
  std::vector<double> out(nodes.size());
  const std::size_t c = predictions.cols();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double tv = 0.0;
    for (std::size_t k = 0; k < c; ++k) tv += std::abs(predictions.at(i, k) - nodes[i].label[k]);
    out[i] = std::min(1.0, 0.5 * tv);
  }
  return out;
}

// Concatenated embeddings of each learner on one example set, kept so the
// concat decoder for every prefix can be trained without re-encoding.
struct EmbeddingParts {
  std::vector<Tensor> zi, zj, zn;

  void pop() {
    zi.pop_back();
    zj.pop_back();
    zn.pop_back();
  }
  void add(const ConcatInputs& in) {
    zi.push_back(in.zi);
    zj.push_back(in.zj);
    zn.push_back(in.zn);
  }
  [[nodiscard]] ConcatInputs prefix(std::size_t k, const ConcatInputs& labels_from) const {
    ConcatInputs out;
    out.labels = labels_from.labels;
    out.node_labels = labels_from.node_labels;
    if (!out.labels.empty()) {
      out.zi = nc::concat_columns(std::span(zi).first(k));
      out.zj = nc::concat_columns(std::span(zj).first(k));
    }
    if (!out.node_labels.empty()) out.zn = nc::concat_columns(std::span(zn).first(k));
    return out;
  }
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t round) {
  return derive(seed, static_cast<std::uint64_t>(stream), round);
}

BoostResult train_adagnn(const gnn::GraphContext& context, const TaskData& data, const gnn::EncoderConfig& encoder,
                         const BoostConfig& boost, const gnn::TrainHyper& hyper, std::uint64_t seed,
                         const ProgressFn& progress) {
  boost.validate(true);
  const auto started = std::chrono::steady_clock::now();
  const gnn::Task task = data.task;
  const bool link = gnn::has_link_part(task);
  const bool node = gnn::has_node_part(task);
  const bool r2 = boost.algorithm == Algorithm::adaboost_r2;
  const bool concat = boost.algorithm == Algorithm::concat_nn;
  const bool combined_source = boost.uses_combined_source(task);
  if (context.graph == nullptr) throw BoostError("train_adagnn: graph context not built");

  BoostResult result;
  BoostState& state = result.state;
  ScoreCache& cache = result.cache;
  eval::MetricsReport& report = result.report;
  state.task = task;
  state.config = boost;
  state.seed = seed;
  state.eval_seed = derive(seed, kEval, 0);
  report.split_signature = data.split_signature;
  report.eval_negative_seed = data.eval_negative_seed;

  const auto& positives = data.train_positives;
  const std::size_t n_pos = positives.size();
  if (link && n_pos == 0) throw BoostError("train_adagnn: no training edges");
  if (node && data.train_nodes.empty()) throw BoostError("train_adagnn: no training nodes");
  cache.train_labels = labels_of(data.train_eval.edges);
  cache.validation_labels = labels_of(data.validation.edges);
  cache.test_labels = labels_of(data.test.edges);
  std::vector<NodeId> train_ids, val_ids, test_ids;
  for (const auto& n : data.train_eval.nodes) train_ids.push_back(n.node);
  for (const auto& n : data.validation.nodes) val_ids.push_back(n.node);
  for (const auto& n : data.test.nodes) test_ids.push_back(n.node);

  auto draw_negatives = [&](std::size_t round) {
    return graphdata::sample_negatives(*context.graph, positives, derive(seed, kNegatives, round));
  };
  std::vector<EdgeExample> negatives;
  if (link) {
    negatives = draw_negatives(1);
    state.edge_weights = init_weights(2 * n_pos);
  }
  if (node) state.node_weights = init_weights(data.train_nodes.size());

  std::optional<std::vector<std::size_t>> edge_bootstrap, node_bootstrap;
  std::vector<bool> previous_wrong;
  EmbeddingParts train_parts, val_parts, test_parts;
  ConcatInputs train_labels_only, val_labels_only, test_labels_only;
  train_labels_only.labels = cache.train_labels;
  val_labels_only.labels = cache.validation_labels;
  test_labels_only.labels = cache.test_labels;
  for (const auto& n : data.train_eval.nodes) train_labels_only.node_labels.push_back(n.label);
  for (const auto& n : data.validation.nodes) val_labels_only.node_labels.push_back(n.label);
  for (const auto& n : data.test.nodes) test_labels_only.node_labels.push_back(n.label);

  for (std::size_t k = 1; k <= boost.max_learners; ++k) {
    // Current training set: persistent positives followed by this round's negatives.
    std::vector<EdgeExample> current;
    if (link) {
      current = positives;
      current.insert(current.end(), negatives.begin(), negatives.end());
    }
    const std::vector<int> current_labels = labels_of(current);

    gnn::ExampleSet train;
    if (r2) {
      if (link) {
        if (!edge_bootstrap) edge_bootstrap = weighted_bootstrap(state.edge_weights, current.size(), derive(seed, kBootstrap, k));
        for (auto i : *edge_bootstrap) {
          train.edges.push_back(current[i]);
          train.edges.back().weight = 1.0;
        }
      }
      if (node) {
        if (!node_bootstrap) {
          node_bootstrap = weighted_bootstrap(state.node_weights, data.train_nodes.size(), derive(seed, kBootstrap, 1000 + k));
        }
        for (auto i : *node_bootstrap) {
          train.nodes.push_back(data.train_nodes[i]);
          train.nodes.back().weight = 1.0;
        }
      }
    } else {
      train.edges = current;
      for (std::size_t i = 0; i < current.size(); ++i) train.edges[i].weight = state.edge_weights[i];
      if (node) {
        train.nodes = data.train_nodes;
        for (std::size_t i = 0; i < train.nodes.size(); ++i) train.nodes[i].weight = state.node_weights[i];
      }
    }

    gnn::FitResult fit = gnn::fit_weak_learner(context, task, train, data.validation, encoder, hyper,
                                               derive(seed, kFit, k));
    gnn::WeakLearnerParams learner = std::move(fit.params);

    // Per-learner predictions on the fixed sets.
    if (link) {
      cache.train_eval.push_back(gnn::score_pairs(learner, context, data.train_eval.edges, state.eval_seed));
      cache.validation.push_back(gnn::score_pairs(learner, context, data.validation.edges, state.eval_seed));
      cache.test.push_back(gnn::score_pairs(learner, context, data.test.edges, state.eval_seed));
    }
    if (node) {
      cache.node_train_eval.push_back(gnn::predict_nodes(learner, context, train_ids, state.eval_seed));
      cache.node_validation.push_back(gnn::predict_nodes(learner, context, val_ids, state.eval_seed));
      cache.node_test.push_back(gnn::predict_nodes(learner, context, test_ids, state.eval_seed));
    }
    auto rollback = [&] {
      if (link) {
        cache.train_eval.pop_back();
        cache.validation.pop_back();
        cache.test.pop_back();
      }
      if (node) {
        cache.node_train_eval.pop_back();
        cache.node_validation.pop_back();
        cache.node_test.pop_back();
      }
    };

    // This learner's scores on the current training set. Positives reuse the
    // fixed-set scores: train_eval starts with the same positives and the
    // inference neighborhoods are deterministic.
    std::vector<double> s_new;
    if (link) {
      s_new.assign(cache.train_eval.back().begin(), cache.train_eval.back().begin() + static_cast<std::ptrdiff_t>(n_pos));
      const auto s_neg = gnn::score_pairs(learner, context, negatives, state.eval_seed);
      s_new.insert(s_new.end(), s_neg.begin(), s_neg.end());
    }
    const Tensor r_new = node ? cache.node_train_eval.back() : Tensor();

    double weighted_error = 0.0;
    {
      double parts = 0.0;
      if (link) {
        const auto wrong = link_mistakes(s_new, current_labels, boost.tau);
        double e = 0.0;
        for (std::size_t i = 0; i < wrong.size(); ++i) e += wrong[i] ? state.edge_weights[i] : 0.0;
        weighted_error += e;
        parts += 1.0;
      }
      if (node) {
        const auto wrong = node_mistakes(r_new, data.train_nodes);
        double e = 0.0;
        for (std::size_t i = 0; i < wrong.size(); ++i) e += wrong[i] ? state.node_weights[i] : 0.0;
        weighted_error += e;
        parts += 1.0;
      }
      weighted_error /= parts;
    }

    // Weight update (not yet committed).
    std::vector<double> next_edge, next_node;
    std::optional<StopDecision> forced;
    double coefficient = 1.0;
    R2Round edge_round, node_round;
    if (r2) {
      try {
        std::vector<double> coefs;
        if (link) {
          edge_round = adaboost_r2_round(state.edge_weights, current_labels, s_new, derive(seed, kBootstrap, 2000 + k));
          next_edge = edge_round.weights;
          coefs.push_back(edge_round.coefficient);
        }
        if (node) {
          node_round = adaboost_r2_update(state.node_weights, node_losses(r_new, data.train_nodes),
                                          derive(seed, kBootstrap, 3000 + k));
          next_node = node_round.weights;
          coefs.push_back(node_round.coefficient);
        }
        coefficient = std::accumulate(coefs.begin(), coefs.end(), 0.0) / static_cast<double>(coefs.size());
        if ((!link || edge_round.perfect) && (!node || node_round.perfect)) {
          forced = StopDecision{true, StopReason::perfect_fit, false};
        }
      } catch (const WeakLearningViolation&) {
        // A first learner is kept even when weak, so there is always a model
        // (the same convention as common AdaBoost.R2 implementations).
        const bool first = k == 1;
        forced = StopDecision{true, StopReason::weak_learning, !first};
        if (first) {
          coefficient = 1.0;
          next_edge = state.edge_weights;
          next_node = state.node_weights;
        }
      }
    }
    learner.alpha = coefficient;
    state.learners.push_back(learner);

    // Prefix ensemble on the fixed sets.
    const std::vector<double> alphas = prefix_alphas(state, k);
    std::vector<double> ens_train, ens_val, ens_test;
    Tensor node_ens_train, node_ens_val, node_ens_test;
    if (concat) {
      const std::uint64_t es = state.eval_seed;
      const std::span<const gnn::WeakLearnerParams> only(&state.learners.back(), 1);
      train_parts.add(concat_inputs(only, context, data.train_eval, es));
      val_parts.add(concat_inputs(only, context, data.validation, es));
      test_parts.add(concat_inputs(only, context, data.test, es));
      const ConcatInputs tr = train_parts.prefix(k, train_labels_only);
      const ConcatInputs va = val_parts.prefix(k, val_labels_only);
      const ConcatInputs te = test_parts.prefix(k, test_labels_only);
      ConcatDecoder dec = fit_concat_decoder(k, tr, va, boost.concat, derive(seed, kConcat, k));
      if (link) {
        ens_train = concat_pair_scores(*dec.pair, tr.zi, tr.zj);
        ens_val = data.validation.edges.empty() ? std::vector<double>{} : concat_pair_scores(*dec.pair, va.zi, va.zj);
        ens_test = data.test.edges.empty() ? std::vector<double>{} : concat_pair_scores(*dec.pair, te.zi, te.zj);
      }
      if (node) {
        node_ens_train = concat_node_scores(*dec.node, tr.zn);
        if (!val_ids.empty()) node_ens_val = concat_node_scores(*dec.node, va.zn);
        if (!test_ids.empty()) node_ens_test = concat_node_scores(*dec.node, te.zn);
      }
      state.concat = std::move(dec);
    } else {
      if (link) {
        ens_train = combine_scores(std::span(cache.train_eval), alphas);
        ens_val = combine_scores(std::span(cache.validation), alphas);
        ens_test = combine_scores(std::span(cache.test), alphas);
      }
      if (node) {
        node_ens_train = combine_distributions(cache.node_train_eval, alphas);
        if (!val_ids.empty()) node_ens_val = combine_distributions(cache.node_validation, alphas);
        if (!test_ids.empty()) node_ens_test = combine_distributions(cache.node_test, alphas);
      }
    }

    // SAMME.R update, from this learner or from the ensemble on the current set.
    if (!r2) {
      if (link) {
        std::vector<double> source = s_new;
        if (combined_source) {
          std::vector<std::vector<double>> per(state.learners.size());
          for (std::size_t j = 0; j < state.learners.size(); ++j) {
            per[j].assign(cache.train_eval[j].begin(), cache.train_eval[j].begin() + static_cast<std::ptrdiff_t>(n_pos));
            const auto neg = j + 1 == state.learners.size()
                                 ? std::vector<double>(s_new.begin() + static_cast<std::ptrdiff_t>(n_pos), s_new.end())
                                 : gnn::score_pairs(state.learners[j], context, negatives, state.eval_seed);
            per[j].insert(per[j].end(), neg.begin(), neg.end());
          }
          source = combine_scores(per, alphas);
        }
        next_edge = samme_r_update(state.edge_weights, current_labels, source, boost.boost_learning_rate);
      }
      if (node) {
        const Tensor source = combined_source ? node_ens_train : r_new;
        std::vector<std::vector<double>> labels;
        for (const auto& n : data.train_nodes) labels.push_back(n.label);
        next_node = samme_r_node_update(state.node_weights, labels, node_rows(source), boost.boost_learning_rate);
      }
    }

    // Stopping rules on the fixed training set.
    std::vector<bool> wrong;
    if (link) wrong = link_mistakes(ens_train, cache.train_labels, boost.tau);
    if (node) {
      const auto nw = node_mistakes(node_ens_train, data.train_eval.nodes);
      wrong.insert(wrong.end(), nw.begin(), nw.end());
    }
    StopDecision decision =
        forced ? *forced : should_stop(k, boost.max_learners, previous_wrong, wrong, boost.require_correction);
    if (!decision.stop && k == boost.max_learners) decision = {true, StopReason::budget, false};
    if (decision.drop_last) {
      state.learners.pop_back();
      rollback();
      if (concat) {
        // Restore the decoder of the retained prefix.
        train_parts.pop();
        val_parts.pop();
        test_parts.pop();
        if (k > 1) {
          state.concat = fit_concat_decoder(k - 1, train_parts.prefix(k - 1, train_labels_only),
                                            val_parts.prefix(k - 1, val_labels_only), boost.concat,
                                            derive(seed, kConcat, k - 1));
        } else {
          state.concat.reset();
        }
      }
      state.stopped = true;
      state.stop_reason = decision.reason;
      break;
    }

    RoundRecord record;
    record.round = k;
    record.weighted_error = weighted_error;
    record.coefficient = coefficient;
    record.epochs_run = fit.diagnostics.train_loss.size();
    record.best_epoch = fit.diagnostics.best_epoch;
    for (std::size_t i = 0; i < previous_wrong.size(); ++i) record.corrected += previous_wrong[i] && !wrong[i];
    state.rounds.push_back(record);
    state.round_errors.push_back(weighted_error);
    previous_wrong = wrong;

    eval::RoundMetrics m;
    m.round = k;
    m.weighted_train_error = weighted_error;
    if (link) {
      m.train_ap = eval::average_precision(ens_train, cache.train_labels);
      m.train_error = eval::error_rate(ens_train, cache.train_labels, boost.tau);
      if (std::ranges::count(cache.validation_labels, 1) > 0) {
        m.validation_ap = eval::average_precision(ens_val, cache.validation_labels);
      }
      if (std::ranges::count(cache.test_labels, 1) > 0) {
        m.test_ap = eval::average_precision(ens_test, cache.test_labels);
        m.test_error = eval::error_rate(ens_test, cache.test_labels, boost.tau);
      }
    }
    if (node) {
      const double tr_ap = gnn::node_average_precision(node_ens_train, data.train_eval.nodes);
      const double tr_err = node_error(node_ens_train, data.train_eval.nodes);
      const double va_ap = val_ids.empty() ? 0.0 : gnn::node_average_precision(node_ens_val, data.validation.nodes);
      const double te_ap = test_ids.empty() ? 0.0 : gnn::node_average_precision(node_ens_test, data.test.nodes);
      const double te_err = test_ids.empty() ? 0.0 : node_error(node_ens_test, data.test.nodes);
      if (link) {
        m.node_train_ap = tr_ap;
        m.node_train_error = tr_err;
        m.node_validation_ap = va_ap;
        m.node_test_ap = te_ap;
        m.node_test_error = te_err;
      } else {
        m.train_ap = tr_ap;
        m.train_error = tr_err;
        m.validation_ap = va_ap;
        m.test_ap = te_ap;
        m.test_error = te_err;
      }
    }
    report.rounds.push_back(m);
    cache.ensemble_train_eval.push_back(ens_train);
    cache.ensemble_validation.push_back(ens_val);
    cache.ensemble_test.push_back(ens_test);
    cache.node_ensemble_train_eval.push_back(node_ens_train);
    cache.node_ensemble_validation.push_back(node_ens_val);
    cache.node_ensemble_test.push_back(node_ens_test);

    // Commit the weight update and redraw negatives for the next round.
    if (link) {
      cap_weights(next_edge, boost.weight_cap);
      double neg_mass = 0.0;
      for (std::size_t i = n_pos; i < next_edge.size(); ++i) neg_mass += next_edge[i];
      const double mean_neg = neg_mass / static_cast<double>(n_pos);
      for (std::size_t i = n_pos; i < next_edge.size(); ++i) next_edge[i] = mean_neg;
      state.edge_weights = std::move(next_edge);
      negatives = draw_negatives(k + 1);
      if (r2) edge_bootstrap = edge_round.bootstrap;
    }
    if (node) {
      cap_weights(next_node, boost.weight_cap);
      state.node_weights = std::move(next_node);
      if (r2) node_bootstrap = node_round.bootstrap;
    }
    if (decision.stop) {
      state.stopped = true;
      state.stop_reason = decision.reason;
    }
    if (progress) progress(state, record, m);
    if (decision.stop) break;
  }

  if (state.learners.empty()) throw BoostError("train_adagnn: the first round was rejected (" +
                                               to_string(state.stop_reason) + ")");
  if (link) report.final_margins = eval::margin_records(cache.ensemble_train_eval.back(), cache.train_labels, boost.tau);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace adagnn::boosting
