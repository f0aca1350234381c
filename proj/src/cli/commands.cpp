#include "adagnn/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "adagnn/boosting/checkpoint.hpp"
#include "adagnn/eval/embeddings.hpp"
#include "adagnn/eval/report_io.hpp"
#include "adagnn/graphdata/io.hpp"

namespace adagnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Hash of the resolved config and the bytes of every input file.
std::string inputs_hash(const ExperimentConfig& config) {
  std::string all = effective_config(config).dump();
  for (const auto* p : {&config.dataset.edges, &config.dataset.features, &config.dataset.labels}) {
    if (!config.dataset.synthetic && !p->empty()) all += read_bytes(*p);
  }
  return sha256_hex(all);
}

void make_output_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw std::runtime_error("cannot create output directory " + out.string());
  const fs::path probe = out / ".write_probe";
  {
    std::ofstream os(probe);
    if (!os) throw std::runtime_error("output directory " + out.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_manifest(const fs::path& out, const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& files, double runtime, json extra = json::object()) {
  json m = {{"command", command},
            {"version", kVersion},
            {"seed", config.seed},
            {"inputs_sha256", inputs_hash(config)},
            {"files", files},
            {"runtime_seconds", runtime},
            {"effective_config", effective_config(config)}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  eval::write_json(m, (out / "manifest.json").string());
}

std::vector<int> labels_of(std::span<const graphdata::EdgeExample> edges) {
  std::vector<int> y;
  for (const auto& e : edges) y.push_back(e.label);
  return y;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& config) {
  Dataset d;
  if (config.dataset.synthetic) {
    auto params = *config.dataset.synthetic;
    params.seed = config.generator_seed();
    auto synth = graphdata::gen_synthetic_multimodal(params);
    d.node_modes = synth.node_modes;
    d.ground_truth = synth.ground_truth_json();
    d.graph = std::make_shared<const graphdata::Graph>(std::move(synth.graph));
    return d;
  }
  const auto ids = graphdata::read_node_ids(config.dataset.features);
  graphdata::Graph g = graphdata::load_edge_csv(config.dataset.edges, config.dataset.timestamps, ids);
  g = graphdata::load_node_features(config.dataset.features, g);
  if (!config.dataset.labels.empty()) g = graphdata::load_node_labels(config.dataset.labels, g);
  d.graph = std::make_shared<const graphdata::Graph>(std::move(g));
  return d;
}

std::unique_ptr<Run> run_experiment(const ExperimentConfig& config, const boosting::ProgressFn& progress) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  auto run = std::make_unique<Run>();
  run->dataset = load_dataset(config);
  const graphdata::Graph& graph = *run->dataset.graph;
  graphdata::SplitSpec split = config.split;
  split.seed = config.split_seed();
  run->data = boosting::prepare_task_data(graph, config.task, split, config.negative_seed());
  run->context = gnn::GraphContext::build(graph, run->data.message_edges);
  gnn::EncoderConfig encoder = config.encoder;
  if (encoder.input_dim == 0) encoder.input_dim = graph.feature_dim();
  if (encoder.input_dim != graph.feature_dim()) {
    throw UsageError("encoder.input_dim is " + std::to_string(encoder.input_dim) + " but the data has " +
                     std::to_string(graph.feature_dim()) + " features");
  }
  run->result = boosting::train_adagnn(run->context, run->data, encoder, config.boosting, config.training, config.seed,
                                       progress);
  run->runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

json metrics_json(const Run& run, const ExperimentConfig& config) {
  const auto& s = run.result.state;
  json rounds = json::array();
  for (const auto& r : s.rounds) {
    rounds.push_back({{"round", r.round},
                      {"weighted_error", r.weighted_error},
                      {"corrected", r.corrected},
                      {"coefficient", r.coefficient},
                      {"epochs_run", r.epochs_run},
                      {"best_epoch", r.best_epoch}});
  }
  return {{"label", config.baseline ? "baseline" : "adagnn"},
          {"task", gnn::to_string(s.task)},
          {"algorithm", config.baseline ? "none" : boosting::to_string(s.config.algorithm)},
          {"embed_dim", config.encoder.embed_dim},
          {"learners", s.learners.size()},
          {"stop_reason", boosting::to_string(s.stop_reason)},
          {"boost_rounds", rounds},
          {"report", eval::to_json(run.result.report)}};
}

void write_run(const Run& run, const ExperimentConfig& config, const fs::path& out, const std::string& command) {
  make_output_dir(out);
  std::vector<std::string> files;
  auto path = [&](const std::string& name) {
    files.push_back(name);
    return (out / name).string();
  };
  const auto& cache = run.result.cache;
  const auto& state = run.result.state;
  eval::write_json(metrics_json(run, config), path("metrics.json"));
  if (gnn::has_link_part(state.task)) {
    const auto thetas = eval::margin_grid();
    const auto curves = eval::margin_curves(cache.ensemble_train_eval, cache.train_labels, thetas, state.config.tau);
    eval::write_margins_csv(thetas, curves, path("margins.csv"));
  }
  const std::vector<eval::MetricsReport> reports{run.result.report};
  eval::write_error_curves_csv(eval::error_curves(reports), path("error_curves.csv"));
  std::vector<graphdata::NodeId> nodes(run.dataset.graph->num_nodes());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  for (const auto& table : eval::export_embeddings(state, run.context, nodes)) {
    eval::write_embeddings_csv(table, path("embeddings_k" + std::to_string(table.learner) + ".csv"));
  }
  boosting::save_checkpoint(state, path("checkpoint.json"));
  write_manifest(out, config, command, files, run.runtime_seconds);
}

void cmd_synth(const ExperimentConfig& config, const fs::path& out) {
  if (!config.dataset.synthetic) throw UsageError("synth needs the 'dataset.synthetic' block");
  const auto started = std::chrono::steady_clock::now();
  const Dataset d = load_dataset(config);
  make_output_dir(out);
  const auto& g = *d.graph;
  graphdata::write_edge_csv(out / "edges.csv", g);
  graphdata::write_matrix_csv(out / "features.csv", g, g.node_features(), "f");
  graphdata::write_matrix_csv(out / "labels.csv", g, *g.node_labels(), "y");
  eval::write_json(d.ground_truth, (out / "ground_truth.json").string());
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(out, config, "synth", {"edges.csv", "features.csv", "labels.csv", "ground_truth.json"}, runtime,
                 {{"generator_seed", config.generator_seed()}, {"num_nodes", g.num_nodes()}, {"num_edges", g.num_edges()}});
}

std::unique_ptr<Run> cmd_train(const ExperimentConfig& config, const fs::path& out, const boosting::ProgressFn& progress) {
  validate(config);
  make_output_dir(out);
  auto run = run_experiment(config, progress);
  write_run(*run, config, out, "train");
  return run;
}

json cmd_eval(const ExperimentConfig& config, const fs::path& checkpoint, const std::string& split_name,
              const fs::path& out) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  const boosting::BoostState state = boosting::load_checkpoint(checkpoint.string());
  if (state.learners.empty()) throw UsageError("checkpoint has no learners");
  const Dataset d = load_dataset(config);
  const graphdata::Graph& graph = *d.graph;
  const std::size_t want = state.learners.front().config.input_dim;
  if (want != graph.feature_dim()) {
    throw UsageError("feature dimension mismatch: checkpoint expects " + std::to_string(want) +
                     ", dataset has " + std::to_string(graph.feature_dim()));
  }
  graphdata::SplitSpec split = config.split;
  split.seed = config.split_seed();
  const auto data = boosting::prepare_task_data(graph, state.task, split, config.negative_seed());
  const auto context = gnn::GraphContext::build(graph, data.message_edges);
  const gnn::ExampleSet* set = nullptr;
  if (split_name == "train") set = &data.train_eval;
  if (split_name == "validation") set = &data.validation;
  if (split_name == "test") set = &data.test;
  if (set == nullptr) throw UsageError("unknown split '" + split_name + "' (expected train, validation or test)");

  const std::size_t k_max = state.learners.size();
  const bool concat = state.config.algorithm == boosting::Algorithm::concat_nn;
  const double tau = state.config.tau;
  json rounds = json::array();
  json out_doc = {{"split", split_name},
                  {"task", gnn::to_string(state.task)},
                  {"algorithm", boosting::to_string(state.config.algorithm)},
                  {"learners", k_max},
                  {"split_signature", data.split_signature},
                  {"eval_negative_seed", data.eval_negative_seed}};

  std::vector<graphdata::NodeId> seen_ids;
  std::vector<bool> seen(graph.num_nodes(), false);
  for (const auto& e : data.train_positives) seen[e.src] = seen[e.dst] = true;
  for (const auto& n : data.train_nodes) seen[n.node] = true;
  std::vector<graphdata::NodeId> unseen;
  for (std::size_t v = 0; v < seen.size(); ++v) {
    if (!seen[v]) unseen.push_back(v);
  }

  if (gnn::has_link_part(state.task)) {
    const auto labels = labels_of(set->edges);
    std::vector<std::vector<double>> per;
    for (const auto& l : state.learners) per.push_back(gnn::score_pairs(l, context, set->edges, state.eval_seed));
    std::vector<double> final_scores;
    for (std::size_t k = concat ? k_max : 1; k <= k_max; ++k) {
      final_scores = concat ? boosting::concat_nn_predict(state.learners, *state.concat, context, set->edges, state.eval_seed)
                            : boosting::combine_scores(std::span(per).first(k), boosting::prefix_alphas(state, k));
      rounds.push_back({{"round", k},
                        {"ap", eval::average_precision(final_scores, labels)},
                        {"error", eval::error_rate(final_scores, labels, tau)}});
    }
    const auto records = eval::margin_records(final_scores, labels, tau);
    const auto thetas = eval::margin_grid();
    out_doc["margin_thetas"] = thetas;
    out_doc["margin_cdf"] = eval::margin_distribution(records, thetas);
    out_doc["unseen_node_fraction"] = graphdata::unseen_fraction(set->edges, unseen);
  }
  if (gnn::has_node_part(state.task) && !set->nodes.empty()) {
    std::vector<graphdata::NodeId> ids;
    for (const auto& n : set->nodes) ids.push_back(n.node);
    std::vector<boosting::Tensor> per;
    for (const auto& l : state.learners) per.push_back(gnn::predict_nodes(l, context, ids, state.eval_seed));
    json node_rounds = json::array();
    for (std::size_t k = concat ? k_max : 1; k <= k_max; ++k) {
      const boosting::Tensor r = concat ? boosting::concat_nn_predict_nodes(state.learners, *state.concat, context, ids, state.eval_seed)
                              : boosting::combine_distributions(std::span(per).first(k), boosting::prefix_alphas(state, k));
      node_rounds.push_back({{"round", k},
                             {"ap", gnn::node_average_precision(r, set->nodes)},
                             {"error", boosting::node_error(r, set->nodes)}});
    }
    out_doc["node_rounds"] = node_rounds;
    std::size_t unseen_nodes = 0;
    for (auto v : ids) unseen_nodes += !seen[v];
    out_doc["unseen_node_fraction_nodes"] = static_cast<double>(unseen_nodes) / static_cast<double>(ids.size());
  }
  out_doc["rounds"] = rounds;
  make_output_dir(out);
  eval::write_json(out_doc, (out / "eval.json").string());
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(out, config, "eval", {"eval.json"}, runtime, {{"checkpoint", checkpoint.string()}});
  return out_doc;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "num_learners") return SweepAxis::num_learners;
  if (text == "embed_dim") return SweepAxis::embed_dim;
  if (text == "train_fraction") return SweepAxis::train_fraction;
  throw UsageError("unknown sweep axis '" + text + "' (expected num_learners, embed_dim or train_fraction)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::num_learners: return "num_learners";
    case SweepAxis::embed_dim: return "embed_dim";
    case SweepAxis::train_fraction: return "train_fraction";
  }
  return "num_learners";
}

ExperimentConfig sweep_arm(const ExperimentConfig& base, SweepAxis axis, double value, std::uint64_t seed,
                           bool baseline) {
  ExperimentConfig c = base;
  c.seed = seed;
  auto whole = [&](double v) {
    if (v < 1.0 || v != std::floor(v)) throw UsageError(to_string(axis) + " values must be positive integers");
    return static_cast<std::size_t>(v);
  };
  switch (axis) {
    case SweepAxis::num_learners: c.boosting.max_learners = whole(value); break;
    case SweepAxis::embed_dim: c.encoder.embed_dim = whole(value); break;
    case SweepAxis::train_fraction: c.split.train_fraction = value; break;
  }
  if (baseline) {
    c.encoder.embed_dim *= c.boosting.max_learners;
    c.boosting.max_learners = 1;
    c.baseline = true;
  }
  return c;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<double>& values,
                                const std::vector<std::uint64_t>& seeds, const fs::path& out) {
  if (values.empty()) throw UsageError("sweep needs at least one value");
  if (seeds.empty()) throw UsageError("sweep needs at least one seed");
  auto arm_name = [](double v) { return eval::shortest(v); };
  std::vector<std::string> names;
  for (double v : values) names.push_back(arm_name(v));
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (names[i] == names[j]) throw UsageError("sweep values " + names[i] + " repeat, so their output directories overlap");
    }
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) throw UsageError("sweep seed " + std::to_string(seeds[i]) + " repeats");
    }
  }
  make_output_dir(out);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::uint64_t seed : seeds) {
      SweepRow row;
      row.value = values[i];
      row.seed = seed;
      const fs::path dir = out / (to_string(axis) + "=" + names[i]) / ("seed=" + std::to_string(seed));
      for (bool baseline : {false, true}) {
        const ExperimentConfig arm = sweep_arm(config, axis, values[i], seed, baseline);
        const fs::path arm_dir = dir / (baseline ? "baseline" : "adagnn");
        if (fs::exists(arm_dir) && !fs::is_empty(arm_dir)) {
          throw UsageError("sweep arm directory " + arm_dir.string() + " already has output");
        }
        auto run = cmd_train(arm, arm_dir);
        const auto& last = run->result.report.rounds.back();
        if (baseline) {
          row.baseline_test_ap = last.test_ap;
          row.baseline_embed_dim = arm.encoder.embed_dim;
          row.baseline_seconds = run->runtime_seconds;
        } else {
          row.adagnn_test_ap = last.test_ap;
          row.adagnn_learners = run->result.state.learners.size();
          row.adagnn_seconds = run->runtime_seconds;
        }
      }
      rows.push_back(row);
    }
  }

  std::ofstream csv(out / "sweep.csv");
  csv << "axis,value,seed,adagnn_test_ap,baseline_test_ap,adagnn_learners,baseline_embed_dim\n";
  for (const auto& r : rows) {
    csv << to_string(axis) << ',' << eval::shortest(r.value) << ',' << r.seed << ',' << eval::shortest(r.adagnn_test_ap)
        << ',' << eval::shortest(r.baseline_test_ap) << ',' << r.adagnn_learners << ',' << r.baseline_embed_dim << '\n';
  }
  if (!csv) throw std::runtime_error("failed writing sweep.csv");
  std::ofstream summary(out / "sweep_summary.csv");
  summary << "axis,value,seeds,adagnn_mean_test_ap,baseline_mean_test_ap,difference\n";
  for (double v : values) {
    double a = 0.0, b = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.value != v) continue;
      a += r.adagnn_test_ap;
      b += r.baseline_test_ap;
      ++n;
    }
    a /= static_cast<double>(n);
    b /= static_cast<double>(n);
    summary << to_string(axis) << ',' << eval::shortest(v) << ',' << n << ',' << eval::shortest(a) << ','
            << eval::shortest(b) << ',' << eval::shortest(a - b) << '\n';
  }
  if (!summary) throw std::runtime_error("failed writing sweep_summary.csv");
  return rows;
}

}  // namespace adagnn::cli
