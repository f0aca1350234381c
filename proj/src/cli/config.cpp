#include "adagnn/cli/config.hpp"

#include <fstream>
#include <random>

#include "adagnn/boosting/checkpoint.hpp"

namespace adagnn::cli {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

template <class F>
auto guarded(const std::string& block, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw UsageError("config block '" + block + "': " + e.what());
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

void known(const json& j, std::initializer_list<const char*> keys, const std::string& block) {
  const std::vector<const char*> allowed(keys);
  guarded(block, [&] {
    boosting::require_known_keys(j, allowed, block);
    return 0;
  });
}

graphdata::SyntheticParams synthetic_from_json(const json& j, bool& seed_set) {
  known(j,
        {"num_nodes", "num_modes", "feature_dim_per_mode", "modes_per_node", "intra_mode_edge_prob",
         "noise_edge_prob", "feature_noise", "inactive_noise", "seed"},
        "dataset.synthetic");
  return guarded("dataset.synthetic", [&] {
    graphdata::SyntheticParams p;
    p.num_nodes = j.value("num_nodes", p.num_nodes);
    p.num_modes = j.value("num_modes", p.num_modes);
    p.feature_dim_per_mode = j.value("feature_dim_per_mode", p.feature_dim_per_mode);
    p.modes_per_node = j.value("modes_per_node", p.modes_per_node);
    p.intra_mode_edge_prob = j.value("intra_mode_edge_prob", p.intra_mode_edge_prob);
    p.noise_edge_prob = j.value("noise_edge_prob", p.noise_edge_prob);
    p.feature_noise = j.value("feature_noise", p.feature_noise);
    p.inactive_noise = j.value("inactive_noise", p.inactive_noise);
    seed_set = j.contains("seed") && !j.at("seed").is_null();
    if (seed_set) p.seed = j.at("seed").get<std::uint64_t>();
    return p;
  });
}

json synthetic_to_json(const graphdata::SyntheticParams& p) {
  return {{"num_nodes", p.num_nodes},
          {"num_modes", p.num_modes},
          {"feature_dim_per_mode", p.feature_dim_per_mode},
          {"modes_per_node", p.modes_per_node},
          {"intra_mode_edge_prob", p.intra_mode_edge_prob},
          {"noise_edge_prob", p.noise_edge_prob},
          {"feature_noise", p.feature_noise},
          {"inactive_noise", p.inactive_noise},
          {"seed", p.seed}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::uint64_t ExperimentConfig::generator_seed() const {
  return dataset.synthetic && dataset.synthetic_seed_set ? dataset.synthetic->seed : mix(seed, 1);
}

std::uint64_t ExperimentConfig::split_seed() const { return split_seed_set ? split.seed : mix(seed, 2); }

std::uint64_t ExperimentConfig::negative_seed() const { return eval_negative_seed ? *eval_negative_seed : mix(seed, 3); }

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  known(j, {"dataset", "split", "encoder", "boosting", "training", "task", "seed", "output_dir", "allow_off_grid"},
        "top level");
  ExperimentConfig c;
  if (!j.contains("dataset")) throw UsageError("config is missing the 'dataset' block");
  const json& d = j.at("dataset");
  known(d, {"synthetic", "edges", "features", "labels", "timestamps"}, "dataset");
  guarded("dataset", [&] {
    if (d.contains("synthetic")) {
      c.dataset.synthetic = synthetic_from_json(d.at("synthetic"), c.dataset.synthetic_seed_set);
    }
    if (d.contains("edges")) c.dataset.edges = resolve(base_dir, d.at("edges").get<std::string>());
    if (d.contains("features")) c.dataset.features = resolve(base_dir, d.at("features").get<std::string>());
    if (d.contains("labels")) c.dataset.labels = resolve(base_dir, d.at("labels").get<std::string>());
    c.dataset.timestamps = d.value("timestamps", false);
    return 0;
  });
  if (j.contains("split")) {
    const json& s = j.at("split");
    known(s, {"mode", "train_fraction", "seed", "deduplicate_eval", "eval_negative_seed"}, "split");
    guarded("split", [&] {
      if (s.contains("mode")) c.split.mode = graphdata::parse_split_mode(s.at("mode").get<std::string>());
      c.split.train_fraction = s.value("train_fraction", c.split.train_fraction);
      c.split.deduplicate_eval = s.value("deduplicate_eval", c.split.deduplicate_eval);
      c.split_seed_set = s.contains("seed") && !s.at("seed").is_null();
      if (c.split_seed_set) c.split.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("eval_negative_seed") && !s.at("eval_negative_seed").is_null()) {
        c.eval_negative_seed = s.at("eval_negative_seed").get<std::uint64_t>();
      }
      return 0;
    });
  }
  if (j.contains("encoder")) c.encoder = guarded("encoder", [&] { return boosting::encoder_config_from_json(j.at("encoder")); });
  if (j.contains("boosting")) {
    json b = j.at("boosting");
    if (b.is_object() && b.value("algorithm", "") == "none") {
      c.baseline = true;
      b.erase("algorithm");
      b["max_learners"] = 1;
    }
    c.boosting = guarded("boosting", [&] { return boosting::boost_config_from_json(b); });
  }
  if (j.contains("training")) c.training = guarded("training", [&] { return boosting::train_hyper_from_json(j.at("training")); });
  guarded("top level", [&] {
    if (j.contains("task")) c.task = gnn::parse_task(j.at("task").get<std::string>());
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.allow_off_grid = j.value("allow_off_grid", false);
    return 0;
  });
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override '" + assignment + "' is not KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw UsageError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config " + path.string());
  json doc = json::parse(is, nullptr, false, true);
  if (doc.is_discarded()) throw UsageError("config " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc, path.parent_path());
}

json effective_config(const ExperimentConfig& c) {
  json dataset;
  if (c.dataset.synthetic) {
    auto p = *c.dataset.synthetic;
    p.seed = c.generator_seed();
    dataset["synthetic"] = synthetic_to_json(p);
  } else {
    dataset["edges"] = c.dataset.edges.string();
    if (!c.dataset.features.empty()) dataset["features"] = c.dataset.features.string();
    if (!c.dataset.labels.empty()) dataset["labels"] = c.dataset.labels.string();
    dataset["timestamps"] = c.dataset.timestamps;
  }
  json boost = boosting::to_json(c.boosting);
  if (c.baseline) boost["algorithm"] = "none";
  return {{"dataset", dataset},
          {"split",
           {{"mode", graphdata::to_string(c.split.mode)},
            {"train_fraction", c.split.train_fraction},
            {"seed", c.split_seed()},
            {"deduplicate_eval", c.split.deduplicate_eval},
            {"eval_negative_seed", c.negative_seed()}}},
          {"encoder", boosting::to_json(c.encoder)},
          {"boosting", boost},
          {"training", boosting::to_json(c.training)},
          {"task", gnn::to_string(c.task)},
          {"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"allow_off_grid", c.allow_off_grid}};
}

void validate(const ExperimentConfig& c) {
  guarded("validation", [&] {
    // input_dim 0 means "take it from the data", which is only known later.
    gnn::EncoderConfig encoder = c.encoder;
    if (encoder.input_dim == 0) encoder.input_dim = 1;
    encoder.validate(c.allow_off_grid);
    c.boosting.validate(c.allow_off_grid);
    c.training.validate(c.allow_off_grid);
    return 0;
  });
  if (!c.dataset.synthetic) {
    if (c.dataset.edges.empty()) throw UsageError("dataset block needs either 'synthetic' or 'edges'");
    for (const auto* p : {&c.dataset.edges, &c.dataset.features, &c.dataset.labels}) {
      if (!p->empty() && !std::filesystem::exists(*p)) throw UsageError("dataset file does not exist: " + p->string());
    }
    if (c.dataset.features.empty()) throw UsageError("dataset block needs a 'features' file");
  }
  if (!(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0)) {
    throw UsageError("split.train_fraction must lie in (0,1)");
  }
  if (gnn::has_node_part(c.task) && !c.dataset.synthetic && c.dataset.labels.empty()) {
    throw UsageError("task '" + gnn::to_string(c.task) + "' needs node labels (dataset.labels)");
  }
}

}  // namespace adagnn::cli
