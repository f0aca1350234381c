#include "adagnn/boosting/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <random>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

namespace adagnn::boosting {

using nlohmann::json;
namespace it = boost::archive::iterators;

namespace {

constexpr const char* kFormat = "adagnn-checkpoint";
constexpr int kVersion = 1;

using ToBase64 = it::base64_from_binary<it::transform_width<std::string::const_iterator, 6, 8>>;
using FromBase64 = it::transform_width<it::binary_from_base64<std::string::const_iterator>, 8, 6>;

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("field '") + key + "': " + e.what());
  }
}

json tensor_json(const numcore::Tensor& t) {
  return {{"rows", t.rows()}, {"cols", t.cols()}, {"data", encode_doubles(t.values())}};
}

void fill_tensor(numcore::Tensor& t, const json& j, const std::string& name) {
  const auto rows = get<std::size_t>(j, "rows");
  const auto cols = get<std::size_t>(j, "cols");
  if (rows != t.rows() || cols != t.cols()) {
    throw CheckpointError("tensor '" + name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", expected " + numcore::to_string(t.shape()));
  }
  const auto values = decode_doubles(get<std::string>(j, "data"));
  if (values.size() != t.size()) throw CheckpointError("tensor '" + name + "' has the wrong number of values");
  std::ranges::copy(values, t.mutable_values().begin());
}

json mlp_json(const gnn::MlpDecoder& d) {
  json out;
  for (const auto& [name, t] : d.named()) out[name] = tensor_json(t);
  return out;
}

gnn::MlpDecoder mlp_from_json(const json& j) {
  try {
    const auto in = j.at("hidden_weight").at("rows").get<std::size_t>();
    const auto hidden = j.at("hidden_weight").at("cols").get<std::size_t>();
    const auto out = j.at("out_weight").at("cols").get<std::size_t>();
    gnn::MlpDecoder d = gnn::MlpDecoder::zeros(in, hidden, out);
    for (auto& [name, t] : d.named()) fill_tensor(t, j.at(name), name);
    return d;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("decoder: ") + e.what());
  }
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
  std::string bytes;
  bytes.reserve(values.size() * 8);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  std::string out(ToBase64(bytes.cbegin()), ToBase64(bytes.cend()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<double> decode_doubles(const std::string& text) {
  if (text.size() % 4 != 0) throw CheckpointError("base64 blob length is not a multiple of 4");
  std::string body = text;
  std::size_t pad = 0;
  while (!body.empty() && body.back() == '=' && pad < 2) {
    body.pop_back();
    ++pad;
  }
  std::string bytes;
  try {
    // Pad with 'A' (zero bits) so the 6-to-8 transform sees whole groups.
    body.append(pad, 'A');
    bytes.assign(FromBase64(body.cbegin()), FromBase64(body.cend()));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("invalid base64 blob: ") + e.what());
  }
  bytes.resize(bytes.size() - pad);
  if (bytes.size() % 8 != 0) throw CheckpointError("blob length is not a whole number of float64 values");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * i + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void require_known_keys(const json& j, std::span<const char* const> allowed, const std::string& block) {
  if (!j.is_object()) throw CheckpointError("block '" + block + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::ranges::none_of(allowed, [&](const char* a) { return key == a; })) {
      throw CheckpointError("unknown key '" + key + "' in block '" + block + "'");
    }
  }
}

json to_json(const gnn::EncoderConfig& c) {
  return {{"kind", gnn::to_string(c.kind)},
          {"input_dim", c.input_dim},
          {"embed_dim", c.embed_dim},
          {"num_heads", c.num_heads},
          {"num_layers", c.num_layers},
          {"neighbor_sample_size", c.neighbor_sample_size},
          {"include_self_in_node_task", c.include_self_in_node_task}};
}

gnn::EncoderConfig encoder_config_from_json(const json& j, gnn::EncoderConfig c) {
  static constexpr const char* keys[] = {"kind",       "input_dim",           "embed_dim",
                                         "num_heads",  "num_layers",          "neighbor_sample_size",
                                         "include_self_in_node_task"};
  require_known_keys(j, keys, "encoder");
  try {
    if (j.contains("kind")) c.kind = gnn::parse_encoder_kind(j.at("kind").get<std::string>());
    c.input_dim = j.value("input_dim", c.input_dim);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.neighbor_sample_size = j.value("neighbor_sample_size", c.neighbor_sample_size);
    c.include_self_in_node_task = j.value("include_self_in_node_task", c.include_self_in_node_task);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("encoder block: ") + e.what());
  }
  return c;
}

json to_json(const gnn::TrainHyper& h) {
  return {{"learning_rate", h.learning_rate}, {"epochs", h.epochs},
          {"patience", h.patience},           {"batch_size", h.batch_size},
          {"multitask_mix", h.multitask_mix}, {"node_hidden_dim", h.node_hidden_dim}};
}

gnn::TrainHyper train_hyper_from_json(const json& j, gnn::TrainHyper h) {
  static constexpr const char* keys[] = {"learning_rate", "epochs",        "patience",
                                         "batch_size",    "multitask_mix", "node_hidden_dim"};
  require_known_keys(j, keys, "training");
  try {
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.epochs = j.value("epochs", h.epochs);
    h.patience = j.value("patience", h.patience);
    h.batch_size = j.value("batch_size", h.batch_size);
    h.multitask_mix = j.value("multitask_mix", h.multitask_mix);
    h.node_hidden_dim = j.value("node_hidden_dim", h.node_hidden_dim);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("training block: ") + e.what());
  }
  return h;
}

json to_json(const BoostConfig& c) {
  return {{"max_learners", c.max_learners},
          {"boost_learning_rate", c.boost_learning_rate},
          {"algorithm", to_string(c.algorithm)},
          {"tau", c.tau},
          {"weight_source", to_string(c.weight_source)},
          {"weight_cap", c.weight_cap},
          {"require_correction", c.require_correction},
          {"concat",
           {{"hidden_dim", c.concat.hidden_dim},
            {"learning_rate", c.concat.learning_rate},
            {"epochs", c.concat.epochs},
            {"patience", c.concat.patience},
            {"batch_size", c.concat.batch_size}}}};
}

BoostConfig boost_config_from_json(const json& j, BoostConfig c) {
  static constexpr const char* keys[] = {"max_learners", "boost_learning_rate", "algorithm",          "tau",
                                         "weight_source", "weight_cap",         "require_correction", "concat"};
  static constexpr const char* concat_keys[] = {"hidden_dim", "learning_rate", "epochs", "patience", "batch_size"};
  require_known_keys(j, keys, "boosting");
  try {
    c.max_learners = j.value("max_learners", c.max_learners);
    c.boost_learning_rate = j.value("boost_learning_rate", c.boost_learning_rate);
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    c.tau = j.value("tau", c.tau);
    if (j.contains("weight_source")) c.weight_source = parse_weight_source(j.at("weight_source").get<std::string>());
    c.weight_cap = j.value("weight_cap", c.weight_cap);
    c.require_correction = j.value("require_correction", c.require_correction);
    if (j.contains("concat")) {
      const json& k = j.at("concat");
      require_known_keys(k, concat_keys, "boosting.concat");
      c.concat.hidden_dim = k.value("hidden_dim", c.concat.hidden_dim);
      c.concat.learning_rate = k.value("learning_rate", c.concat.learning_rate);
      c.concat.epochs = k.value("epochs", c.concat.epochs);
      c.concat.patience = k.value("patience", c.concat.patience);
      c.concat.batch_size = k.value("batch_size", c.concat.batch_size);
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("boosting block: ") + e.what());
  }
  return c;
}

json to_json(const gnn::WeakLearnerParams& learner) {
  json tensors;
  for (const auto& [name, t] : learner.named()) tensors[name] = tensor_json(t);
  return {{"config", to_json(learner.config)},
          {"alpha", learner.alpha},
          {"has_node_decoder", learner.node_decoder.has_value()},
          {"tensors", tensors}};
}

gnn::WeakLearnerParams learner_from_json(const json& j) {
  gnn::WeakLearnerParams p;
  p.config = encoder_config_from_json(j.at("config"));
  p.config.validate(true);
  p.alpha = get<double>(j, "alpha");
  std::mt19937_64 rng(0);
  p.encoder = gnn::EncoderParams::init(p.config, rng);
  const json& tensors = j.at("tensors");
  if (get<bool>(j, "has_node_decoder")) {
    json node;
    for (const char* part : {"hidden_weight", "hidden_bias", "out_weight", "out_bias"}) {
      const std::string key = std::string("node_decoder.") + part;
      if (!tensors.contains(key)) throw CheckpointError("learner is missing tensor '" + key + "'");
      node[part] = tensors.at(key);
    }
    p.node_decoder = mlp_from_json(node);
  }
  std::size_t seen = 0;
  for (auto& [name, t] : p.named()) {
    if (!tensors.contains(name)) throw CheckpointError("learner is missing tensor '" + name + "'");
    fill_tensor(t, tensors.at(name), name);
    ++seen;
  }
  if (seen != tensors.size()) throw CheckpointError("learner has unexpected tensors");
  p.validate();
  return p;
}

json to_json(const BoostState& s) {
  json learners = json::array();
  for (const auto& l : s.learners) learners.push_back(to_json(l));
  json rounds = json::array();
  for (const auto& r : s.rounds) {
    rounds.push_back({{"round", r.round},
                      {"weighted_error", r.weighted_error},
                      {"corrected", r.corrected},
                      {"coefficient", r.coefficient},
                      {"epochs_run", r.epochs_run},
                      {"best_epoch", r.best_epoch}});
  }
  json concat = nullptr;
  if (s.concat) {
    concat = {{"num_learners", s.concat->num_learners}};
    if (s.concat->pair) concat["pair"] = mlp_json(*s.concat->pair);
    if (s.concat->node) concat["node"] = mlp_json(*s.concat->node);
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"task", gnn::to_string(s.task)},
          {"boosting", to_json(s.config)},
          {"seed", s.seed},
          {"eval_seed", s.eval_seed},
          {"edge_weights", encode_doubles(s.edge_weights)},
          {"node_weights", encode_doubles(s.node_weights)},
          {"round_errors", encode_doubles(s.round_errors)},
          {"rounds", rounds},
          {"stopped", s.stopped},
          {"stop_reason", to_string(s.stop_reason)},
          {"learners", learners},
          {"concat", concat}};
}

BoostState state_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kFormat) throw CheckpointError("not a checkpoint file");
    if (get<int>(j, "version") != kVersion) throw CheckpointError("unsupported checkpoint version");
    BoostState s;
    s.task = gnn::parse_task(get<std::string>(j, "task"));
    s.config = boost_config_from_json(j.at("boosting"));
    s.seed = get<std::uint64_t>(j, "seed");
    s.eval_seed = get<std::uint64_t>(j, "eval_seed");
    s.edge_weights = decode_doubles(get<std::string>(j, "edge_weights"));
    s.node_weights = decode_doubles(get<std::string>(j, "node_weights"));
    s.round_errors = decode_doubles(get<std::string>(j, "round_errors"));
    for (const auto& r : j.at("rounds")) {
      s.rounds.push_back({get<std::size_t>(r, "round"), get<double>(r, "weighted_error"), get<std::size_t>(r, "corrected"),
                          get<double>(r, "coefficient"), get<std::size_t>(r, "epochs_run"),
                          get<std::size_t>(r, "best_epoch")});
    }
    s.stopped = get<bool>(j, "stopped");
    s.stop_reason = parse_stop_reason(get<std::string>(j, "stop_reason"));
    for (const auto& l : j.at("learners")) s.learners.push_back(learner_from_json(l));
    if (s.round_errors.size() != s.learners.size()) {
      throw CheckpointError("round_errors and learners differ in length");
    }
    const json& c = j.at("concat");
    if (!c.is_null()) {
      ConcatDecoder d;
      d.num_learners = get<std::size_t>(c, "num_learners");
      if (c.contains("pair")) d.pair = mlp_from_json(c.at("pair"));
      if (c.contains("node")) d.node = mlp_from_json(c.at("node"));
      s.concat = std::move(d);
    }
    return s;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupted checkpoint: ") + e.what());
  }
}

void save_checkpoint(const BoostState& state, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw CheckpointError("cannot write " + path);
  os << to_json(state).dump(1) << '\n';
  if (!os) throw CheckpointError("failed writing " + path);
}

BoostState load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CheckpointError("cannot read " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  return state_from_json(j);
}

}  // namespace adagnn::boosting
