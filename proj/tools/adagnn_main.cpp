// Command line front end: synth, train, eval and sweep.
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "adagnn/cli/commands.hpp"
#include "adagnn/eval/report_io.hpp"

namespace cli = adagnn::cli;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  bool print_effective = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config")->required();
  sub->add_option("--seed", c.seed, "run seed (overrides the config)");
  sub->add_option("--out", c.out, "output directory (overrides output_dir)");
  sub->add_option("--override", c.overrides, "dotted.key=value, repeatable");
  sub->add_flag("--print-effective-config", c.print_effective, "print the resolved config and exit");
}

cli::ExperimentConfig resolve(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  if (!c.out.empty()) overrides.push_back("output_dir=" + json(c.out).dump());
  return cli::load_config(c.config, overrides);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw cli::UsageError(std::string("empty entry in --") + what);
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw cli::UsageError(std::string("bad --") + what + " entry '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw cli::UsageError(std::string("--") + what + " is empty");
  return values;
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
  return code;
}

void print_round(const adagnn::boosting::BoostState&, const adagnn::boosting::RoundRecord& r,
                 const adagnn::eval::RoundMetrics& m) {
  std::cerr << "round " << r.round << ": weighted_error " << adagnn::eval::shortest(r.weighted_error)
            << " corrected " << r.corrected << " validation_ap " << adagnn::eval::shortest(m.validation_ap)
            << " test_ap " << adagnn::eval::shortest(m.test_ap) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boosted graph neural network ensembles"};
  app.set_version_flag("--version", cli::kVersion);
  app.require_subcommand(1);

  Common synth_opts, train_opts, eval_opts, sweep_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic multimodal graph");
  add_common(synth, synth_opts);
  auto* train = app.add_subcommand("train", "train an ensemble and write its artifacts");
  add_common(train, train_opts);
  bool quiet = false;
  train->add_flag("--quiet", quiet, "no per-round progress");

  auto* evaluate = app.add_subcommand("eval", "rescore a checkpoint");
  add_common(evaluate, eval_opts);
  std::string checkpoint, split = "test";
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint.json written by train")->required();
  evaluate->add_option("--split", split, "train, validation or test");

  auto* sweep = app.add_subcommand("sweep", "AdaGNN against a single wide learner over one axis");
  add_common(sweep, sweep_opts);
  std::string axis, values, seeds;
  sweep->add_option("--axis", axis, "num_learners, embed_dim or train_fraction")->required();
  sweep->add_option("--values", values, "comma separated axis values")->required();
  sweep->add_option("--seeds", seeds, "comma separated seeds")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (synth->parsed()) {
      const auto config = resolve(synth_opts);
      if (synth_opts.print_effective) return std::cout << cli::effective_config(config).dump(2) << '\n', 0;
      cli::cmd_synth(config, config.output_dir);
    } else if (train->parsed()) {
      const auto config = resolve(train_opts);
      if (train_opts.print_effective) return std::cout << cli::effective_config(config).dump(2) << '\n', 0;
      auto run = cli::cmd_train(config, config.output_dir, quiet ? adagnn::boosting::ProgressFn{} : print_round);
      std::cout << cli::metrics_json(*run, config).dump(2) << '\n';
    } else if (evaluate->parsed()) {
      const auto config = resolve(eval_opts);
      if (eval_opts.print_effective) return std::cout << cli::effective_config(config).dump(2) << '\n', 0;
      std::cout << cli::cmd_eval(config, checkpoint, split, config.output_dir).dump(2) << '\n';
    } else if (sweep->parsed()) {
      const auto config = resolve(sweep_opts);
      if (sweep_opts.print_effective) return std::cout << cli::effective_config(config).dump(2) << '\n', 0;
      const auto rows = cli::cmd_sweep(config, cli::parse_sweep_axis(axis), parse_list<double>(values, "values"),
                                       parse_list<std::uint64_t>(seeds, "seeds"), config.output_dir);
      std::cout << "wrote " << rows.size() << " sweep rows to " << config.output_dir.string() << '\n';
    }
  } catch (const cli::UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
