#include "nondecomp/harness.hpp"
#include "nondecomp/tomlmini.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nondecomp::ExperimentConfig;

// CLI flags mirror config keys one-to-one; a flag set on the command line
// overrides the corresponding key from --config.
struct Overrides {
  std::optional<std::string> algo, measure, data, test_data, stepper,
      dual_reward, hidden, upper_hidden, activation, out, x_axis, label;
  std::optional<double> eta, fbeta_beta, split_fraction, synth_p,
      synth_delta_mu, synth_sigma_pos, synth_sigma_neg, struct_c, init_scale,
      stability_epsilon, prior;
  std::optional<long> batch, iters, inner_iters, seed, eval_every,
      pretrain_epochs, d_int, synth_n, synth_d, positive_class, dim;
  std::optional<bool> normalize, stratified_split, stratified_batches;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--algo", o.algo,
                  "algorithm: dspade|dnemsis|damp|ce|plugin|structann");
  cmd->add_option("--measure", o.measure, "measure: min|qmean|fbeta|kld");
  cmd->add_option("--data", o.data,
                  "libsvm dataset path ('synthetic' or empty for synthetic)");
  cmd->add_option("--test-data", o.test_data, "explicit libsvm test file");
  cmd->add_option("--positive-class", o.positive_class,
                  "binarization: label id mapped to +1");
  cmd->add_option("--dim", o.dim, "expected feature dimension");
  cmd->add_option("--eta", o.eta, "step size");
  cmd->add_option("--batch", o.batch, "minibatch size");
  cmd->add_option("--iters", o.iters, "iteration budget");
  cmd->add_option("--inner-iters", o.inner_iters, "inner iteration budget");
  cmd->add_option("--stepper", o.stepper, "sgd|adam");
  cmd->add_option("--dual-reward", o.dual_reward,
                  "sigmoid|zero_one (zero_one selects the -NS variant)");
  cmd->add_option("--seed", o.seed, "master seed (required)");
  cmd->add_option("--eval-every", o.eval_every, "trace cadence in iterations");
  cmd->add_option("--pretrain-epochs", o.pretrain_epochs,
                  "cross-entropy pretrain epochs (damp)");
  cmd->add_option("--d-int", o.d_int, "stacked interface width (damp)");
  cmd->add_option("--upper-hidden", o.upper_hidden,
                  "upper net hidden sizes, comma separated (damp)");
  cmd->add_option("--struct-c", o.struct_c, "structured regularization C");
  cmd->add_option("--fbeta-beta", o.fbeta_beta, "beta of the F-measure");
  cmd->add_option("--prior", o.prior, "user-supplied positive class prior");
  cmd->add_option("--hidden", o.hidden, "hidden sizes, comma separated");
  cmd->add_option("--activation", o.activation, "relu|tanh|sigmoid");
  cmd->add_option("--init-scale", o.init_scale, "weight init scale");
  cmd->add_option("--split-fraction", o.split_fraction, "train fraction");
  cmd->add_option("--synth-n", o.synth_n, "synthetic sample count");
  cmd->add_option("--synth-d", o.synth_d, "synthetic feature dimension");
  cmd->add_option("--synth-p", o.synth_p, "synthetic positive fraction");
  cmd->add_option("--synth-delta-mu", o.synth_delta_mu,
                  "synthetic class mean separation");
  cmd->add_option("--synth-sigma-pos", o.synth_sigma_pos,
                  "synthetic positive-class sigma");
  cmd->add_option("--synth-sigma-neg", o.synth_sigma_neg,
                  "synthetic negative-class sigma");
  cmd->add_option("--stability-epsilon", o.stability_epsilon,
                  "epsilon of the stabilization report");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--x", o.x_axis, "plot x axis: iters|samples");
  cmd->add_option("--label", o.label, "series label");
  cmd->add_flag("--normalize,!--no-normalize", o.normalize,
                "feature normalization");
  cmd->add_flag("--stratified-split,!--no-stratified-split",
                o.stratified_split, "stratified train/test split");
  cmd->add_flag("--stratified-batches,!--no-stratified-batches",
                o.stratified_batches, "stratified minibatches");
}

ExperimentConfig assemble(const std::string& config_path, const Overrides& o) {
  ExperimentConfig c;
  if (!config_path.empty()) {
    c = nondecomp::config_from_toml(
        nondecomp::TomlTable::parse_file(config_path));
  }
  if (o.algo) c.algo = nondecomp::parse_algo(*o.algo);
  if (o.measure) c.measure = nondecomp::parse_measure(*o.measure);
  if (o.data) c.data_path = (*o.data == "synthetic") ? "" : *o.data;
  if (o.test_data) c.test_data_path = *o.test_data;
  if (o.positive_class) c.positive_class = *o.positive_class;
  if (o.dim) c.expected_dim = *o.dim;
  if (o.eta) c.train.eta = *o.eta;
  if (o.batch) c.train.batch = *o.batch;
  if (o.iters) c.train.iters = *o.iters;
  if (o.inner_iters) c.train.inner_iters = *o.inner_iters;
  if (o.stepper) {
    if (*o.stepper == "sgd") c.train.stepper = nondecomp::StepKind::constant_sgd;
    else if (*o.stepper == "adam") c.train.stepper = nondecomp::StepKind::adam;
    else throw nondecomp::UsageError("unknown stepper: " + *o.stepper);
  }
  if (o.dual_reward) {
    if (*o.dual_reward == "sigmoid")
      c.train.dual_reward = nondecomp::RewardKind::sigmoid;
    else if (*o.dual_reward == "zero_one")
      c.train.dual_reward = nondecomp::RewardKind::zero_one;
    else throw nondecomp::UsageError("unknown dual reward: " + *o.dual_reward);
  }
  if (o.seed) {
    c.seed = static_cast<std::uint64_t>(*o.seed);
    c.seed_set = true;
  }
  if (o.eval_every) c.train.eval_every = *o.eval_every;
  if (o.pretrain_epochs) c.train.pretrain_epochs = *o.pretrain_epochs;
  if (o.d_int) c.d_int = *o.d_int;
  if (o.struct_c) c.train.struct_c = *o.struct_c;
  if (o.fbeta_beta) c.fbeta_beta = *o.fbeta_beta;
  if (o.prior) c.prior_override = *o.prior;
  if (o.init_scale) c.init_scale = *o.init_scale;
  if (o.split_fraction) c.split_fraction = *o.split_fraction;
  if (o.synth_n) c.synth.n = *o.synth_n;
  if (o.synth_d) c.synth.d = *o.synth_d;
  if (o.synth_p) c.synth.p = *o.synth_p;
  if (o.synth_delta_mu) c.synth.delta_mu = *o.synth_delta_mu;
  if (o.synth_sigma_pos) c.synth.sigma_pos = *o.synth_sigma_pos;
  if (o.synth_sigma_neg) c.synth.sigma_neg = *o.synth_sigma_neg;
  if (o.stability_epsilon) c.stability_epsilon = *o.stability_epsilon;
  if (o.out) c.out_dir = *o.out;
  if (o.x_axis) c.x_axis = *o.x_axis;
  if (o.label) c.label = *o.label;
  if (o.normalize) c.do_normalize = *o.normalize;
  if (o.stratified_split) c.stratified_split = *o.stratified_split;
  if (o.stratified_batches) c.train.stratified_batches = *o.stratified_batches;

  auto parse_sizes = [](const std::string& text) {
    std::vector<nondecomp::Index> sizes;
    std::string tok;
    std::stringstream ss(text);
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) sizes.push_back(std::stol(tok));
    }
    return sizes;
  };
  if (o.hidden) c.hidden = parse_sizes(*o.hidden);
  if (o.upper_hidden) c.upper_hidden = parse_sizes(*o.upper_hidden);
  return c;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::string tok;
  std::stringstream ss(text);
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) grid.push_back(std::stod(tok));
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"train small dense networks directly on non-decomposable "
               "performance measures"};
  app.set_version_flag("--version",
                       std::string("nondecomp ") + nondecomp::kVersion);
  app.require_subcommand(1);

  std::string run_config;
  Overrides run_overrides;
  CLI::App* cmd_run = app.add_subcommand("run", "execute one experiment");
  cmd_run->add_option("--config", run_config, "TOML experiment config");
  add_override_flags(cmd_run, run_overrides);

  std::vector<std::string> compare_configs;
  std::string compare_out = "out";
  std::optional<long> compare_seed;
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "run several configs on a shared dataset");
  cmd_compare->add_option("configs", compare_configs, "TOML config files")
      ->required();
  cmd_compare->add_option("--out", compare_out, "output directory");
  cmd_compare->add_option("--seed", compare_seed,
                          "override the seed of every config");

  std::string drift_config;
  std::string drift_grid = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  Overrides drift_overrides;
  CLI::App* cmd_drift =
      app.add_subcommand("drift", "quantification under prior drift");
  cmd_drift->add_option("--config", drift_config, "TOML experiment config");
  cmd_drift->add_option("--grid", drift_grid, "comma-separated p' grid");
  add_override_flags(cmd_drift, drift_overrides);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const auto outcome = nondecomp::run(assemble(run_config, run_overrides));
      std::printf("final test metric: %.6g\n",
                  outcome.summary["final_test_metric"].get<double>());
      std::printf("artifacts: %s, %s, %s\n", outcome.trace_csv.c_str(),
                  outcome.summary_json.c_str(), outcome.plot_svg.c_str());
      return outcome.exit_code;
    }
    if (cmd_compare->parsed()) {
      std::vector<ExperimentConfig> configs;
      for (const auto& path : compare_configs) {
        configs.push_back(assemble(path, {}));
        if (compare_seed) {
          configs.back().seed = static_cast<std::uint64_t>(*compare_seed);
          configs.back().seed_set = true;
        }
      }
      const auto outcome = nondecomp::compare(configs, compare_out);
      std::printf("artifacts: %s, %s\n", outcome.table_csv.c_str(),
                  outcome.plot_svg.c_str());
      for (const auto& r : outcome.runs) {
        if (r.exit_code != 0) return r.exit_code;
      }
      return 0;
    }
    if (cmd_drift->parsed()) {
      const auto outcome = nondecomp::drift_study(
          assemble(drift_config, drift_overrides), parse_grid(drift_grid));
      for (const auto& [p, v] : outcome.rows) {
        std::printf("p'=%.3g  kld=%.6g\n", p, v);
      }
      std::printf("artifacts: %s, %s\n", outcome.csv.c_str(),
                  outcome.svg.c_str());
      return 0;
    }
  } catch (const nondecomp::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
