#include "nondecomp/harness.hpp"

#include "nondecomp/rng.hpp"
#include "nondecomp/svg.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nondecomp {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

AlgoId parse_algo(const std::string& name) {
  if (name == "dspade") return AlgoId::dspade;
  if (name == "dnemsis") return AlgoId::dnemsis;
  if (name == "damp") return AlgoId::damp;
  if (name == "ce" || name == "bench") return AlgoId::ce;
  if (name == "plugin") return AlgoId::plugin;
  if (name == "structann") return AlgoId::structann;
  throw UsageError("unknown algorithm: " + name);
}

MeasureId parse_measure(const std::string& name) {
  if (name == "min" || name == "min_tpr_tnr") return MeasureId::min_tpr_tnr;
  if (name == "qmean" || name == "q_mean") return MeasureId::q_mean;
  if (name == "fbeta" || name == "f1") return MeasureId::fbeta;
  if (name == "kld") return MeasureId::kld;
  throw UsageError("unknown measure: " + name);
}

std::string to_string(AlgoId algo) {
  switch (algo) {
    case AlgoId::dspade: return "dspade";
    case AlgoId::dnemsis: return "dnemsis";
    case AlgoId::damp: return "damp";
    case AlgoId::ce: return "ce";
    case AlgoId::plugin: return "plugin";
    case AlgoId::structann: return "structann";
  }
  return "?";
}

std::string to_string(MeasureId measure) {
  switch (measure) {
    case MeasureId::min_tpr_tnr: return "min";
    case MeasureId::q_mean: return "qmean";
    case MeasureId::fbeta: return "fbeta";
    case MeasureId::kld: return "kld";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw UsageError("unknown activation: " + name);
}

namespace {

std::vector<Index> parse_size_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(static_cast<Index>(std::stol(tok)));
  }
  return out;
}

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

ExperimentConfig config_from_toml(const TomlTable& t) {
  ExperimentConfig c;
  c.data_path = t.get_string("data", "");
  if (c.data_path == "synthetic") c.data_path.clear();
  c.test_data_path = t.get_string("test_data", "");
  if (t.has("positive_class")) c.positive_class = t.at("positive_class").as_long();
  if (t.has("dim")) c.expected_dim = t.at("dim").as_long();
  c.synth.n = t.get_long("synth_n", c.synth.n);
  c.synth.d = t.get_long("synth_d", c.synth.d);
  c.synth.p = t.get_double("synth_p", c.synth.p);
  c.synth.delta_mu = t.get_double("synth_delta_mu", c.synth.delta_mu);
  c.synth.sigma_pos = t.get_double("synth_sigma_pos", c.synth.sigma_pos);
  c.synth.sigma_neg = t.get_double("synth_sigma_neg", c.synth.sigma_neg);
  c.split_fraction = t.get_double("split_fraction", c.split_fraction);
  c.stratified_split = t.get_bool("stratified_split", c.stratified_split);
  c.do_normalize = t.get_bool("normalize", c.do_normalize);

  c.algo = parse_algo(t.get_string("algo", "dspade"));
  c.measure = parse_measure(t.get_string("measure", "min"));
  c.fbeta_beta = t.get_double("fbeta_beta", c.fbeta_beta);
  if (t.has("prior")) c.prior_override = t.at("prior").as_double();

  c.hidden = t.has("hidden") ? parse_size_list(t.get_string("hidden", "16"))
                             : c.hidden;
  c.activation = parse_activation(t.get_string("activation", "relu"));
  c.init_scale = t.get_double("init_scale", c.init_scale);
  c.d_int = t.get_long("d_int", c.d_int);
  if (t.has("upper_hidden")) {
    c.upper_hidden = parse_size_list(t.get_string("upper_hidden", ""));
  }

  const std::string stepper = t.get_string("stepper", "sgd");
  if (stepper == "sgd") c.train.stepper = StepKind::constant_sgd;
  else if (stepper == "adam") c.train.stepper = StepKind::adam;
  else throw UsageError("unknown stepper: " + stepper);
  c.train.eta = t.get_double("eta", c.train.eta);
  c.train.batch = t.get_long("batch", c.train.batch);
  c.train.iters = t.get_long("iters", c.train.iters);
  c.train.inner_iters = t.get_long("inner_iters", c.train.inner_iters);
  const std::string dual = t.get_string("dual_reward", "sigmoid");
  if (dual == "sigmoid") c.train.dual_reward = RewardKind::sigmoid;
  else if (dual == "zero_one") c.train.dual_reward = RewardKind::zero_one;
  else throw UsageError("unknown dual reward: " + dual);
  c.train.eval_every = t.get_long("eval_every", c.train.eval_every);
  c.train.stratified_batches =
      t.get_bool("stratified_batches", c.train.stratified_batches);
  c.train.pretrain_epochs = t.get_long("pretrain_epochs", c.train.pretrain_epochs);
  c.train.struct_c = t.get_double("struct_c", c.train.struct_c);

  if (t.has("seed")) {
    c.seed = static_cast<std::uint64_t>(t.at("seed").as_long());
    c.seed_set = true;
  }
  c.stability_epsilon = t.get_double("stability_epsilon", c.stability_epsilon);
  c.plugin_val_fraction =
      t.get_double("plugin_val_fraction", c.plugin_val_fraction);
  c.out_dir = t.get_string("out", c.out_dir);
  c.x_axis = t.get_string("x_axis", c.x_axis);
  c.label = t.get_string("label", c.label);
  return c;
}

void check_compatibility(const ExperimentConfig& config) {
  if (!config.seed_set) throw UsageError("a seed is required (--seed)");
  const auto bad = [&]() {
    throw UsageError("algorithm '" + to_string(config.algo) +
                     "' does not support measure '" +
                     to_string(config.measure) + "'");
  };
  switch (config.algo) {
    case AlgoId::dspade:
      if (config.measure != MeasureId::min_tpr_tnr &&
          config.measure != MeasureId::q_mean) bad();
      break;
    case AlgoId::dnemsis:
      if (config.measure != MeasureId::kld) bad();
      break;
    case AlgoId::damp:
    case AlgoId::plugin:
      if (config.measure != MeasureId::fbeta) bad();
      break;
    case AlgoId::ce:
    case AlgoId::structann:
      break;  // any measure (evaluation / loss construction only)
  }
  if (config.x_axis != "iters" && config.x_axis != "samples") {
    throw UsageError("x_axis must be 'iters' or 'samples'");
  }
}

LoadedData load_data(const ExperimentConfig& config) {
  if (config.data_path.empty()) {
    SyntheticSpec spec = config.synth;
    spec.seed = mix_seed(config.seed, 1);
    const Dataset full = gen_two_gaussians(spec);
    auto [train, test] = split(full, config.split_fraction,
                               mix_seed(config.seed, 2),
                               config.stratified_split);
    if (!config.do_normalize) return {std::move(train), std::move(test)};
    auto normalized = normalize(train, test);
    return {std::move(normalized.train), std::move(normalized.test)};
  }

  auto resolve = [](const std::string& path) -> std::string {
    if (fs::exists(path)) return path;
    if (const char* root = std::getenv("NONDECOMP_DATA_DIR")) {
      const fs::path alt = fs::path(root) / path;
      if (fs::exists(alt)) return alt.string();
    }
    throw ParseError("dataset not found: " + path);
  };

  const Dataset full = load_libsvm(resolve(config.data_path),
                                   config.expected_dim, config.positive_class);
  Dataset train, test;
  if (!config.test_data_path.empty()) {
    train = full;
    test = load_libsvm(resolve(config.test_data_path), full.dim(),
                       config.positive_class);
  } else {
    auto parts = split(full, config.split_fraction, mix_seed(config.seed, 2),
                       config.stratified_split);
    train = std::move(parts.first);
    test = std::move(parts.second);
  }
  if (!config.do_normalize) return {std::move(train), std::move(test)};
  auto normalized = normalize(train, test);
  return {std::move(normalized.train), std::move(normalized.test)};
}

MeasureSpec build_measure(const ExperimentConfig& config,
                          const Dataset& train) {
  const ClassPriors priors = config.prior_override
                                 ? ClassPriors::value(*config.prior_override)
                                 : ClassPriors::empirical(train);
  switch (config.measure) {
    case MeasureId::min_tpr_tnr:
      return ConcaveLink{LinkKind::min_tpr_tnr};
    case MeasureId::q_mean:
      return ConcaveLink{LinkKind::q_mean};
    case MeasureId::fbeta:
      return fbeta_coeffs(config.fbeta_beta, priors);
    case MeasureId::kld:
      return neg_kld_nested(priors);
  }
  throw ConfigError("unknown measure id");
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::ostringstream out;
  out << "iter,samples,wall_ms,train_metric,test_metric,grad_norm,alpha,beta,"
         "gamma1,gamma2,level_v\n";
  auto cell = [](double v) { return std::isfinite(v) ? fmt_num(v) : ""; };
  for (const auto& r : trace.records) {
    out << r.iter << ',' << r.samples << ','
        << /* wall time stays out of the file for reproducibility */ ','
        << cell(r.train_metric) << ',' << cell(r.test_metric) << ','
        << cell(r.grad_norm) << ',' << cell(r.alpha) << ',' << cell(r.beta)
        << ',' << cell(r.gamma1) << ',' << cell(r.gamma2) << ','
        << cell(r.level_v) << '\n';
  }
  return out.str();
}

bool validate_summary(const nlohmann::json& s) {
  const char* required_numbers[] = {
      "schema_version",     "seed",           "final_train_metric",
      "final_test_metric",  "best_test_metric", "best_test_iter",
      "samples_consumed",   "wall_ms_total",  "stability_epsilon"};
  for (const char* key : required_numbers) {
    if (!s.contains(key) || !s[key].is_number()) return false;
  }
  const char* required_strings[] = {"artifact_version", "algorithm", "measure"};
  for (const char* key : required_strings) {
    if (!s.contains(key) || !s[key].is_string()) return false;
  }
  return s.contains("config") && s["config"].is_object() &&
         s.contains("dataset") && s["dataset"].is_object() &&
         s.contains("aborted") && s["aborted"].is_boolean();
}

namespace {

struct DispatchResult {
  TrainTrace trace;
  double final_train_metric = 0.0;
  double final_test_metric = 0.0;
  std::optional<double> tuned_threshold;
};

NetworkConfig make_net(const ExperimentConfig& config, Index input_dim,
                       Index output_dim, std::uint64_t salt) {
  NetworkConfig net;
  net.input_dim = input_dim;
  net.layer_sizes = config.hidden;
  net.layer_sizes.push_back(output_dim);
  net.hidden_activation = config.activation;
  net.init_scale = config.init_scale;
  net.init_seed = mix_seed(config.seed, salt);
  return net;
}

// Loss transcription for the structured baseline: 1 - measure value on the
// batch counts, with vacuous rates treated as perfect (a batch can miss a
// class entirely).
std::function<double(const ConfusionCounts&)> delta_from_measure(
    const MeasureSpec& measure) {
  return [measure](const ConfusionCounts& c) -> double {
    const double u = c.positives() > 0
                         ? static_cast<double>(c.tp) / c.positives()
                         : 1.0;
    const double v = c.negatives() > 0
                         ? static_cast<double>(c.tn) / c.negatives()
                         : 1.0;
    return std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ConcaveLink>) {
            return 1.0 - link_value(m, u, v);
          } else if constexpr (std::is_same_v<T, PseudolinearCoeffs>) {
            return 1.0 - pseudolinear_value(m, u, v);
          } else {
            const double n = std::max<double>(1, c.total());
            const double p_true = static_cast<double>(c.positives()) / n;
            const double p_est = static_cast<double>(c.tp + c.fp) / n;
            return kld({p_true, 1.0 - p_true}, {p_est, 1.0 - p_est},
                       m.epsilon_log);
          }
        },
        measure);
  };
}

DispatchResult dispatch(const ExperimentConfig& config, const LoadedData& data,
                        const MeasureSpec& measure) {
  TrainConfig tc = config.train;
  tc.seed = mix_seed(config.seed, 3);
  DispatchResult out;
  switch (config.algo) {
    case AlgoId::dspade: {
      auto res = dspade_train(data.train, data.test,
                              make_net(config, data.train.dim(), 1, 4),
                              std::get<ConcaveLink>(measure), tc);
      out.trace = std::move(res.trace);
      out.final_train_metric = eval_metric(measure, res.model, data.train);
      out.final_test_metric = eval_metric(measure, res.model, data.test);
      break;
    }
    case AlgoId::dnemsis: {
      auto res = dnemsis_train(data.train, data.test,
                               make_net(config, data.train.dim(), 1, 4),
                               std::get<NestedMeasure>(measure), tc);
      out.trace = std::move(res.trace);
      out.final_train_metric = eval_metric(measure, res.model, data.train);
      out.final_test_metric = eval_metric(measure, res.model, data.test);
      break;
    }
    case AlgoId::damp: {
      NetworkConfig lower = make_net(config, data.train.dim(), config.d_int, 4);
      NetworkConfig upper;
      upper.input_dim = config.d_int;
      upper.layer_sizes = config.upper_hidden;
      upper.layer_sizes.push_back(1);
      upper.hidden_activation = config.activation;
      upper.init_scale = config.init_scale;
      upper.init_seed = mix_seed(config.seed, 6);
      auto res = damp_train(data.train, data.test, lower, upper,
                            std::get<PseudolinearCoeffs>(measure), tc);
      out.trace = std::move(res.trace);
      out.final_train_metric = eval_metric(measure, res.split, data.train);
      out.final_test_metric = eval_metric(measure, res.split, data.test);
      break;
    }
    case AlgoId::ce: {
      auto res = ce_train(data.train, data.test,
                          make_net(config, data.train.dim(), 1, 4), tc,
                          measure);
      out.trace = std::move(res.trace);
      out.final_train_metric = eval_metric(measure, res.model, data.train);
      out.final_test_metric = eval_metric(measure, res.model, data.test);
      break;
    }
    case AlgoId::plugin: {
      auto parts = split(data.train, 1.0 - config.plugin_val_fraction,
                         mix_seed(config.seed, 5), /*stratified=*/true);
      auto res = ce_train(parts.first, data.test,
                          make_net(config, data.train.dim(), 1, 4), tc,
                          measure);
      out.trace = std::move(res.trace);
      const double threshold =
          res.trace.aborted ? 0.0 : plugin_tune(res.model, parts.second,
                                                measure);
      out.tuned_threshold = threshold;
      out.final_train_metric =
          eval_metric(measure, res.model, data.train, threshold);
      out.final_test_metric =
          eval_metric(measure, res.model, data.test, threshold);
      break;
    }
    case AlgoId::structann: {
      auto res = struct_ann_train(data.train, data.test,
                                  make_net(config, data.train.dim(), 1, 4),
                                  delta_from_measure(measure), measure,
                                  tc);
      out.trace = std::move(res.trace);
      out.final_train_metric = eval_metric(measure, res.model, data.train);
      out.final_test_metric = eval_metric(measure, res.model, data.test);
      break;
    }
  }
  return out;
}

json summarize(const ExperimentConfig& config, const LoadedData& data,
               const MeasureSpec& measure, const DispatchResult& result) {
  const auto& trace = result.trace;
  const bool loss = metric_is_loss(measure);
  double best = loss ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
  long best_iter = 0;
  double wall_total = 0.0;
  for (const auto& rec : trace.records) {
    wall_total = std::max(wall_total, rec.wall_ms);
    const bool better = loss ? rec.test_metric < best : rec.test_metric > best;
    if (better) {
      best = rec.test_metric;
      best_iter = rec.iter;
    }
  }
  const auto stability = stability_report(trace, config.stability_epsilon);

  json s;
  s["schema_version"] = 1;
  s["artifact_version"] = kVersion;
  s["algorithm"] = to_string(config.algo);
  s["measure"] = to_string(config.measure);
  s["metric_direction"] = loss ? "min" : "max";
  s["seed"] = config.seed;
  s["dataset"] = {{"name", data.train.name},
                  {"train_n", data.train.n()},
                  {"test_n", data.test.n()},
                  {"dim", data.train.dim()},
                  {"train_positive_fraction", data.train.positive_fraction()}};
  s["config"] = {{"eta", config.train.eta},
                 {"batch", config.train.batch},
                 {"iters", config.train.iters},
                 {"inner_iters", config.train.inner_iters},
                 {"stepper", config.train.stepper == StepKind::adam ? "adam"
                                                                    : "sgd"},
                 {"dual_reward",
                  config.train.dual_reward == RewardKind::zero_one
                      ? "zero_one"
                      : "sigmoid"},
                 {"eval_every", config.train.eval_every},
                 {"stratified_batches", config.train.stratified_batches},
                 {"pretrain_epochs", config.train.pretrain_epochs},
                 {"struct_c", config.train.struct_c},
                 {"hidden", config.hidden},
                 {"d_int", config.d_int},
                 {"fbeta_beta", config.fbeta_beta},
                 {"split_fraction", config.split_fraction},
                 {"normalize", config.do_normalize}};
  s["final_train_metric"] = result.final_train_metric;
  s["final_test_metric"] = result.final_test_metric;
  s["best_test_metric"] = trace.records.empty() ? result.final_test_metric
                                                : best;
  s["best_test_iter"] = best_iter;
  s["samples_consumed"] = trace.samples_consumed;
  s["wall_ms_total"] = wall_total;
  s["stability_epsilon"] = config.stability_epsilon;
  if (stability.first_stable_iter) {
    s["first_stable_iter"] = *stability.first_stable_iter;
  } else {
    s["first_stable_iter"] = nullptr;
  }
  s["skipped_dual_updates"] = trace.skipped_dual_updates;
  s["floored_events"] = trace.floored_events;
  s["level_clamps"] = trace.level_clamps;
  s["aborted"] = trace.aborted;
  if (trace.aborted) s["abort_reason"] = trace.abort_reason;
  if (result.tuned_threshold) s["tuned_threshold"] = *result.tuned_threshold;
  return s;
}

std::vector<PlotSeries> trace_series(const ExperimentConfig& config,
                                     const TrainTrace& trace) {
  const bool by_samples = config.x_axis == "samples";
  PlotSeries test{"test", {}, {}}, train{"train", {}, {}};
  for (const auto& rec : trace.records) {
    const double x =
        by_samples ? static_cast<double>(rec.samples) : rec.iter;
    test.x.push_back(x);
    test.y.push_back(rec.test_metric);
    train.x.push_back(x);
    train.y.push_back(rec.train_metric);
  }
  return {test, train};
}

}  // namespace

RunOutcome run(const ExperimentConfig& config) {
  check_compatibility(config);
  const LoadedData data = load_data(config);
  const MeasureSpec measure = build_measure(config, data.train);
  DispatchResult result = dispatch(config, data, measure);

  RunOutcome out;
  out.summary = summarize(config, data, measure, result);
  out.trace = std::move(result.trace);
  out.final_test_metric = result.final_test_metric;
  out.tuned_threshold = result.tuned_threshold;

  const fs::path dir = config.out_dir;
  out.trace_csv = dir / "trace.csv";
  out.summary_json = dir / "summary.json";
  out.plot_svg = dir / "plot.svg";
  write_atomic(out.trace_csv, trace_to_csv(out.trace));
  write_atomic(out.summary_json, out.summary.dump(2) + "\n");
  const std::string title = to_string(config.algo) + " / " +
                            to_string(config.measure) + " on " +
                            data.train.name;
  const std::string x_label =
      config.x_axis == "samples" ? "samples consumed" : "minibatch iterations";
  write_atomic(out.plot_svg,
               render_line_plot(title, x_label, to_string(config.measure),
                                trace_series(config, out.trace)));
  out.exit_code = out.trace.aborted ? 3 : 0;
  return out;
}

namespace {

std::string dataset_signature(const ExperimentConfig& c) {
  std::ostringstream sig;
  sig << c.data_path << '|' << c.test_data_path << '|' << c.synth.n << ','
      << c.synth.d << ',' << c.synth.p << ',' << c.synth.delta_mu << ','
      << c.synth.sigma_pos << ',' << c.synth.sigma_neg << '|'
      << c.split_fraction << ',' << c.stratified_split << ',' << c.do_normalize
      << '|' << c.seed;
  return sig.str();
}

}  // namespace

CompareOutcome compare(const std::vector<ExperimentConfig>& configs,
                       const std::string& out_dir) {
  if (configs.empty()) throw UsageError("compare: no configurations given");
  const std::string signature = dataset_signature(configs.front());
  const long cadence = configs.front().train.eval_every;
  for (const auto& c : configs) {
    if (dataset_signature(c) != signature) {
      throw UsageError("compare: configurations must share the dataset");
    }
    if (c.train.eval_every != cadence) {
      throw UsageError("compare: configurations must share the eval cadence");
    }
  }

  CompareOutcome out;
  std::vector<PlotSeries> series;
  for (const auto& base : configs) {
    ExperimentConfig c = base;
    c.out_dir = (fs::path(out_dir) / c.effective_label()).string();
    out.runs.push_back(run(c));
    PlotSeries s{c.effective_label(), {}, {}};
    const bool by_samples = c.x_axis == "samples";
    for (const auto& rec : out.runs.back().trace.records) {
      s.x.push_back(by_samples ? static_cast<double>(rec.samples) : rec.iter);
      s.y.push_back(rec.test_metric);
    }
    series.push_back(std::move(s));
  }

  // aligned table over the union of recorded iterations
  std::vector<long> iters;
  for (const auto& r : out.runs) {
    for (const auto& rec : r.trace.records) iters.push_back(rec.iter);
  }
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());
  std::ostringstream csv;
  csv << "iter";
  for (const auto& c : configs) csv << ',' << c.effective_label();
  csv << '\n';
  for (long it : iters) {
    csv << it;
    for (const auto& r : out.runs) {
      csv << ',';
      for (const auto& rec : r.trace.records) {
        if (rec.iter == it) {
          csv << fmt_num(rec.test_metric);
          break;
        }
      }
    }
    csv << '\n';
  }

  out.table_csv = fs::path(out_dir) / "compare.csv";
  out.plot_svg = fs::path(out_dir) / "compare.svg";
  write_atomic(out.table_csv, csv.str());
  const std::string measure_name = to_string(configs.front().measure);
  write_atomic(out.plot_svg,
               render_line_plot("algorithm comparison (" + measure_name + ")",
                                configs.front().x_axis == "samples"
                                    ? "samples consumed"
                                    : "minibatch iterations",
                                measure_name, series));
  return out;
}

DriftOutcome drift_study(const ExperimentConfig& config,
                         const std::vector<double>& p_grid) {
  if (config.measure != MeasureId::kld) {
    throw UsageError("drift study requires measure = kld");
  }
  if (p_grid.empty()) throw UsageError("drift study: empty prior grid");
  check_compatibility(config);
  const LoadedData data = load_data(config);
  const MeasureSpec measure = build_measure(config, data.train);

  // train once, score many drifted resamples
  TrainConfig tc = config.train;
  tc.seed = mix_seed(config.seed, 3);
  std::function<Vector(const Matrix&)> scorer;
  switch (config.algo) {
    case AlgoId::dnemsis: {
      auto res = dnemsis_train(data.train, data.test,
                               make_net(config, data.train.dim(), 1, 4),
                               std::get<NestedMeasure>(measure), tc);
      scorer = [model = std::move(res.model)](const Matrix& X) {
        return score_batch(model, X);
      };
      break;
    }
    case AlgoId::ce: {
      auto res = ce_train(data.train, data.test,
                          make_net(config, data.train.dim(), 1, 4), tc,
                          measure);
      scorer = [model = std::move(res.model)](const Matrix& X) {
        return score_batch(model, X);
      };
      break;
    }
    default:
      throw UsageError("drift study supports algo dnemsis or ce");
  }

  DriftOutcome out;
  std::vector<PlotSeries> series(1);
  series[0].label = to_string(config.algo);
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const Dataset drifted = drift_resample(
        data.test, DriftSpec{p_grid[i], mix_seed(config.seed, 1000 + i)});
    const double metric =
        eval_metric_scores(measure, scorer(drifted.X), drifted.y);
    out.rows.emplace_back(p_grid[i], metric);
    series[0].x.push_back(p_grid[i]);
    series[0].y.push_back(metric);
  }

  std::ostringstream csv;
  csv << "p_prime,kld\n";
  for (const auto& [p, v] : out.rows) {
    csv << fmt_num(p) << ',' << fmt_num(v) << '\n';
  }
  out.csv = fs::path(config.out_dir) / "drift.csv";
  out.svg = fs::path(config.out_dir) / "drift.svg";
  write_atomic(out.csv, csv.str());
  write_atomic(out.svg,
               render_line_plot("quantification under prior drift",
                                "test positive fraction p'", "kld", series));
  return out;
}

}  // namespace nondecomp
