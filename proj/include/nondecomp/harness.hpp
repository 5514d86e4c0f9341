#pragma once

#include "nondecomp/data.hpp"
#include "nondecomp/measures.hpp"
#include "nondecomp/optimizers.hpp"
#include "nondecomp/tomlmini.hpp"
#include "nondecomp/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nondecomp {

enum class AlgoId { dspade, dnemsis, damp, ce, plugin, structann };
enum class MeasureId { min_tpr_tnr, q_mean, fbeta, kld };

AlgoId parse_algo(const std::string& name);
MeasureId parse_measure(const std::string& name);
std::string to_string(AlgoId algo);
std::string to_string(MeasureId measure);
Activation parse_activation(const std::string& name);

struct ExperimentConfig {
  // dataset source: libsvm path, or a synthetic spec when the path is empty
  std::string data_path;
  std::string test_data_path;
  std::optional<long> positive_class;
  std::optional<Index> expected_dim;
  SyntheticSpec synth;
  double split_fraction = 0.8;
  bool stratified_split = true;
  bool do_normalize = true;

  AlgoId algo = AlgoId::dspade;
  MeasureId measure = MeasureId::min_tpr_tnr;
  double fbeta_beta = 1.0;
  std::optional<double> prior_override;  // user-supplied class prior

  std::vector<Index> hidden = {16};
  Activation activation = Activation::relu;
  double init_scale = 1.0;
  Index d_int = 8;                   // stacked interface width
  std::vector<Index> upper_hidden;   // hidden sizes of the upper network

  TrainConfig train;
  std::uint64_t seed = 0;
  bool seed_set = false;  // a seed is mandatory for every run
  double stability_epsilon = 0.05;
  double plugin_val_fraction = 0.25;

  std::string out_dir = "out";
  std::string x_axis = "iters";  // or "samples"
  std::string label;

  std::string effective_label() const {
    return label.empty() ? to_string(algo) : label;
  }
};

ExperimentConfig config_from_toml(const TomlTable& table);

// Throws UsageError on an algorithm/measure mismatch or a missing seed.
void check_compatibility(const ExperimentConfig& config);

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData load_data(const ExperimentConfig& config);

MeasureSpec build_measure(const ExperimentConfig& config,
                          const Dataset& train);

// Fixed trace schema; unused columns stay empty. wall_ms is kept empty in
// files so repeated runs are byte-identical; wall time lives in the summary.
std::string trace_to_csv(const TrainTrace& trace);

bool validate_summary(const nlohmann::json& summary);

struct RunOutcome {
  TrainTrace trace;
  nlohmann::json summary;
  std::filesystem::path trace_csv;
  std::filesystem::path summary_json;
  std::filesystem::path plot_svg;
  double final_test_metric = 0.0;
  std::optional<double> tuned_threshold;  // plug-in runs
  int exit_code = 0;                      // 0 ok; 3 when the run aborted
};

RunOutcome run(const ExperimentConfig& config);

struct CompareOutcome {
  std::vector<RunOutcome> runs;
  std::filesystem::path table_csv;
  std::filesystem::path plot_svg;
};

// All configs must share the dataset signature and the eval cadence.
CompareOutcome compare(const std::vector<ExperimentConfig>& configs,
                       const std::string& out_dir);

struct DriftOutcome {
  std::vector<std::pair<double, double>> rows;  // (p_prime, kld)
  std::filesystem::path csv;
  std::filesystem::path svg;
};

// Trains the configured model once, then evaluates quantification error on
// class-resampled test sets across the prior grid. Requires measure = kld.
DriftOutcome drift_study(const ExperimentConfig& config,
                         const std::vector<double>& p_grid);

}  // namespace nondecomp
