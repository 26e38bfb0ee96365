#pragma once

#include "iae/data.hpp"
#include "iae/eval.hpp"
#include "iae/losses.hpp"
#include "iae/nn.hpp"
#include "iae/optim.hpp"

#include <map>
#include <string>
#include <vector>

namespace iae::run {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset selection: a named generator or a CSV path.
struct DatasetConfig {
  std::string name = "swiss_roll";
  std::string path;  // when set, overrides the generator
  int n = 1000;
  std::uint64_t seed = 1;
  bool area_uniform = false;
  bool header = false;
  bool unit_scale = false;  // rescale the longest bbox side to 1
};

struct EvalConfig {
  int grid_k = 20;
  int jacobian_samples = 100;
  int mc_samples = 1000;
  std::uint64_t seed = 7;
};

// Full resolved settings of one run.
struct RunConfig {
  DatasetConfig dataset;
  nn::AeConfig ae;
  optim::TrainConfig train;
  EvalConfig eval;

  // Flat-sectioned key=value text form (the on-disk config format).
  std::string to_ini() const;
  static RunConfig from_ini(const std::string& text);
  static RunConfig load(const std::string& path);  // .ini/.toml or a manifest.json
  void apply_override(const std::string& dotted_key, const std::string& value);
};

std::string version_string();
std::uint64_t version_hash();

data::Dataset load_or_generate(const DatasetConfig& cfg);

struct RunOutputs {
  std::string dir;
  bool ok = false;
  std::string error;
  loss::LossReport final_losses;  // post-hoc measured
};

// Trains per config and writes manifest.json, config snapshot, history.csv,
// initial + best checkpoints, final embeddings and post-hoc losses.
RunOutputs cmd_train(const RunConfig& cfg, const std::string& run_dir);

// Isometry + Jacobian reports for a finished run directory.
void cmd_eval(const std::string& run_dir);

struct SweepResult {
  std::vector<double> lambdas;
  std::vector<RunOutputs> runs;
};

// One child run per lambda (lambda_iso = lambda_piso = lambda for IAE);
// failures are recorded and the sweep continues. Writes sweep.csv.
SweepResult cmd_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                      const std::string& sweep_dir, int jobs = 1);

// Two runs with shared seeds: lambda_piso = 0 vs lambda_piso = lambda_iso.
// Emits decoder-surface CSV+SVG and isometry reports for both, plus a
// comparison summary.
void cmd_ablate_piso(const RunConfig& base, const std::string& out_dir);

// CSV -> SVG rendering.
void cmd_plot_scatter(const std::string& csv_path, const std::string& svg_path,
                      bool header = false);
void cmd_plot_lines(const std::string& csv_path, const std::string& svg_path);

std::string default_out_root();

} // namespace iae::run
