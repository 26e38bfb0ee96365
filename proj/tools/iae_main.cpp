#include "iae/data.hpp"
#include "iae/kernels.hpp"
#include "iae/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

iae::run::RunConfig make_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  iae::run::RunConfig cfg;
  if (!config_path.empty()) cfg = iae::run::RunConfig::load(config_path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw iae::run::ConfigError("--set expects section.key=value, got " + kv);
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isometric autoencoder training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path, svg_path, dataset_name = "swiss_roll";
  std::vector<std::string> overrides;
  std::vector<double> lambdas;
  int jobs = 1, n_points = 1000;
  std::uint64_t gen_seed = 1;
  bool area_uniform = false, unit_scale = false, serial = false, lines = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "config file (ini or a manifest.json)");
    sub->add_option("-s,--set", overrides, "override, e.g. --set train.lr=0.01");
    sub->add_flag("--serial", serial, "disable the parallel kernels");
  };

  CLI::App* train = app.add_subcommand("train", "train one model into an output dir");
  add_common(train);
  train->add_option("-o,--out", out_dir, "run directory")->required();

  CLI::App* evalc = app.add_subcommand("eval", "isometry + Jacobian reports for a run");
  evalc->add_option("run_dir", out_dir, "finished run directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "train once per lambda value");
  add_common(sweep);
  sweep->add_option("-o,--out", out_dir, "sweep directory")->required();
  sweep->add_option("-l,--lambdas", lambdas, "lambda grid")->required();
  sweep->add_option("-j,--jobs", jobs, "parallel child runs");

  CLI::App* ablate = app.add_subcommand("ablate-piso",
                                        "paired runs with and without the piso term");
  add_common(ablate);
  ablate->add_option("-o,--out", out_dir, "output directory")->required();

  CLI::App* plot = app.add_subcommand("plot", "render a CSV to SVG");
  plot->add_option("csv", csv_path, "input table")->required();
  plot->add_option("svg", svg_path, "output image")->required();
  plot->add_flag("--lines", lines, "line plot (first column is x) instead of scatter");

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset CSV");
  gen->add_option("-o,--out", csv_path, "output CSV")->required();
  gen->add_option("-d,--dataset", dataset_name, "swiss_roll | s_shape | open_sphere");
  gen->add_option("-n", n_points, "point count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_flag("--area-uniform", area_uniform, "area-uniform swiss roll sampling");
  gen->add_flag("--unit-scale", unit_scale, "rescale the longest bbox side to 1");

  CLI11_PARSE(app, argc, argv);

  try {
    iae::kernels::set_parallel(!serial);
    if (*train) {
      iae::run::RunOutputs out = iae::run::cmd_train(make_config(config_path, overrides),
                                                     out_dir);
      if (!out.ok) {
        std::fprintf(stderr, "train failed: %s\n", out.error.c_str());
        return 1;
      }
      std::printf("ok: %s\n", out.dir.c_str());
    } else if (*evalc) {
      iae::run::cmd_eval(out_dir);
      std::printf("ok: %s\n", out_dir.c_str());
    } else if (*sweep) {
      iae::run::SweepResult res = iae::run::cmd_sweep(make_config(config_path, overrides),
                                                      lambdas, out_dir, jobs);
      bool all_ok = true;
      for (const auto& r : res.runs) {
        std::printf("%s: %s\n", r.dir.c_str(), r.ok ? "ok" : r.error.c_str());
        all_ok = all_ok && r.ok;
      }
      return all_ok ? 0 : 1;
    } else if (*ablate) {
      iae::run::cmd_ablate_piso(make_config(config_path, overrides), out_dir);
      std::printf("ok: %s\n", out_dir.c_str());
    } else if (*plot) {
      if (lines)
        iae::run::cmd_plot_lines(csv_path, svg_path);
      else
        iae::run::cmd_plot_scatter(csv_path, svg_path);
      std::printf("ok: %s\n", svg_path.c_str());
    } else if (*gen) {
      iae::data::Dataset ds = iae::data::generate(dataset_name, n_points, gen_seed,
                                                  area_uniform);
      if (unit_scale) iae::data::scale_to_unit_box(ds);
      iae::data::save_dataset_csv(ds, csv_path);
      std::printf("ok: %s (%d x %d)\n", csv_path.c_str(), ds.n, ds.dim);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
