#include "iae/runner.hpp"

#include "iae/sampling.hpp"
#include "iae/svg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace iae::run {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: bad numeric value '" + v + "' for key " + key);
  return x;
}

long long parse_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: bad integer value '" + v + "' for key " + key);
  return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean value '" + v + "' for key " + key);
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(int(parse_int(trim(cell), key)));
  return out;
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

} // namespace

std::string version_string() { return "iso-ae 0.1.0"; }

std::uint64_t version_hash() {
  // FNV-1a over the version string
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : version_string()) {
    h ^= std::uint8_t(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::to_ini() const {
  std::ostringstream os;
  os << "[dataset]\n";
  os << "name = " << dataset.name << "\n";
  os << "path = " << dataset.path << "\n";
  os << "n = " << dataset.n << "\n";
  os << "seed = " << dataset.seed << "\n";
  os << "area_uniform = " << (dataset.area_uniform ? "true" : "false") << "\n";
  os << "header = " << (dataset.header ? "true" : "false") << "\n";
  os << "unit_scale = " << (dataset.unit_scale ? "true" : "false") << "\n";
  os << "\n[ae]\n";
  os << "latent_dim = " << ae.latent_dim << "\n";
  os << "hidden = ";
  for (std::size_t i = 0; i < ae.hidden_widths.size(); ++i)
    os << (i ? "," : "") << ae.hidden_widths[i];
  os << "\n";
  os << "beta = " << fmt_double(ae.activation_beta) << "\n";
  os << "\n[loss]\n";
  os << "regularizer = " << loss::to_string(train.loss.regularizer) << "\n";
  os << "lambda_rec = " << fmt_double(train.loss.lambda_rec) << "\n";
  os << "lambda_iso = " << fmt_double(train.loss.lambda_iso) << "\n";
  os << "lambda_piso = " << fmt_double(train.loss.lambda_piso) << "\n";
  os << "dae_sigma = " << fmt_double(train.loss.dae_sigma) << "\n";
  os << "mc_samples = " << train.loss.mc_samples << "\n";
  os << "\n[train]\n";
  os << "epochs = " << train.epochs << "\n";
  os << "batch_size = "
     << (train.batch_size == optim::kFullBatch ? std::string("full")
                                               : std::to_string(train.batch_size))
     << "\n";
  os << "lr = " << fmt_double(train.lr) << "\n";
  os << "seed = " << train.seed << "\n";
  os << "eval_every = " << train.eval_every << "\n";
  os << "latent_mode = "
     << (train.latent_mode == sampling::LatentMode::UniformBox ? "uniform_box" : "gaussian")
     << "\n";
  os << "latent_refresh_every = " << train.latent_refresh_every << "\n";
  os << "\n[eval]\n";
  os << "grid_k = " << eval.grid_k << "\n";
  os << "jacobian_samples = " << eval.jacobian_samples << "\n";
  os << "mc_samples = " << eval.mc_samples << "\n";
  os << "seed = " << eval.seed << "\n";
  return os.str();
}

void RunConfig::apply_override(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw ConfigError("config: override key must be section.key, got " + dotted_key);
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  const std::string full = dotted_key;

  if (section == "dataset") {
    if (key == "name") dataset.name = value;
    else if (key == "path") dataset.path = value;
    else if (key == "n") dataset.n = int(parse_int(value, full));
    else if (key == "seed") dataset.seed = std::uint64_t(parse_int(value, full));
    else if (key == "area_uniform") dataset.area_uniform = parse_bool(value, full);
    else if (key == "header") dataset.header = parse_bool(value, full);
    else if (key == "unit_scale") dataset.unit_scale = parse_bool(value, full);
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "ae") {
    if (key == "latent_dim") ae.latent_dim = int(parse_int(value, full));
    else if (key == "hidden") ae.hidden_widths = parse_int_list(value, full);
    else if (key == "beta") ae.activation_beta = parse_double(value, full);
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "loss") {
    if (key == "regularizer") train.loss.regularizer = loss::regularizer_from_string(value);
    else if (key == "lambda_rec") train.loss.lambda_rec = parse_double(value, full);
    else if (key == "lambda_iso") train.loss.lambda_iso = parse_double(value, full);
    else if (key == "lambda_piso") train.loss.lambda_piso = parse_double(value, full);
    else if (key == "dae_sigma") train.loss.dae_sigma = parse_double(value, full);
    else if (key == "mc_samples") train.loss.mc_samples = int(parse_int(value, full));
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "train") {
    if (key == "epochs") train.epochs = int(parse_int(value, full));
    else if (key == "batch_size")
      train.batch_size = (value == "full" || value == "FULL")
                             ? optim::kFullBatch
                             : int(parse_int(value, full));
    else if (key == "lr") train.lr = parse_double(value, full);
    else if (key == "seed") train.seed = std::uint64_t(parse_int(value, full));
    else if (key == "eval_every") train.eval_every = int(parse_int(value, full));
    else if (key == "latent_mode") {
      if (value == "uniform_box") train.latent_mode = sampling::LatentMode::UniformBox;
      else if (value == "gaussian") train.latent_mode = sampling::LatentMode::GaussianFit;
      else throw ConfigError("config: bad latent_mode '" + value + "'");
    } else if (key == "latent_refresh_every")
      train.latent_refresh_every = int(parse_int(value, full));
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "eval") {
    if (key == "grid_k") eval.grid_k = int(parse_int(value, full));
    else if (key == "jacobian_samples") eval.jacobian_samples = int(parse_int(value, full));
    else if (key == "mc_samples") eval.mc_samples = int(parse_int(value, full));
    else if (key == "seed") eval.seed = std::uint64_t(parse_int(value, full));
    else throw ConfigError("config: unknown key '" + full + "'");
  } else {
    throw ConfigError("config: unknown section '" + section + "'");
  }
}

RunConfig RunConfig::from_ini(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
    if (value.empty() && key == "path") continue;  // empty path means generator
    cfg.apply_override(section + "." + key, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j = json::parse(text);
    return from_ini(j.at("config_ini").get<std::string>());
  }
  return from_ini(text);
}

data::Dataset load_or_generate(const DatasetConfig& cfg) {
  data::Dataset ds = cfg.path.empty()
                         ? data::generate(cfg.name, cfg.n, cfg.seed, cfg.area_uniform)
                         : data::load_dataset_csv(cfg.path, cfg.header);
  if (cfg.unit_scale) data::scale_to_unit_box(ds);
  return ds;
}

std::string default_out_root() {
  const char* env = std::getenv("IAE_OUT_ROOT");
  return env && *env ? env : "runs";
}

namespace {

void write_history_csv(const std::vector<optim::HistoryRow>& history,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "step,rec,iso,piso,reg,total\n";
  for (const auto& row : history) {
    out << row.step << ',' << fmt_double(row.losses.rec) << ','
        << fmt_double(row.losses.iso) << ',' << fmt_double(row.losses.piso) << ','
        << fmt_double(row.losses.reg) << ',' << fmt_double(row.losses.total) << '\n';
  }
}

void write_final_losses_csv(const loss::LossReport& rep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "rec,iso,piso\n"
      << fmt_double(rep.rec) << ',' << fmt_double(rep.iso) << ','
      << fmt_double(rep.piso) << '\n';
}

void write_embeddings_csv(const nn::MlpParams& encoder, const data::Dataset& ds,
                          const std::string& path) {
  const int d = encoder.output_dim();
  std::vector<double> codes = nn::forward_eval(encoder, ds.points, ds.n);
  const int extra = ds.intrinsic_dim;
  std::vector<double> table(std::size_t(ds.n) * (d + extra));
  for (int i = 0; i < ds.n; ++i) {
    for (int j = 0; j < d; ++j)
      table[std::size_t(i) * (d + extra) + j] = codes[std::size_t(i) * d + j];
    for (int j = 0; j < extra; ++j)
      table[std::size_t(i) * (d + extra) + d + j] =
          ds.intrinsic_coords[std::size_t(i) * extra + j];
  }
  data::save_csv(table, ds.n, d + extra, path);
}

} // namespace

RunOutputs cmd_train(const RunConfig& cfg, const std::string& run_dir) {
  RunOutputs out;
  out.dir = run_dir;

  // Resolve inputs before touching the filesystem so a bad config leaves
  // no partial outputs behind.
  data::Dataset ds = load_or_generate(cfg.dataset);
  nn::AeConfig ae = cfg.ae;
  ae.ambient_dim = ds.dim;
  ae.validate();
  optim::TrainConfig tc = cfg.train;
  tc.validate();

  fs::create_directories(run_dir);
  const std::string config_ini = cfg.to_ini();
  {
    std::ofstream c(run_dir + "/config.ini", std::ios::binary);
    c << config_ini;
  }
  json manifest{{"format", "iae-manifest-v1"},
                {"version", version_string()},
                {"version_hash", version_hash()},
                {"config_ini", config_ini},
                {"started_at", now_iso8601()},
                {"status", "running"}};
  {
    std::ofstream m(run_dir + "/manifest.json");
    m << manifest.dump(2);
  }

  // step-0 snapshot (shared-initialization checks hash this file)
  {
    auto [enc0, dec0] = nn::build_autoencoder(ae, tc.seed);
    nn::save_checkpoint(enc0, dec0, run_dir + "/init_checkpoint.json");
  }

  tc.checkpoint_path = run_dir + "/checkpoint.json";
  std::string error;
  optim::TrainResult result;
  try {
    result = optim::train(ds, ae, tc);
    out.ok = true;
  } catch (const std::exception& e) {
    error = e.what();
  }

  write_history_csv(result.history, run_dir + "/history.csv");
  if (out.ok) {
    auto [best_enc, best_dec] = nn::load_checkpoint(run_dir + "/checkpoint.json");
    write_embeddings_csv(best_enc, ds, run_dir + "/embeddings.csv");
    out.final_losses = optim::measure_losses(best_enc, best_dec, ds,
                                             cfg.eval.mc_samples, cfg.eval.seed);
    write_final_losses_csv(out.final_losses, run_dir + "/final_losses.csv");
  }

  manifest["finished_at"] = now_iso8601();
  manifest["status"] = out.ok ? "ok" : "failed";
  if (!out.ok) manifest["error"] = error;
  {
    std::ofstream m(run_dir + "/manifest.json");
    m << manifest.dump(2);
  }
  out.error = error;
  if (!out.ok && error.empty()) out.error = "unknown failure";
  return out;
}

void cmd_eval(const std::string& run_dir) {
  const std::string ckpt = run_dir + "/checkpoint.json";
  if (!fs::exists(ckpt))
    throw std::runtime_error("cmd_eval: no checkpoint in " + run_dir);
  RunConfig cfg = RunConfig::load(run_dir + "/manifest.json");
  data::Dataset ds = load_or_generate(cfg.dataset);
  auto [enc, dec] = nn::load_checkpoint(ckpt);

  std::vector<double> codes = nn::forward_eval(enc, ds.points, ds.n);
  std::array<double, 2> lo{}, hi{};
  eval::grid_bbox_from_codes(codes, ds.n, lo, hi);
  eval::GridTriangulation grid = eval::build_grid(lo, hi, cfg.eval.grid_k);
  eval::IsometryReport iso = eval::edge_ratio_std(dec, grid);
  eval::save_isometry_report_csv(iso, run_dir + "/isometry_report.csv");

  const int d = dec.input_dim();
  Rng rng(cfg.eval.seed, Stream::Diagnostics);
  sampling::LatentSampler sampler =
      sampling::fit_latent_sampler(codes, ds.n, d, sampling::LatentMode::UniformBox);
  std::vector<double> zs = sampling::sample_latent(sampler, rng, cfg.eval.jacobian_samples);
  eval::JacobianReport jac = eval::jacobian_diagnostics(enc, dec, zs,
                                                        cfg.eval.jacobian_samples);
  eval::save_jacobian_report_csv(jac, run_dir + "/jacobian_report.csv");

  std::ofstream sum(run_dir + "/eval_summary.txt");
  sum << "run: " << run_dir << "\n";
  sum << "grid: k=" << cfg.eval.grid_k << " over latent-code bbox (5% shrink)\n";
  sum << "edge_ratio_std: " << fmt_double(iso.std_dev) << "\n";
  sum << "median_singular_value: " << fmt_double(jac.median_singular) << "\n";
  sum << "median_ata_dev: " << fmt_double(jac.median_ata_dev) << "\n";
  sum << "median_bbt_dev: " << fmt_double(jac.median_bbt_dev) << "\n";
  sum << "median_b_at_dev: " << fmt_double(jac.median_b_at_dev) << "\n";
}

SweepResult cmd_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                      const std::string& sweep_dir, int jobs) {
  if (lambdas.empty()) throw ConfigError("cmd_sweep: empty lambda grid");
  fs::create_directories(sweep_dir);
  SweepResult result;
  result.lambdas = lambdas;
  result.runs.resize(lambdas.size());

  std::size_t next = 0;
  std::vector<std::thread> workers;
  std::mutex mu;
  const int nworkers = std::max(1, std::min<int>(jobs, int(lambdas.size())));
  for (int w = 0; w < nworkers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= lambdas.size()) return;
          i = next++;
        }
        RunConfig cfg = base;
        cfg.train.loss.lambda_iso = lambdas[i];
        cfg.train.loss.lambda_piso = lambdas[i];
        char name[64];
        std::snprintf(name, sizeof(name), "lambda_%g", lambdas[i]);
        try {
          result.runs[i] = cmd_train(cfg, sweep_dir + "/" + name);
        } catch (const std::exception& e) {
          result.runs[i].dir = sweep_dir + "/" + name;
          result.runs[i].ok = false;
          result.runs[i].error = e.what();
        }
      }
    });
  }
  for (auto& t : workers) t.join();

  std::ofstream agg(sweep_dir + "/sweep.csv", std::ios::binary);
  agg << "lambda_iso,status,rec,iso,piso\n";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& r = result.runs[i];
    agg << fmt_double(lambdas[i]) << ',' << (r.ok ? "ok" : "failed") << ','
        << fmt_double(r.final_losses.rec) << ',' << fmt_double(r.final_losses.iso) << ','
        << fmt_double(r.final_losses.piso) << '\n';
  }
  return result;
}

namespace {

void emit_decoder_surface(const std::string& run_dir, int grid_k) {
  auto [enc, dec] = nn::load_checkpoint(run_dir + "/checkpoint.json");
  RunConfig cfg = RunConfig::load(run_dir + "/manifest.json");
  data::Dataset ds = load_or_generate(cfg.dataset);
  std::vector<double> codes = nn::forward_eval(enc, ds.points, ds.n);
  std::array<double, 2> lo{}, hi{};
  eval::grid_bbox_from_codes(codes, ds.n, lo, hi);
  eval::GridTriangulation grid = eval::build_grid(lo, hi, grid_k);
  const int m = grid_k * grid_k;
  std::vector<double> surface = nn::forward_eval(dec, grid.points, m);
  data::save_csv(surface, m, dec.output_dim(), run_dir + "/decoder_surface.csv");

  // front view (x, z) colored by height for quick visual inspection
  std::vector<double> xy(std::size_t(m) * 2), col(m);
  for (int i = 0; i < m; ++i) {
    xy[std::size_t(i) * 2 + 0] = surface[std::size_t(i) * 3 + 0];
    xy[std::size_t(i) * 2 + 1] = surface[std::size_t(i) * 3 + 2];
    col[i] = surface[std::size_t(i) * 3 + 1];
  }
  svg::PlotOptions opt;
  opt.title = "decoder surface";
  svg::write_file(svg::scatter(xy, m, col, opt), run_dir + "/decoder_surface.svg");

  eval::IsometryReport iso = eval::edge_ratio_std(dec, grid);
  eval::save_isometry_report_csv(iso, run_dir + "/isometry_report.csv");
}

} // namespace

void cmd_ablate_piso(const RunConfig& base, const std::string& out_dir) {
  fs::create_directories(out_dir);
  RunConfig without = base;
  without.train.loss.regularizer = loss::Regularizer::IAE;
  without.train.loss.lambda_piso = 0.0;
  RunConfig with = without;
  with.train.loss.lambda_piso = with.train.loss.lambda_iso;

  RunOutputs r0 = cmd_train(without, out_dir + "/no_piso");
  RunOutputs r1 = cmd_train(with, out_dir + "/with_piso");
  if (!r0.ok || !r1.ok)
    throw std::runtime_error("cmd_ablate_piso: child run failed: " +
                             (r0.ok ? r1.error : r0.error));

  emit_decoder_surface(out_dir + "/no_piso", 40);
  emit_decoder_surface(out_dir + "/with_piso", 40);

  std::ofstream cmp(out_dir + "/comparison.txt");
  cmp << "L_piso without piso term: " << fmt_double(r0.final_losses.piso) << "\n";
  cmp << "L_piso with piso term:    " << fmt_double(r1.final_losses.piso) << "\n";
  cmp << "ratio (without/with):     "
      << fmt_double(r0.final_losses.piso / std::max(r1.final_losses.piso, 1e-300)) << "\n";
}

namespace {

// Reads a CSV, detecting an optional non-numeric header row; returns names.
std::vector<double> load_table(const std::string& path, int* n, int* dim,
                               std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw data::ParseError("cannot read: " + path);
  std::string first;
  if (!std::getline(in, first)) throw data::ParseError(path + ": empty file");
  bool header = false;
  {
    std::stringstream ss(first);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        header = true;
        break;
      }
    }
  }
  if (names) {
    names->clear();
    if (header) {
      std::stringstream ss(first);
      std::string cell;
      while (std::getline(ss, cell, ',')) names->push_back(trim(cell));
    }
  }
  return data::load_csv(path, n, dim, header);
}

} // namespace

void cmd_plot_scatter(const std::string& csv_path, const std::string& svg_path,
                      bool /*header*/) {
  int n = 0, dim = 0;
  std::vector<std::string> names;
  std::vector<double> table = load_table(csv_path, &n, &dim, &names);
  if (dim < 2) throw data::ParseError(csv_path + ": scatter needs >= 2 columns");
  std::vector<double> xy(std::size_t(n) * 2), col;
  for (int i = 0; i < n; ++i) {
    xy[std::size_t(i) * 2 + 0] = table[std::size_t(i) * dim + 0];
    xy[std::size_t(i) * 2 + 1] = table[std::size_t(i) * dim + 1];
  }
  if (dim >= 3) {
    col.resize(n);
    for (int i = 0; i < n; ++i) col[i] = table[std::size_t(i) * dim + 2];
  }
  svg::PlotOptions opt;
  opt.title = fs::path(csv_path).stem().string();
  svg::write_file(svg::scatter(xy, n, col, opt), svg_path);
}

void cmd_plot_lines(const std::string& csv_path, const std::string& svg_path) {
  int n = 0, dim = 0;
  std::vector<std::string> names;
  std::vector<double> table = load_table(csv_path, &n, &dim, &names);
  if (dim < 2) throw data::ParseError(csv_path + ": line plot needs >= 2 columns");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = table[std::size_t(i) * dim + 0];
  std::vector<svg::Series> series;
  for (int j = 1; j < dim; ++j) {
    svg::Series s;
    s.name = j < int(names.size()) ? names[j] : "y" + std::to_string(j);
    // skip non-numeric status-style columns that parsed as 0 across the board
    s.y.resize(n);
    for (int i = 0; i < n; ++i) s.y[i] = table[std::size_t(i) * dim + j];
    series.push_back(std::move(s));
  }
  svg::PlotOptions opt;
  opt.title = fs::path(csv_path).stem().string();
  svg::write_file(svg::line_plot(x, series, opt), svg_path);
}

} // namespace iae::run
