#include "iae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iae::data {

double Dataset::diameter() const {
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double d = points[std::size_t(i) * dim + k] - points[std::size_t(j) * dim + k];
        s += d * d;
      }
      best = std::max(best, s);
    }
  return std::sqrt(best);
}

double swiss_roll_arclength(double t0, double t) {
  auto F = [](double x) { return 0.5 * (x * std::sqrt(1.0 + x * x) + std::asinh(x)); };
  return F(t) - F(t0);
}

Dataset gen_swiss_roll(int n, Rng& rng, bool area_uniform) {
  if (n < 1) throw std::invalid_argument("gen_swiss_roll: n must be >= 1");
  const double t_lo = 1.5 * M_PI, t_hi = 4.5 * M_PI;
  Dataset ds;
  ds.n = n;
  ds.dim = 3;
  ds.intrinsic_dim = 2;
  ds.name = "swiss_roll";
  ds.generator_params = std::string("t=[1.5pi,4.5pi];h=[0,10];sampling=") +
                        (area_uniform ? "area_uniform" : "parameter_uniform");
  ds.points.resize(std::size_t(n) * 3);
  ds.intrinsic_coords.resize(std::size_t(n) * 2);
  const double s_total = swiss_roll_arclength(t_lo, t_hi);
  for (int i = 0; i < n; ++i) {
    double t;
    if (area_uniform) {
      // s uniform along the spine, inverted by Newton iteration
      const double s = rng.uniform(0.0, s_total);
      t = t_lo + s / std::sqrt(1.0 + t_lo * t_lo);
      for (int it = 0; it < 50; ++it) {
        const double f = swiss_roll_arclength(t_lo, t) - s;
        t -= f / std::sqrt(1.0 + t * t);
        t = std::clamp(t, t_lo, t_hi);
        if (std::abs(f) < 1e-12) break;
      }
    } else {
      t = rng.uniform(t_lo, t_hi);
    }
    const double h = rng.uniform(0.0, 10.0);
    ds.points[std::size_t(i) * 3 + 0] = t * std::cos(t);
    ds.points[std::size_t(i) * 3 + 1] = h;
    ds.points[std::size_t(i) * 3 + 2] = t * std::sin(t);
    ds.intrinsic_coords[std::size_t(i) * 2 + 0] = swiss_roll_arclength(t_lo, t);
    ds.intrinsic_coords[std::size_t(i) * 2 + 1] = h;
  }
  return ds;
}

Dataset gen_s_shape(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_s_shape: n must be >= 1");
  Dataset ds;
  ds.n = n;
  ds.dim = 3;
  ds.intrinsic_dim = 2;
  ds.name = "s_shape";
  ds.generator_params = "t=[-1.5pi,1.5pi];h=[0,2];sampling=parameter_uniform";
  ds.points.resize(std::size_t(n) * 3);
  ds.intrinsic_coords.resize(std::size_t(n) * 2);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(-1.5 * M_PI, 1.5 * M_PI);
    const double h = rng.uniform(0.0, 2.0);
    const double sgn = t >= 0 ? 1.0 : -1.0;
    ds.points[std::size_t(i) * 3 + 0] = std::sin(t);
    ds.points[std::size_t(i) * 3 + 1] = h;
    ds.points[std::size_t(i) * 3 + 2] = sgn * (std::cos(t) - 1.0);
    ds.intrinsic_coords[std::size_t(i) * 2 + 0] = t;
    ds.intrinsic_coords[std::size_t(i) * 2 + 1] = h;
  }
  return ds;
}

Dataset gen_open_sphere(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_open_sphere: n must be >= 1");
  const double theta_max = 2.0 * M_PI / 3.0;
  Dataset ds;
  ds.n = n;
  ds.dim = 3;
  ds.intrinsic_dim = 0;
  ds.name = "open_sphere";
  ds.generator_params = "theta_max=2pi/3;sampling=area_uniform";
  ds.points.resize(std::size_t(n) * 3);
  const double c_min = std::cos(theta_max);
  for (int i = 0; i < n; ++i) {
    const double c = rng.uniform(c_min, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    ds.points[std::size_t(i) * 3 + 0] = s * std::cos(phi);
    ds.points[std::size_t(i) * 3 + 1] = s * std::sin(phi);
    ds.points[std::size_t(i) * 3 + 2] = c;
  }
  return ds;
}

double scale_to_unit_box(Dataset& ds) {
  if (ds.n < 1) throw std::invalid_argument("scale_to_unit_box: empty dataset");
  double side = 0.0;
  for (int j = 0; j < ds.dim; ++j) {
    double lo = ds.points[j], hi = ds.points[j];
    for (int i = 1; i < ds.n; ++i) {
      const double v = ds.points[std::size_t(i) * ds.dim + j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    side = std::max(side, hi - lo);
  }
  const double factor = side > 0.0 ? 1.0 / side : 1.0;
  for (double& v : ds.points) v *= factor;
  for (double& v : ds.intrinsic_coords) v *= factor;
  std::ostringstream os;
  os << ds.generator_params << ";unit_scale=" << factor;
  ds.generator_params = os.str();
  return factor;
}

Dataset generate(const std::string& name, int n, std::uint64_t seed, bool area_uniform) {
  Rng rng(seed, Stream::Init);
  if (name == "swiss_roll" || name == "swissroll") return gen_swiss_roll(n, rng, area_uniform);
  if (name == "s_shape" || name == "sshape") return gen_s_shape(n, rng);
  if (name == "open_sphere" || name == "opensphere") return gen_open_sphere(n, rng);
  throw std::invalid_argument("unknown dataset: " + name);
}

void save_csv(const std::vector<double>& matrix, int n, int dim,
              const std::string& path, bool header,
              const std::vector<std::string>& column_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  if (header) {
    for (int j = 0; j < dim; ++j) {
      if (j) out << ',';
      out << (j < int(column_names.size()) ? column_names[j] : "c" + std::to_string(j));
    }
    out << '\n';
  }
  char buf[40];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix[std::size_t(i) * dim + j]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

std::vector<double> load_csv(const std::string& path, int* n, int* dim, bool header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read: " + path);
  std::vector<double> values;
  std::string line;
  int cols = -1, rows = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header && lineno == 1) continue;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
      values.push_back(v);
      ++c;
    }
    if (cols < 0) cols = c;
    else if (c != cols)
      throw ParseError(path + ":" + std::to_string(lineno) + ": ragged row (" +
                       std::to_string(c) + " cells, expected " + std::to_string(cols) + ")");
    ++rows;
  }
  if (rows == 0) throw ParseError(path + ": empty file");
  *n = rows;
  *dim = cols;
  return values;
}

Dataset load_dataset_csv(const std::string& path, bool header) {
  Dataset ds;
  ds.points = load_csv(path, &ds.n, &ds.dim, header);
  ds.name = path;
  for (double v : ds.points)
    if (!std::isfinite(v)) throw ParseError(path + ": non-finite value in dataset");
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path, bool header) {
  save_csv(ds.points, ds.n, ds.dim, path, header);
}

} // namespace iae::data
