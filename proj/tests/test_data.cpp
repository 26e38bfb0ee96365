#include "iae/data.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

using namespace iae;

namespace {

// Composite-Simpson oracle for the arclength integrand sqrt(1 + t^2).
double simpson_arclength(double a, double b, int steps = 4000) {
  auto f = [](double t) { return std::sqrt(1.0 + t * t); };
  const double h = (b - a) / steps;
  double s = f(a) + f(b);
  for (int i = 1; i < steps; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

} // namespace

TEST_CASE("swiss roll points lie on the roll with parameters in range") {
  constexpr double pi = std::numbers::pi;
  Rng rng(1, Stream::Diagnostics);
  auto ds = data::gen_swiss_roll(500, rng);
  REQUIRE(ds.n == 500);
  REQUIRE(ds.dim == 3);
  REQUIRE(ds.intrinsic_dim == 2);

  for (int i = 0; i < ds.n; ++i) {
    const double x = ds.points[std::size_t(i) * 3 + 0];
    const double y = ds.points[std::size_t(i) * 3 + 1];
    const double z = ds.points[std::size_t(i) * 3 + 2];
    const double t = std::sqrt(x * x + z * z);  // radius equals the angle parameter
    CHECK(t >= 1.5 * pi - 1e-9);
    CHECK(t <= 4.5 * pi + 1e-9);
    CHECK(y >= 0.0);
    CHECK(y <= 10.0);
    // (x, z) = t (cos t, sin t)
    CHECK(x == doctest::Approx(t * std::cos(t)).epsilon(1e-9));
    CHECK(z == doctest::Approx(t * std::sin(t)).epsilon(1e-9));
    // chart: (arclength from 1.5 pi, h)
    CHECK(ds.intrinsic_coords[std::size_t(i) * 2 + 0] ==
          doctest::Approx(data::swiss_roll_arclength(1.5 * pi, t)).epsilon(1e-9));
    CHECK(ds.intrinsic_coords[std::size_t(i) * 2 + 1] == y);
  }
}

TEST_CASE("swiss roll arclength matches Simpson quadrature") {
  constexpr double pi = std::numbers::pi;
  for (double t : {1.5 * pi, 2.0 * pi, 3.3 * pi, 4.5 * pi}) {
    CHECK(data::swiss_roll_arclength(1.5 * pi, t) ==
          doctest::Approx(simpson_arclength(1.5 * pi, t)).epsilon(1e-10));
  }
}

TEST_CASE("area-uniform swiss roll matches the speed-weighted CDF") {
  constexpr double pi = std::numbers::pi;
  Rng rng(7, Stream::Diagnostics);
  auto ds = data::gen_swiss_roll(20000, rng, true);
  // With density proportional to sqrt(1+t^2), the CDF at t is
  // arclength(t0, t) / arclength(t0, t1). Empirical CDF should match.
  const double total = data::swiss_roll_arclength(1.5 * pi, 4.5 * pi);
  for (double q : {2.0 * pi, 3.0 * pi, 4.0 * pi}) {
    const double want = data::swiss_roll_arclength(1.5 * pi, q) / total;
    int count = 0;
    for (int i = 0; i < ds.n; ++i) {
      const double x = ds.points[std::size_t(i) * 3 + 0];
      const double z = ds.points[std::size_t(i) * 3 + 2];
      if (std::sqrt(x * x + z * z) <= q) ++count;
    }
    CHECK(double(count) / ds.n == doctest::Approx(want).epsilon(0.03));
  }
}

TEST_CASE("s-shape is unit speed so its chart is isometric") {
  constexpr double pi = std::numbers::pi;
  Rng rng(2, Stream::Diagnostics);
  auto ds = data::gen_s_shape(300, rng);
  REQUIRE(ds.dim == 3);
  REQUIRE(ds.intrinsic_dim == 2);
  for (int i = 0; i < ds.n; ++i) {
    const double t = ds.intrinsic_coords[std::size_t(i) * 2 + 0];
    const double h = ds.intrinsic_coords[std::size_t(i) * 2 + 1];
    CHECK(t >= -1.5 * pi - 1e-9);
    CHECK(t <= 1.5 * pi + 1e-9);
    CHECK(h >= 0.0);
    CHECK(h <= 2.0);
    const double sgn = t >= 0 ? 1.0 : -1.0;
    CHECK(ds.points[std::size_t(i) * 3 + 0] == doctest::Approx(std::sin(t)).epsilon(1e-9));
    CHECK(ds.points[std::size_t(i) * 3 + 1] == doctest::Approx(h).epsilon(1e-12));
    CHECK(ds.points[std::size_t(i) * 3 + 2] ==
          doctest::Approx(sgn * (std::cos(t) - 1.0)).epsilon(1e-9));
  }
  // |d gamma / dt| = 1 for every t (finite-difference check of the curve)
  for (double t : {-4.0, -1.0, -0.1, 0.1, 2.0, 4.5}) {
    const double hstep = 1e-6;
    auto gx = [](double s) { return std::sin(s); };
    auto gz = [](double s) { return (s >= 0 ? 1.0 : -1.0) * (std::cos(s) - 1.0); };
    const double dx = (gx(t + hstep) - gx(t - hstep)) / (2 * hstep);
    const double dz = (gz(t + hstep) - gz(t - hstep)) / (2 * hstep);
    CHECK(std::sqrt(dx * dx + dz * dz) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("open sphere cap stays on the unit sphere within the cap angle") {
  Rng rng(3, Stream::Diagnostics);
  auto ds = data::gen_open_sphere(400, rng);
  const double min_cos = std::cos(2.0 * std::numbers::pi / 3.0);
  for (int i = 0; i < ds.n; ++i) {
    const double x = ds.points[std::size_t(i) * 3 + 0];
    const double y = ds.points[std::size_t(i) * 3 + 1];
    const double z = ds.points[std::size_t(i) * 3 + 2];
    CHECK(std::sqrt(x * x + y * y + z * z) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z >= min_cos - 1e-12);
  }
}

TEST_CASE("generate dispatches by name and is seed deterministic") {
  auto a = data::generate("swiss_roll", 50, 9);
  auto b = data::generate("swiss_roll", 50, 9);
  CHECK(a.points == b.points);
  auto c = data::generate("s_shape", 50, 9);
  CHECK(c.name == "s_shape");
  CHECK_THROWS(data::generate("nope", 10, 1));
}

TEST_CASE("dataset diameter on a known square") {
  data::Dataset ds;
  ds.n = 4;
  ds.dim = 2;
  ds.points = {0, 0, 1, 0, 0, 1, 1, 1};
  CHECK(ds.diameter() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("csv round trip is bit exact") {
  const std::vector<double> m{1.0 / 3.0, -2.5e-17, 3.14159265358979312, 1e300, -0.0, 7.0};
  const std::string path =
      (std::filesystem::temp_directory_path() / "iae_csv_test.csv").string();
  data::save_csv(m, 3, 2, path);
  int n = 0, dim = 0;
  auto back = data::load_csv(path, &n, &dim);
  CHECK(n == 3);
  CHECK(dim == 2);
  REQUIRE(back.size() == m.size());
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(back[i] == m[i]);
  std::filesystem::remove(path);
}

TEST_CASE("csv loader reports the offending location and strips CR") {
  const auto dir = std::filesystem::temp_directory_path();
  {
    std::ofstream f(dir / "iae_bad.csv");
    f << "1,2\n3,oops\n";
  }
  int n, dim;
  CHECK_THROWS_AS(data::load_csv((dir / "iae_bad.csv").string(), &n, &dim),
                  data::ParseError);
  try {
    data::load_csv((dir / "iae_bad.csv").string(), &n, &dim);
  } catch (const data::ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);  // line number
  }
  {
    std::ofstream f(dir / "iae_crlf.csv", std::ios::binary);
    f << "1,2\r\n3,4\r\n";
  }
  auto v = data::load_csv((dir / "iae_crlf.csv").string(), &n, &dim);
  CHECK(v == std::vector<double>{1, 2, 3, 4});
  {
    std::ofstream f(dir / "iae_ragged.csv");
    f << "1,2\n3\n";
  }
  CHECK_THROWS_AS(data::load_csv((dir / "iae_ragged.csv").string(), &n, &dim),
                  data::ParseError);
  std::filesystem::remove(dir / "iae_bad.csv");
  std::filesystem::remove(dir / "iae_crlf.csv");
  std::filesystem::remove(dir / "iae_ragged.csv");
}

TEST_CASE("dataset csv rejects non-finite values") {
  const auto dir = std::filesystem::temp_directory_path();
  {
    std::ofstream f(dir / "iae_inf.csv");
    f << "1,2,3\ninf,5,6\n";
  }
  CHECK_THROWS_AS(data::load_dataset_csv((dir / "iae_inf.csv").string()),
                  data::ParseError);
  std::filesystem::remove(dir / "iae_inf.csv");
}

TEST_CASE("unit-box scaling is a single factor shared with the chart") {
  auto ds = data::generate("swiss_roll", 200, 5);
  auto orig = ds;
  const double factor = data::scale_to_unit_box(ds);

  // longest bbox side becomes exactly 1
  double side = 0.0;
  for (int j = 0; j < ds.dim; ++j) {
    double lo = ds.points[j], hi = ds.points[j];
    for (int i = 1; i < ds.n; ++i) {
      lo = std::min(lo, ds.points[std::size_t(i) * 3 + j]);
      hi = std::max(hi, ds.points[std::size_t(i) * 3 + j]);
    }
    side = std::max(side, hi - lo);
  }
  CHECK(side == doctest::Approx(1.0).epsilon(1e-12));

  // every coordinate (ambient and intrinsic) scaled by the same factor
  for (std::size_t i = 0; i < ds.points.size(); ++i)
    CHECK(ds.points[i] == doctest::Approx(orig.points[i] * factor).epsilon(1e-12));
  for (std::size_t i = 0; i < ds.intrinsic_coords.size(); ++i)
    CHECK(ds.intrinsic_coords[i] ==
          doctest::Approx(orig.intrinsic_coords[i] * factor).epsilon(1e-12));
  CHECK(ds.diameter() == doctest::Approx(orig.diameter() * factor).epsilon(1e-12));
  CHECK(ds.generator_params.find("unit_scale=") != std::string::npos);
}
