#include "iae/kernels.hpp"
#include "iae/nn.hpp"
#include "iae/tape.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace iae;

TEST_CASE("build_autoencoder shapes, init bounds, determinism") {
  nn::AeConfig cfg;
  cfg.ambient_dim = 3;
  cfg.latent_dim = 2;
  cfg.hidden_widths = {8, 5};
  auto [enc, dec] = nn::build_autoencoder(cfg, 42);

  REQUIRE(enc.layers.size() == 3);
  CHECK(enc.input_dim() == 3);
  CHECK(enc.output_dim() == 2);
  CHECK(dec.input_dim() == 2);
  CHECK(dec.output_dim() == 3);
  CHECK(enc.layers[0].out == 8);
  CHECK(dec.layers[0].out == 8);
  CHECK(enc.layers[0].act == nn::Activation::SoftplusBeta);
  CHECK(enc.layers[2].act == nn::Activation::Identity);

  for (const auto& net : {enc, dec})
    for (const auto& layer : net.layers) {
      const double bound = 1.0 / std::sqrt(double(layer.in));
      for (double w : layer.weight) {
        CHECK(w >= -bound);
        CHECK(w <= bound);
      }
      for (double b : layer.bias) CHECK(b == 0.0);
    }

  auto [enc2, dec2] = nn::build_autoencoder(cfg, 42);
  CHECK(enc.layers[0].weight == enc2.layers[0].weight);
  auto [enc3, dec3] = nn::build_autoencoder(cfg, 43);
  CHECK(enc.layers[0].weight != enc3.layers[0].weight);
}

TEST_CASE("config validation") {
  nn::AeConfig bad;
  bad.latent_dim = 3;
  bad.ambient_dim = 3;
  CHECK_THROWS_AS(bad.validate(), nn::ConfigError);
  bad.latent_dim = 2;
  bad.hidden_widths = {};
  CHECK_THROWS_AS(bad.validate(), nn::ConfigError);
}

TEST_CASE("single linear layer forward is x W^T + b") {
  nn::MlpParams p;
  p.layers.push_back({2, 3, nn::Activation::Identity,
                      {1, 2, 3, 4, 5, 6},  // W is 3x2 row-major
                      {10, 20, 30}});
  const std::vector<double> x{1, 1, 2, -1};  // 2 rows
  auto y = nn::forward_eval(p, x, 2);
  REQUIRE(y.size() == 6);
  // row 0: [1+2, 3+4, 5+6] + b
  CHECK(y[0] == 13);
  CHECK(y[1] == 27);
  CHECK(y[2] == 41);
  // row 1: [2-2, 6-4, 10-6] + b
  CHECK(y[3] == 10);
  CHECK(y[4] == 22);
  CHECK(y[5] == 34);
}

TEST_CASE("taped forward equals forward_eval bit-for-bit") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {6, 4};
  auto [enc, dec] = nn::build_autoencoder(cfg, 9);
  const int n = 5;
  std::vector<double> x;
  Rng rng(3, Stream::Diagnostics);
  for (int i = 0; i < n * 3; ++i) x.push_back(rng.normal());

  auto plain = nn::forward_eval(enc, x, n);
  ad::Tape t;
  nn::MlpLeaves leaves = nn::make_leaves(t, enc);
  ad::Value out = nn::forward(t, leaves, t.leaf({n, 3}, x));
  CHECK(out.data() == plain);
}

TEST_CASE("as_fn jacobian matches finite differences") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {5};
  auto [enc, dec] = nn::build_autoencoder(cfg, 17);
  ad::Tape t;
  nn::MlpLeaves leaves = nn::make_leaves(t, dec);
  const std::vector<double> z{0.3, -0.2};
  auto J = ad::explicit_jacobian(t, nn::as_fn(leaves), z, 2);
  REQUIRE(J.size() == 6);

  const double h = 1e-6;
  for (int col = 0; col < 2; ++col) {
    std::vector<double> zp = z, zm = z;
    zp[col] += h;
    zm[col] -= h;
    auto fp = nn::forward_eval(dec, zp, 1);
    auto fm = nn::forward_eval(dec, zm, 1);
    for (int row = 0; row < 3; ++row)
      CHECK(J[std::size_t(row) * 2 + col] ==
            doctest::Approx((fp[row] - fm[row]) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("tied decoder uses transposed encoder weights") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {4};
  auto [enc, dec] = nn::build_autoencoder(cfg, 5);
  ad::Tape t;
  nn::TiedLeaves tied = nn::make_tied_leaves(t, enc, dec);

  const std::vector<double> z{0.4, 0.1};
  ad::Value out = nn::forward_tied_decoder(t, tied, t.leaf({1, 2}, z));

  // reference: run an untied decoder whose weights are the encoder's
  // transposed, with the tied decoder's biases
  nn::MlpParams ref = dec;
  for (std::size_t k = 0; k < ref.layers.size(); ++k) {
    const auto& el = enc.layers[enc.layers.size() - 1 - k];
    auto& rl = ref.layers[k];
    REQUIRE(rl.in == el.out);
    REQUIRE(rl.out == el.in);
    for (int i = 0; i < rl.out; ++i)
      for (int j = 0; j < rl.in; ++j)
        rl.weight[std::size_t(i) * rl.in + j] = el.weight[std::size_t(j) * el.in + i];
  }
  auto want = nn::forward_eval(ref, z, 1);
  for (int i = 0; i < 3; ++i)
    CHECK(out.data()[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("tied leaves reject non-mirror architectures") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {4};
  auto [enc, dec] = nn::build_autoencoder(cfg, 5);
  nn::AeConfig other = cfg;
  other.hidden_widths = {6};
  auto [enc2, dec2] = nn::build_autoencoder(other, 5);
  ad::Tape t;
  CHECK_THROWS_AS(nn::make_tied_leaves(t, enc, dec2), nn::ConfigError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {7, 3};
  auto [enc, dec] = nn::build_autoencoder(cfg, 1234);
  // make values non-trivial
  enc.layers[0].weight[0] = 1.0 / 3.0;
  dec.layers[1].bias[0] = -0.1234567890123456789;

  const std::string path = (std::filesystem::temp_directory_path() / "iae_ckpt_test.json").string();
  nn::save_checkpoint(enc, dec, path);
  auto [enc2, dec2] = nn::load_checkpoint(path);
  REQUIRE(enc2.layers.size() == enc.layers.size());
  for (std::size_t i = 0; i < enc.layers.size(); ++i) {
    CHECK(enc2.layers[i].weight == enc.layers[i].weight);
    CHECK(enc2.layers[i].bias == enc.layers[i].bias);
  }
  for (std::size_t i = 0; i < dec.layers.size(); ++i)
    CHECK(dec2.layers[i].weight == dec.layers[i].weight);
  CHECK(enc2.beta == enc.beta);
  std::filesystem::remove(path);
}

TEST_CASE("param_slots covers every parameter exactly once") {
  nn::AeConfig cfg;
  cfg.hidden_widths = {4, 4};
  auto [enc, dec] = nn::build_autoencoder(cfg, 2);
  auto slots = nn::param_slots(enc);
  auto sizes = nn::param_sizes(enc);
  REQUIRE(slots.size() == sizes.size());
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  CHECK(total == enc.param_count());
}
