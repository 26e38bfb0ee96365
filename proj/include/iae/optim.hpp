#pragma once

#include "iae/data.hpp"
#include "iae/losses.hpp"
#include "iae/nn.hpp"
#include "iae/sampling.hpp"

#include <functional>
#include <string>
#include <vector>

namespace iae::optim {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers congruent to one flat parameter array.
struct AdamState {
  std::int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update: p -= lr * m_hat / (sqrt(v_hat) + eps). Throws on
// non-finite gradients.
void adam_step(double* params, const double* grads, std::size_t n,
               AdamState& state, const AdamConfig& cfg);

constexpr int kFullBatch = -1;

struct TrainConfig {
  int epochs = 10000;
  int batch_size = kFullBatch;
  double lr = 0.001;
  loss::LossConfig loss;
  std::uint64_t seed = 0;
  int eval_every = 100;
  std::string checkpoint_path;  // optional; best-by-total snapshot
  sampling::LatentMode latent_mode = sampling::LatentMode::UniformBox;
  int latent_refresh_every = 100;

  void validate() const;
};

struct HistoryRow {
  std::int64_t step = 0;
  loss::LossReport losses;
};

struct TrainResult {
  nn::MlpParams encoder;
  nn::MlpParams decoder;
  std::vector<HistoryRow> history;
  double best_total = 0.0;
  std::int64_t steps = 0;
};

// Runs Adam on the configured objective over the dataset. Deterministic per
// seed. Aborts with TrainError on non-finite loss/gradients; the best
// checkpoint written so far is retained.
TrainResult train(const data::Dataset& dataset, const nn::AeConfig& ae_cfg,
                  const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_log = nullptr);

// Post-hoc loss measurement with a fixed diagnostic stream: rec on the full
// dataset plus iso/piso Monte-Carlo estimates at the given sample count.
loss::LossReport measure_losses(const nn::MlpParams& encoder, const nn::MlpParams& decoder,
                                const data::Dataset& dataset, int mc_samples,
                                std::uint64_t seed);

} // namespace iae::optim
