#include "iae/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace iae::optim {

void adam_step(double* params, const double* grads, std::size_t n,
               AdamState& state, const AdamConfig& cfg) {
  state.t += 1;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, double(state.t));
  const double bc2 = 1.0 - std::pow(b2, double(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    if (!std::isfinite(g)) throw TrainError("non-finite gradient in adam_step");
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw nn::ConfigError("TrainConfig: epochs must be >= 1");
  if (lr <= 0) throw nn::ConfigError("TrainConfig: lr must be positive");
  if (batch_size != kFullBatch && batch_size < 1)
    throw nn::ConfigError("TrainConfig: batch_size must be positive or FULL");
  if (eval_every < 1) throw nn::ConfigError("TrainConfig: eval_every must be >= 1");
  if (latent_refresh_every < 1)
    throw nn::ConfigError("TrainConfig: latent_refresh_every must be >= 1");
  loss.validate();
}

namespace {

void sync_tied_decoder(const nn::MlpParams& enc, nn::MlpParams& dec) {
  const std::size_t L = enc.layers.size();
  for (std::size_t k = 0; k < L; ++k) {
    const nn::Layer& el = enc.layers[L - 1 - k];
    nn::Layer& dl = dec.layers[k];
    for (int i = 0; i < dl.out; ++i)
      for (int j = 0; j < dl.in; ++j)
        dl.weight[std::size_t(i) * dl.in + j] = el.weight[std::size_t(j) * el.in + i];
  }
}

} // namespace

TrainResult train(const data::Dataset& dataset, const nn::AeConfig& ae_cfg,
                  const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_log) {
  cfg.validate();
  if (dataset.n < 1) throw TrainError("train: empty dataset");
  if (dataset.dim != ae_cfg.ambient_dim)
    throw TrainError("train: dataset dimension != ambient_dim");

  const bool tied = cfg.loss.regularizer == loss::Regularizer::TCAE;
  auto [enc, dec] = nn::build_autoencoder(ae_cfg, cfg.seed);
  if (tied) sync_tied_decoder(enc, dec);

  Rng sphere_rng(cfg.seed, Stream::Sphere);
  Rng latent_rng(cfg.seed, Stream::Latent);
  Rng shuffle_rng(cfg.seed, Stream::Shuffle);
  Rng noise_rng(cfg.seed, Stream::Noise);

  const int d = ae_cfg.latent_dim;
  sampling::LatentSampler latent_sampler;
  auto refresh_latent = [&] {
    std::vector<double> codes = nn::forward_eval(enc, dataset.points, dataset.n);
    latent_sampler = sampling::fit_latent_sampler(codes, dataset.n, d, cfg.latent_mode);
  };
  refresh_latent();

  // flat parameter slots: encoder (weights+biases), then decoder
  // (biases only under tying, since decoder weights alias the encoder's)
  auto enc_slots = nn::param_slots(enc);
  auto enc_sizes = nn::param_sizes(enc);
  std::vector<double*> dec_slots;
  std::vector<std::size_t> dec_sizes;
  if (tied) {
    for (nn::Layer& l : dec.layers) {
      dec_slots.push_back(l.bias.data());
      dec_sizes.push_back(l.bias.size());
    }
  } else {
    dec_slots = nn::param_slots(dec);
    dec_sizes = nn::param_sizes(dec);
  }

  std::vector<AdamState> states;
  for (std::size_t s : enc_sizes) states.emplace_back(s);
  for (std::size_t s : dec_sizes) states.emplace_back(s);
  AdamConfig adam{cfg.lr};

  const int batch = cfg.batch_size == kFullBatch ? dataset.n
                                                 : std::min(cfg.batch_size, dataset.n);
  const int batches_per_epoch = (dataset.n + batch - 1) / batch;
  std::vector<int> order(dataset.n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_total = std::numeric_limits<double>::infinity();
  nn::MlpParams best_enc = enc, best_dec = dec;

  auto save_best = [&] {
    if (!cfg.checkpoint_path.empty())
      nn::save_checkpoint(best_enc, best_dec, cfg.checkpoint_path);
  };

  std::int64_t step = 0;
  const std::int64_t total_steps = std::int64_t(cfg.epochs) * batches_per_epoch;
  std::vector<double> batch_buf;

  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      if (batch < dataset.n) {
        // Fisher-Yates with the dedicated shuffle stream
        for (int i = dataset.n - 1; i > 0; --i)
          std::swap(order[i], order[std::size_t(shuffle_rng.below(std::uint64_t(i) + 1))]);
      }
      for (int bi = 0; bi < batches_per_epoch; ++bi) {
        const int lo = bi * batch;
        const int hi = std::min(lo + batch, dataset.n);
        const int bn = hi - lo;
        const std::vector<double>* bp = &dataset.points;
        if (bn < dataset.n) {
          batch_buf.resize(std::size_t(bn) * dataset.dim);
          for (int i = 0; i < bn; ++i)
            std::copy_n(dataset.points.data() + std::size_t(order[lo + i]) * dataset.dim,
                        dataset.dim, batch_buf.data() + std::size_t(i) * dataset.dim);
          bp = &batch_buf;
        }

        ad::Tape tape;
        nn::MlpLeaves enc_leaves, dec_leaves;
        nn::TiedLeaves tied_leaves;
        std::vector<ad::Value> leaf_list;
        if (tied) {
          tied_leaves = nn::make_tied_leaves(tape, enc, dec);
          enc_leaves = tied_leaves.encoder;
          dec_leaves.params = &dec;
          leaf_list = tied_leaves.encoder.values;
          leaf_list.insert(leaf_list.end(), tied_leaves.decoder_bias.begin(),
                           tied_leaves.decoder_bias.end());
        } else {
          enc_leaves = nn::make_leaves(tape, enc);
          dec_leaves = nn::make_leaves(tape, dec);
          leaf_list = enc_leaves.values;
          leaf_list.insert(leaf_list.end(), dec_leaves.values.begin(),
                           dec_leaves.values.end());
        }

        loss::SamplerHandles handles;
        handles.sphere = &sphere_rng;
        handles.noise = &noise_rng;
        handles.latent = &latent_rng;
        handles.latent_sampler = &latent_sampler;

        loss::TotalLoss tl = loss::loss_total(tape, enc_leaves, dec_leaves,
                                              tied ? &tied_leaves : nullptr,
                                              *bp, bn, dataset.dim, cfg.loss, handles);
        if (!std::isfinite(tl.report.total))
          throw TrainError("non-finite loss at step " + std::to_string(step) +
                           " (rec=" + std::to_string(tl.report.rec) +
                           " iso=" + std::to_string(tl.report.iso) +
                           " piso=" + std::to_string(tl.report.piso) + ")");

        auto grads = tape.backward(tl.total, leaf_list);

        std::size_t slot = 0;
        for (std::size_t i = 0; i < enc_slots.size(); ++i, ++slot)
          adam_step(enc_slots[i], grads[slot].data(), enc_sizes[i], states[slot], adam);
        for (std::size_t i = 0; i < dec_slots.size(); ++i, ++slot)
          adam_step(dec_slots[i], grads[slot].data(), dec_sizes[i], states[slot], adam);
        if (tied) sync_tied_decoder(enc, dec);

        ++step;
        if (tl.report.total < result.best_total) {
          result.best_total = tl.report.total;
          best_enc = enc;
          best_dec = dec;
        }
        if (step % cfg.eval_every == 0 || step == total_steps) {
          HistoryRow row{step, tl.report};
          result.history.push_back(row);
          if (on_log) on_log(row);
        }
        if (step % cfg.latent_refresh_every == 0 && step != total_steps)
          refresh_latent();
      }
    }
  } catch (...) {
    save_best();
    throw;
  }

  result.encoder = std::move(enc);
  result.decoder = std::move(dec);
  result.steps = step;
  if (!cfg.checkpoint_path.empty()) nn::save_checkpoint(best_enc, best_dec, cfg.checkpoint_path);
  return result;
}

loss::LossReport measure_losses(const nn::MlpParams& encoder, const nn::MlpParams& decoder,
                                const data::Dataset& dataset, int mc_samples,
                                std::uint64_t seed) {
  loss::LossReport rep;
  const int n = dataset.n;
  const int d = decoder.input_dim();

  // reconstruction on the full dataset
  std::vector<double> codes = nn::forward_eval(encoder, dataset.points, n);
  std::vector<double> recon = nn::forward_eval(decoder, codes, n);
  double rec = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double diff = recon[i] - dataset.points[i];
    rec += diff * diff;
  }
  rep.rec = rec / n;

  Rng rng(seed, Stream::Diagnostics);
  sampling::LatentSampler sampler =
      sampling::fit_latent_sampler(codes, n, d, sampling::LatentMode::UniformBox);

  ad::Tape tape;
  nn::MlpLeaves enc_leaves = nn::make_leaves(tape, encoder);
  nn::MlpLeaves dec_leaves = nn::make_leaves(tape, decoder);

  std::vector<double> zs = sampling::sample_latent(sampler, rng, mc_samples);
  ad::Value z = tape.leaf({mc_samples, d}, std::move(zs));
  ad::Value u1 = tape.leaf({mc_samples, d}, sampling::sample_sphere(rng, d, mc_samples));
  rep.iso = loss::loss_iso(tape, nn::as_fn(dec_leaves), z, u1).scalar();

  std::vector<double> xs(std::size_t(mc_samples) * dataset.dim);
  for (int i = 0; i < mc_samples; ++i)
    std::copy_n(dataset.points.data() + (std::uint64_t(rng.below(n)) * dataset.dim),
                dataset.dim, xs.data() + std::size_t(i) * dataset.dim);
  ad::Value x = tape.leaf({mc_samples, dataset.dim}, std::move(xs));
  ad::Value u2 = tape.leaf({mc_samples, d}, sampling::sample_sphere(rng, d, mc_samples));
  rep.piso = loss::loss_piso(tape, nn::as_fn(enc_leaves), x, u2).scalar();

  rep.total = rep.rec + rep.iso + rep.piso;
  return rep;
}

} // namespace iae::optim
