#include "iae/losses.hpp"

#include <cmath>

namespace iae::loss {

Regularizer regularizer_from_string(const std::string& s) {
  if (s == "IAE" || s == "iae") return Regularizer::IAE;
  if (s == "AE" || s == "ae") return Regularizer::AE;
  if (s == "CAE" || s == "cae") return Regularizer::CAE;
  if (s == "TCAE" || s == "tcae") return Regularizer::TCAE;
  if (s == "RAE_GP" || s == "rae_gp" || s == "rae-gp") return Regularizer::RAE_GP;
  if (s == "DAE" || s == "dae") return Regularizer::DAE;
  throw nn::ConfigError("unknown regularizer: " + s);
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::IAE: return "IAE";
    case Regularizer::AE: return "AE";
    case Regularizer::CAE: return "CAE";
    case Regularizer::TCAE: return "TCAE";
    case Regularizer::RAE_GP: return "RAE_GP";
    case Regularizer::DAE: return "DAE";
  }
  return "?";
}

void LossConfig::validate() const {
  if (lambda_rec < 0 || lambda_iso < 0 || lambda_piso < 0)
    throw nn::ConfigError("LossConfig: weights must be nonnegative");
  if (mc_samples < 1)
    throw nn::ConfigError("LossConfig: mc_samples must be positive");
  if (regularizer == Regularizer::DAE && dae_sigma <= 0)
    throw nn::ConfigError("LossConfig: dae_sigma must be positive for DAE");
}

void require_unit_rows(const ad::Value& u, double tol) {
  const ad::Shape s = u.shape();
  const auto& d = u.data();
  for (int i = 0; i < s.rows; ++i) {
    double n2 = 0.0;
    for (int j = 0; j < s.cols; ++j) {
      const double v = d[std::size_t(i) * s.cols + j];
      n2 += v * v;
    }
    if (std::abs(std::sqrt(n2) - 1.0) > tol)
      throw ad::ContractError("direction sample is not unit norm");
  }
}

ad::Value loss_rec(ad::Tape& tape, const nn::MlpLeaves& encoder,
                   const nn::MlpLeaves& decoder, ad::Value batch) {
  if (batch.shape().rows < 1)
    throw ad::ContractError("loss_rec: empty batch");
  ad::Value z = nn::forward(tape, encoder, batch);
  ad::Value xr = nn::forward(tape, decoder, z);
  ad::Value diff = tape.sub(xr, batch);
  return tape.mean(tape.row_sum(tape.mul(diff, diff)));
}

namespace {

ad::Value deviation_loss(ad::Tape& tape, ad::Value directional) {
  ad::Value norms = tape.row_norms(directional);
  ad::Value dev = tape.add_const(norms, -1.0);
  return tape.mean(tape.mul(dev, dev));
}

ad::Value frob_estimate(ad::Tape& tape, ad::Value directional, int latent_dim) {
  // d * E_u ||J u||^2 is unbiased for ||J||_F^2 since E[u u^T] = I/d.
  ad::Value sq = tape.row_sum(tape.mul(directional, directional));
  return tape.scale(tape.mean(sq), double(latent_dim));
}

} // namespace

ad::Value loss_iso(ad::Tape& tape, const ad::TapedFn& decoder,
                   ad::Value z_samples, ad::Value u_samples) {
  require_unit_rows(u_samples);
  ad::Value t = ad::jvp(tape, decoder, z_samples, u_samples);
  return deviation_loss(tape, t);
}

ad::Value loss_piso(ad::Tape& tape, const ad::TapedFn& encoder,
                    ad::Value x_batch, ad::Value u_samples) {
  require_unit_rows(u_samples);
  ad::Value r = ad::vjp(tape, encoder, x_batch, u_samples);
  return deviation_loss(tape, r);
}

ad::Value reg_cae(ad::Tape& tape, const ad::TapedFn& encoder, int latent_dim,
                  ad::Value x_batch, ad::Value u_probes) {
  require_unit_rows(u_probes);
  ad::Value r = ad::vjp(tape, encoder, x_batch, u_probes);
  return frob_estimate(tape, r, latent_dim);
}

ad::Value reg_rae_gp(ad::Tape& tape, const ad::TapedFn& decoder, int latent_dim,
                     ad::Value z_batch, ad::Value u_probes) {
  require_unit_rows(u_probes);
  ad::Value t = ad::jvp(tape, decoder, z_batch, u_probes);
  return frob_estimate(tape, t, latent_dim);
}

std::vector<double> dae_corrupt(const std::vector<double>& batch, double sigma, Rng& rng) {
  if (sigma < 0) throw nn::ConfigError("dae_corrupt: sigma must be >= 0");
  std::vector<double> out = batch;
  if (sigma > 0)
    for (double& v : out) v += sigma * rng.normal();
  return out;
}

namespace {

// Repeats the n x d matrix `mc` times row-blockwise.
std::vector<double> repeat_rows(const std::vector<double>& m, int n, int d, int mc) {
  if (mc == 1) return m;
  std::vector<double> out;
  out.reserve(m.size() * mc);
  for (int r = 0; r < mc; ++r) out.insert(out.end(), m.begin(), m.end());
  (void)n; (void)d;
  return out;
}

} // namespace

TotalLoss loss_total(ad::Tape& tape, const nn::MlpLeaves& encoder,
                     const nn::MlpLeaves& decoder, const nn::TiedLeaves* tied,
                     const std::vector<double>& batch, int n, int ambient_dim,
                     const LossConfig& cfg, const SamplerHandles& samplers) {
  cfg.validate();
  if (n < 1) throw ad::ContractError("loss_total: empty batch");
  const int d = decoder.params ? decoder.params->input_dim()
                               : tied->decoder.params->input_dim();
  const int m = n * cfg.mc_samples;

  ad::Value x = tape.leaf({n, ambient_dim}, std::span<const double>(batch));

  auto enc_fn = nn::as_fn(encoder);
  auto dec_fn = tied ? nn::as_fn_tied_decoder(*tied) : nn::as_fn(decoder);

  const bool is_dae = cfg.regularizer == Regularizer::DAE;
  ad::Value rec_input = x;
  if (is_dae) {
    std::vector<double> noisy = dae_corrupt(batch, cfg.dae_sigma, *samplers.noise);
    rec_input = tape.leaf({n, ambient_dim}, std::move(noisy));
  }
  ad::Value xr = dec_fn(tape, enc_fn(tape, rec_input));
  ad::Value diff = tape.sub(xr, x);
  ad::Value rec = tape.mean(tape.row_sum(tape.mul(diff, diff)));

  TotalLoss out{tape.scale(rec, cfg.lambda_rec), {}};
  out.report.rec = rec.scalar();

  switch (cfg.regularizer) {
    case Regularizer::IAE: {
      if (cfg.lambda_iso > 0) {
        std::vector<double> zs = sampling::sample_latent(*samplers.latent_sampler,
                                                         *samplers.latent, m);
        ad::Value z = tape.leaf({m, d}, std::move(zs));
        ad::Value u = tape.leaf({m, d}, sampling::sample_sphere(*samplers.sphere, d, m));
        ad::Value iso = loss_iso(tape, dec_fn, z, u);
        out.report.iso = iso.scalar();
        out.total = tape.add(out.total, tape.scale(iso, cfg.lambda_iso));
      }
      if (cfg.lambda_piso > 0) {
        std::vector<double> xrep = repeat_rows(batch, n, ambient_dim, cfg.mc_samples);
        ad::Value xp = tape.leaf({m, ambient_dim}, std::move(xrep));
        ad::Value u = tape.leaf({m, d}, sampling::sample_sphere(*samplers.sphere, d, m));
        ad::Value piso = loss_piso(tape, enc_fn, xp, u);
        out.report.piso = piso.scalar();
        out.total = tape.add(out.total, tape.scale(piso, cfg.lambda_piso));
      }
      break;
    }
    case Regularizer::AE:
    case Regularizer::DAE:
      break;
    case Regularizer::CAE:
    case Regularizer::TCAE: {
      if (cfg.lambda_iso > 0) {
        std::vector<double> xrep = repeat_rows(batch, n, ambient_dim, cfg.mc_samples);
        ad::Value xp = tape.leaf({m, ambient_dim}, std::move(xrep));
        ad::Value u = tape.leaf({m, d}, sampling::sample_sphere(*samplers.sphere, d, m));
        ad::Value r = reg_cae(tape, enc_fn, d, xp, u);
        out.report.reg = r.scalar();
        out.total = tape.add(out.total, tape.scale(r, cfg.lambda_iso));
      }
      break;
    }
    case Regularizer::RAE_GP: {
      if (cfg.lambda_iso > 0) {
        // detached latent codes of the batch
        std::vector<double> codes =
            nn::forward_eval(*encoder.params, batch, n);
        std::vector<double> zrep = repeat_rows(codes, n, d, cfg.mc_samples);
        ad::Value z = tape.leaf({m, d}, std::move(zrep));
        ad::Value u = tape.leaf({m, d}, sampling::sample_sphere(*samplers.sphere, d, m));
        ad::Value r = reg_rae_gp(tape, dec_fn, d, z, u);
        out.report.reg = r.scalar();
        out.total = tape.add(out.total, tape.scale(r, cfg.lambda_iso));
      }
      break;
    }
  }

  out.report.total = out.total.scalar();
  return out;
}

} // namespace iae::loss
