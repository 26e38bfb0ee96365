#pragma once

#include "iae/nn.hpp"
#include "iae/rng.hpp"
#include "iae/sampling.hpp"
#include "iae/tape.hpp"

#include <optional>
#include <string>

namespace iae::loss {

enum class Regularizer { IAE, AE, CAE, TCAE, RAE_GP, DAE };

Regularizer regularizer_from_string(const std::string& s);
std::string to_string(Regularizer r);

struct LossConfig {
  double lambda_rec = 1.0;
  double lambda_iso = 0.0;
  double lambda_piso = 0.0;
  Regularizer regularizer = Regularizer::IAE;
  double dae_sigma = 0.1;
  int mc_samples = 1;  // Monte-Carlo draws per batch element per step

  void validate() const;
};

struct LossReport {
  double total = 0.0;
  double rec = 0.0;
  double iso = 0.0;
  double piso = 0.0;
  double reg = 0.0;
};

// (1/n) sum_i || f(g(x_i)) - x_i ||^2
ad::Value loss_rec(ad::Tape& tape, const nn::MlpLeaves& encoder,
                   const nn::MlpLeaves& decoder, ad::Value batch);

// (1/m) sum_j ( || df(z_j) u_j || - 1 )^2 with unit-norm u rows.
ad::Value loss_iso(ad::Tape& tape, const ad::TapedFn& decoder,
                   ad::Value z_samples, ad::Value u_samples);

// (1/m) sum_j ( || u_j^T dg(x_j) || - 1 )^2 with unit-norm u rows.
ad::Value loss_piso(ad::Tape& tape, const ad::TapedFn& encoder,
                    ad::Value x_batch, ad::Value u_samples);

// Stochastic Frobenius-norm-squared penalty on dg: mean over batch of
// d * E_u || u^T dg(x) ||^2, `probes` unit directions per point.
ad::Value reg_cae(ad::Tape& tape, const ad::TapedFn& encoder, int latent_dim,
                  ad::Value x_batch, ad::Value u_probes);

// Same estimator on df via jvp probes: d * E_u || df(z) u ||^2.
ad::Value reg_rae_gp(ad::Tape& tape, const ad::TapedFn& decoder, int latent_dim,
                     ad::Value z_batch, ad::Value u_probes);

// batch + sigma * standard normal noise; reconstruction target stays clean.
std::vector<double> dae_corrupt(const std::vector<double>& batch, double sigma, Rng& rng);

// Handles for the samplers a full loss evaluation needs.
struct SamplerHandles {
  Rng* sphere = nullptr;
  Rng* noise = nullptr;
  const sampling::LatentSampler* latent_sampler = nullptr;
  Rng* latent = nullptr;
};

struct TotalLoss {
  ad::Value total;  // taped scalar
  LossReport report;
};

// Assembles the configured objective on the tape. For IAE:
// lambda_rec * L_rec + lambda_iso * L_iso + lambda_piso * L_piso.
// For baselines: lambda_rec * L_rec + lambda_iso * R.
// `tied` must be set for TCAE; encoder/decoder leaves must come from it.
TotalLoss loss_total(ad::Tape& tape, const nn::MlpLeaves& encoder,
                     const nn::MlpLeaves& decoder, const nn::TiedLeaves* tied,
                     const std::vector<double>& batch, int n, int ambient_dim,
                     const LossConfig& cfg, const SamplerHandles& samplers);

// Contract check used by the u-consuming losses.
void require_unit_rows(const ad::Value& u, double tol = 1e-8);

} // namespace iae::loss
