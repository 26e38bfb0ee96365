#pragma once

#include "iae/rng.hpp"
#include "iae/tape.hpp"

#include <string>
#include <vector>

namespace iae::nn {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Activation { SoftplusBeta, Identity };

// One fully-connected layer: y = x W^T + b, optionally through SoftPlus.
// W is (out x in) row-major, b is (out).
struct Layer {
  int in = 0;
  int out = 0;
  Activation act = Activation::Identity;
  std::vector<double> weight;
  std::vector<double> bias;
};

struct MlpParams {
  std::vector<Layer> layers;
  double beta = 100.0;  // SoftPlus inverse temperature

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
  std::size_t param_count() const;
};

struct AeConfig {
  int ambient_dim = 3;
  int latent_dim = 2;
  std::vector<int> hidden_widths = {256, 256, 256, 256, 256};
  double activation_beta = 100.0;

  void validate() const;
};

// Encoder R^D -> R^d and decoder R^d -> R^D through the configured hidden
// widths, SoftPlus activations on hidden layers and a linear output layer.
// Weights drawn U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero,
// deterministic per seed.
std::pair<MlpParams, MlpParams> build_autoencoder(const AeConfig& cfg, std::uint64_t seed);

// Leaf handles for a network's parameters on a tape, in layer order
// (weight0, bias0, weight1, bias1, ...).
struct MlpLeaves {
  std::vector<ad::Value> values;
  const MlpParams* params = nullptr;
};

MlpLeaves make_leaves(ad::Tape& tape, const MlpParams& p);

// Leaves for a weight-tied pair: decoder layer k reuses the transpose of
// encoder layer (L-1-k)'s weight leaf; decoder biases stay independent.
// Requires mirror-symmetric architectures.
struct TiedLeaves {
  MlpLeaves encoder;
  MlpLeaves decoder;           // bias leaves only; weights shared
  std::vector<ad::Value> decoder_bias;
};
TiedLeaves make_tied_leaves(ad::Tape& tape, const MlpParams& enc, const MlpParams& dec);

// Taped forward over a batch of row-vectors (n x in) -> (n x out).
ad::Value forward(ad::Tape& tape, const MlpLeaves& net, ad::Value input);

// Tied decoder forward: uses transposed encoder weight leaves.
ad::Value forward_tied_decoder(ad::Tape& tape, const TiedLeaves& tied, ad::Value input);

// Plain (untaped) forward for evaluation paths.
std::vector<double> forward_eval(const MlpParams& p, const std::vector<double>& input,
                                 int n_rows);

// A TapedFn view of a network with its parameters as tape leaves; used by
// jvp/vjp so the result stays differentiable with respect to the params.
ad::TapedFn as_fn(const MlpLeaves& net);
ad::TapedFn as_fn_tied_decoder(const TiedLeaves& tied);

// Checkpoint round trip: JSON with layer shapes + row-major arrays,
// bit-exact through shortest-round-trip double formatting.
void save_checkpoint(const MlpParams& encoder, const MlpParams& decoder,
                     const std::string& path);
std::pair<MlpParams, MlpParams> load_checkpoint(const std::string& path);

// Apply an additive update / write a flat parameter vector back into params.
std::vector<double*> param_slots(MlpParams& p);
std::vector<const double*> param_slots(const MlpParams& p);
std::vector<std::size_t> param_sizes(const MlpParams& p);

} // namespace iae::nn
