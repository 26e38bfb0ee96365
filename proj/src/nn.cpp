#include "iae/nn.hpp"

#include "iae/kernels.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace iae::nn {

using json = nlohmann::json;
namespace k = iae::kernels;

std::size_t MlpParams::param_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void AeConfig::validate() const {
  if (ambient_dim < 1 || latent_dim < 1)
    throw ConfigError("AeConfig: dimensions must be positive");
  if (latent_dim >= ambient_dim)
    throw ConfigError("AeConfig: latent_dim must be smaller than ambient_dim");
  if (hidden_widths.empty())
    throw ConfigError("AeConfig: hidden_widths must be non-empty");
  for (int w : hidden_widths)
    if (w < 1) throw ConfigError("AeConfig: hidden width must be positive");
  if (activation_beta <= 0.0)
    throw ConfigError("AeConfig: activation_beta must be positive");
}

namespace {

MlpParams build_mlp(int in_dim, int out_dim, const std::vector<int>& hidden,
                    double beta, Rng& rng) {
  MlpParams p;
  p.beta = beta;
  std::vector<int> dims;
  dims.push_back(in_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out_dim);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Layer l;
    l.in = dims[i];
    l.out = dims[i + 1];
    l.act = (i + 2 < dims.size()) ? Activation::SoftplusBeta : Activation::Identity;
    l.weight.resize(std::size_t(l.out) * l.in);
    l.bias.assign(l.out, 0.0);
    const double bound = 1.0 / std::sqrt(double(l.in));
    for (double& w : l.weight) w = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(l));
  }
  return p;
}

} // namespace

std::pair<MlpParams, MlpParams> build_autoencoder(const AeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed, Stream::Init);
  MlpParams enc = build_mlp(cfg.ambient_dim, cfg.latent_dim, cfg.hidden_widths,
                            cfg.activation_beta, rng);
  MlpParams dec = build_mlp(cfg.latent_dim, cfg.ambient_dim, cfg.hidden_widths,
                            cfg.activation_beta, rng);
  return {std::move(enc), std::move(dec)};
}

MlpLeaves make_leaves(ad::Tape& tape, const MlpParams& p) {
  MlpLeaves out;
  out.params = &p;
  for (const Layer& l : p.layers) {
    out.values.push_back(tape.leaf({l.out, l.in}, std::span<const double>(l.weight)));
    out.values.push_back(tape.leaf({1, l.out}, std::span<const double>(l.bias)));
  }
  return out;
}

TiedLeaves make_tied_leaves(ad::Tape& tape, const MlpParams& enc, const MlpParams& dec) {
  const std::size_t L = enc.layers.size();
  if (dec.layers.size() != L)
    throw ConfigError("tied autoencoder: encoder/decoder depth differs");
  for (std::size_t kk = 0; kk < L; ++kk) {
    const Layer& dl = dec.layers[kk];
    const Layer& el = enc.layers[L - 1 - kk];
    if (dl.in != el.out || dl.out != el.in)
      throw ConfigError("tied autoencoder: architectures are not mirror-symmetric");
  }
  TiedLeaves t;
  t.encoder = make_leaves(tape, enc);
  t.decoder.params = &dec;
  for (const Layer& l : dec.layers)
    t.decoder_bias.push_back(tape.leaf({1, l.out}, std::span<const double>(l.bias)));
  return t;
}

ad::Value forward(ad::Tape& tape, const MlpLeaves& net, ad::Value input) {
  const MlpParams& p = *net.params;
  if (input.shape().cols != p.input_dim())
    throw ad::ShapeError("mlp forward: input dimension mismatch");
  ad::Value h = input;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    ad::Value w = net.values[2 * i];
    ad::Value b = net.values[2 * i + 1];
    h = tape.add_bias(tape.matmul(h, w, false, true), b);
    if (p.layers[i].act == Activation::SoftplusBeta) h = tape.softplus(h, p.beta);
  }
  return h;
}

ad::Value forward_tied_decoder(ad::Tape& tape, const TiedLeaves& tied, ad::Value input) {
  const MlpParams& p = *tied.decoder.params;
  if (input.shape().cols != p.input_dim())
    throw ad::ShapeError("tied decoder forward: input dimension mismatch");
  const std::size_t L = p.layers.size();
  ad::Value h = input;
  for (std::size_t i = 0; i < L; ++i) {
    // decoder weight i == transpose of encoder weight (L-1-i)
    ad::Value w_enc = tied.encoder.values[2 * (L - 1 - i)];
    h = tape.add_bias(tape.matmul(h, w_enc, false, false), tied.decoder_bias[i]);
    if (p.layers[i].act == Activation::SoftplusBeta) h = tape.softplus(h, p.beta);
  }
  return h;
}

std::vector<double> forward_eval(const MlpParams& p, const std::vector<double>& input,
                                 int n_rows) {
  if (input.size() != std::size_t(n_rows) * p.input_dim())
    throw ad::ShapeError("forward_eval: input size mismatch");
  std::vector<double> h = input;
  int cols = p.input_dim();
  for (const Layer& l : p.layers) {
    std::vector<double> next(std::size_t(n_rows) * l.out);
    k::gemm(next.data(), h.data(), false, l.weight.data(), true,
            std::size_t(n_rows), std::size_t(cols), std::size_t(l.out));
    for (int r = 0; r < n_rows; ++r)
      k::serial::add(next.data() + std::size_t(r) * l.out,
                     next.data() + std::size_t(r) * l.out, l.bias.data(), l.out);
    if (l.act == Activation::SoftplusBeta)
      k::softplus(next.data(), next.data(), p.beta, next.size());
    h = std::move(next);
    cols = l.out;
  }
  return h;
}

ad::TapedFn as_fn(const MlpLeaves& net) {
  return [&net](ad::Tape& t, ad::Value x) { return forward(t, net, x); };
}

ad::TapedFn as_fn_tied_decoder(const TiedLeaves& tied) {
  return [&tied](ad::Tape& t, ad::Value x) { return forward_tied_decoder(t, tied, x); };
}

namespace {

json layer_to_json(const Layer& l) {
  return json{{"in", l.in},
              {"out", l.out},
              {"act", l.act == Activation::SoftplusBeta ? "softplus" : "identity"},
              {"weight", l.weight},
              {"bias", l.bias}};
}

Layer layer_from_json(const json& j) {
  Layer l;
  l.in = j.at("in").get<int>();
  l.out = j.at("out").get<int>();
  l.act = j.at("act").get<std::string>() == "softplus" ? Activation::SoftplusBeta
                                                       : Activation::Identity;
  l.weight = j.at("weight").get<std::vector<double>>();
  l.bias = j.at("bias").get<std::vector<double>>();
  if (l.weight.size() != std::size_t(l.in) * l.out || l.bias.size() != std::size_t(l.out))
    throw ConfigError("checkpoint: layer array sizes inconsistent with shape");
  return l;
}

json net_to_json(const MlpParams& p) {
  json layers = json::array();
  for (const Layer& l : p.layers) layers.push_back(layer_to_json(l));
  return json{{"beta", p.beta}, {"layers", layers}};
}

MlpParams net_from_json(const json& j) {
  MlpParams p;
  p.beta = j.at("beta").get<double>();
  for (const json& lj : j.at("layers")) p.layers.push_back(layer_from_json(lj));
  if (p.layers.empty()) throw ConfigError("checkpoint: empty network");
  return p;
}

} // namespace

void save_checkpoint(const MlpParams& encoder, const MlpParams& decoder,
                     const std::string& path) {
  json j{{"format", "iae-checkpoint-v1"},
         {"encoder", net_to_json(encoder)},
         {"decoder", net_to_json(decoder)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

std::pair<MlpParams, MlpParams> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j = json::parse(in);
  return {net_from_json(j.at("encoder")), net_from_json(j.at("decoder"))};
}

std::vector<double*> param_slots(MlpParams& p) {
  std::vector<double*> s;
  for (Layer& l : p.layers) {
    s.push_back(l.weight.data());
    s.push_back(l.bias.data());
  }
  return s;
}

std::vector<const double*> param_slots(const MlpParams& p) {
  std::vector<const double*> s;
  for (const Layer& l : p.layers) {
    s.push_back(l.weight.data());
    s.push_back(l.bias.data());
  }
  return s;
}

std::vector<std::size_t> param_sizes(const MlpParams& p) {
  std::vector<std::size_t> s;
  for (const Layer& l : p.layers) {
    s.push_back(l.weight.size());
    s.push_back(l.bias.size());
  }
  return s;
}

} // namespace iae::nn
