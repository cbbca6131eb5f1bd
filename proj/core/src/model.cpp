#include "softpool/model.hpp"

#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

void Architecture::validate() const {
  if (n_in == 0) throw ConfigError("n_in must be positive");
  if (n_f == 0 || n_r == 0 || n_p == 0 || upsample == 0) {
    throw ConfigError("n_f, n_r, n_p and the upsample factor must be positive");
  }
  if (n_r > n_in) throw ConfigError("n_r cannot exceed the number of input points");
  for (std::size_t w : hidden) {
    if (w == 0) throw ConfigError("hidden widths must be positive");
  }
  if (!(slope >= 0.0 && slope < 1.0)) throw ConfigError("leaky slope must lie in [0, 1)");
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const Architecture& arch) {
  std::vector<std::pair<std::string, Shape>> layout;
  std::vector<std::size_t> widths{3};
  widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
  widths.push_back(arch.n_f);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::string prefix = "encoder.layer" + std::to_string(l);
    layout.emplace_back(prefix + ".weight", Shape{widths[l], widths[l + 1]});
    layout.emplace_back(prefix + ".bias", Shape{widths[l + 1]});
  }
  layout.emplace_back("decoder.coarse.weight", Shape{arch.n_p, arch.n_f, 3});
  layout.emplace_back("decoder.coarse.bias", Shape{3});
  layout.emplace_back("decoder.fine.weight", Shape{arch.n_p, 3, 3});
  layout.emplace_back("decoder.fine.bias", Shape{3});
  return layout;
}

SoftPoolNet SoftPoolNet::initialize(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  const EncoderParams enc = init_encoder(arch.hidden, arch.n_f, derive_seed(seed, 1));
  const DecoderParams dec = init_decoder(arch.n_f, arch.n_p, derive_seed(seed, 2));
  std::vector<Tensor> values;
  for (std::size_t l = 0; l < enc.weights.size(); ++l) {
    values.push_back(enc.weights[l]);
    values.push_back(enc.biases[l]);
  }
  values.push_back(dec.coarse.weights);
  values.push_back(dec.coarse.bias);
  values.push_back(dec.fine.weights);
  values.push_back(dec.fine.bias);
  const auto layout = parameter_layout(arch);
  std::vector<NamedTensor> params;
  for (std::size_t i = 0; i < layout.size(); ++i) params.push_back({layout[i].first, std::move(values[i])});
  return SoftPoolNet(arch, std::move(params));
}

SoftPoolNet SoftPoolNet::from_parameters(const Architecture& arch, std::vector<NamedTensor> params) {
  arch.validate();
  const auto layout = parameter_layout(arch);
  if (params.size() != layout.size()) {
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " tensors, configuration needs " +
                      std::to_string(layout.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params[i].name != layout[i].first || params[i].value.shape() != layout[i].second) {
      throw ConfigError("checkpoint tensor '" + params[i].name + "' " + shape_string(params[i].value.shape()) +
                        " does not match expected '" + layout[i].first + "' " + shape_string(layout[i].second));
    }
  }
  return SoftPoolNet(arch, std::move(params));
}

std::size_t SoftPoolNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<ad::Var> SoftPoolNet::bind(ad::Tape& tape, bool trainable) const {
  std::vector<ad::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(trainable ? tape.variable(p.value) : tape.constant(p.value));
  return vars;
}

Forward SoftPoolNet::forward(std::span<const ad::Var> params, const ad::Var& points,
                             std::optional<RowRange> rows, ad::DecisionLog* decisions) const {
  if (params.size() != params_.size()) throw InvalidInput("forward: parameter count mismatch");
  const std::size_t layers = arch_.hidden.size() + 1;
  std::vector<MlpLayer> mlp;
  for (std::size_t l = 0; l < layers; ++l) mlp.push_back({params[2 * l], params[2 * l + 1]});
  const DecoderVars dec{params[2 * layers], params[2 * layers + 1], params[2 * layers + 2],
                        params[2 * layers + 3]};

  Forward out;
  out.features = encode(points, mlp, EncoderOptions{arch_.slope, true});
  const RowRange range = rows.value_or(RowRange{1, arch_.n_r});
  out.fstar = softpool(out.features, range.lo, range.hi == 0 ? arch_.n_r : range.hi, decisions);
  const Decoded d = decode(out.fstar, dec, DecoderOptions{arch_.n_f, arch_.upsample, arch_.slope, arch_.final_linear});
  out.coarse = d.coarse;
  out.fine = d.fine;
  return out;
}

Completion SoftPoolNet::complete(const PointCloud& points, std::optional<RowRange> rows) const {
  if (points.size() != arch_.n_in) {
    throw InvalidInput("complete: expected " + std::to_string(arch_.n_in) + " points, got " +
                       std::to_string(points.size()) + " (resample first)");
  }
  ad::Tape tape;
  const auto vars = bind(tape, false);
  const Forward f = forward(vars, tape.constant(Tensor({points.size(), 3}, points.flat())), rows);
  return {f.features.value(), f.fstar.value(), PointCloud::from_flat(f.coarse.value().data()),
          PointCloud::from_flat(f.fine.value().data())};
}

}  // namespace softpool
