#include "softpool/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

EncoderParams init_encoder(std::span<const std::size_t> hidden, std::size_t n_f, std::uint64_t seed) {
  if (n_f == 0) throw InvalidInput("encoder needs at least one output feature");
  std::vector<std::size_t> widths{3};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(n_f);
  EncoderParams params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    if (in == 0 || out == 0) throw InvalidInput("encoder layer widths must be positive");
    Rng rng(derive_seed(seed, l));
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    Tensor w({in, out});
    for (double& v : w.data()) v = uniform(rng, -bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(Shape{out}, 0.0);
  }
  return params;
}

ad::Var encode(const ad::Var& points, std::span<const MlpLayer> layers, const EncoderOptions& options) {
  if (layers.empty()) throw InvalidInput("encode: no layers");
  if (points.value().rank() != 2 || points.shape()[1] != 3) {
    throw ShapeError("encode: points must be N x 3, got " + shape_string(points.shape()));
  }
  ad::Var h = points;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = ad::add_bias(ad::matmul(h, layers[l].weight), layers[l].bias);
    if (l + 1 < layers.size()) h = ad::leaky_relu(h, options.slope);
  }
  return options.output_softmax ? ad::softmax(h, 1) : h;
}

Tensor encode(const PointCloud& points, const EncoderParams& params, const EncoderOptions& options) {
  ad::Tape tape;
  const ad::Var x = tape.constant(Tensor({points.size(), 3}, points.flat()));
  std::vector<MlpLayer> layers;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    layers.push_back({tape.constant(params.weights[l]), tape.constant(params.biases[l])});
  }
  return encode(x, layers, options).value();
}

std::vector<std::size_t> sorted_rows(const Tensor& f, std::size_t k) {
  if (f.rank() != 2) throw ShapeError("sort_features: feature matrix must be rank 2");
  if (k >= f.dim(1)) throw InvalidInput("sort_features: feature index out of range");
  std::vector<std::size_t> order(f.dim(0));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = f(a, k), vb = f(b, k);
    if (va != vb) return va > vb;
    const auto ra = f.row(a), rb = f.row(b);
    return std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end());
  });
  return order;
}

SortedFeatureTensor sort_features(const Tensor& f) {
  if (f.rank() != 2) throw ShapeError("sort_features: feature matrix must be rank 2");
  SortedFeatureTensor out;
  const std::size_t n = f.dim(0), nf = f.dim(1);
  for (std::size_t k = 0; k < nf; ++k) {
    out.order.push_back(sorted_rows(f, k));
    Tensor slice({n, nf});
    for (std::size_t r = 0; r < n; ++r) {
      const auto src = f.row(out.order[k][r]);
      std::copy(src.begin(), src.end(), slice.row(r).begin());
    }
    out.slices.push_back(std::move(slice));
  }
  return out;
}

namespace {

void check_range(std::size_t lo, std::size_t hi, std::size_t n) {
  if (lo < 1 || lo > hi || hi > n) {
    throw InvalidInput("softpool: row range [" + std::to_string(lo) + ":" + std::to_string(hi) +
                       "] is outside [1:" + std::to_string(n) + "]");
  }
}

}  // namespace

Tensor softpool_range(const SortedFeatureTensor& sorted, std::size_t lo, std::size_t hi) {
  const std::size_t n = sorted.point_count(), nf = sorted.feature_count();
  check_range(lo, hi, n);
  const std::size_t per = hi - lo + 1;
  Tensor out({nf * per, nf});
  for (std::size_t k = 0; k < nf; ++k) {
    for (std::size_t r = 0; r < per; ++r) {
      const auto src = sorted.slices[k].row(lo - 1 + r);
      std::copy(src.begin(), src.end(), out.row(k * per + r).begin());
    }
  }
  return out;
}

Tensor softpool(const SortedFeatureTensor& sorted, std::size_t n_r) {
  if (n_r == 0 || n_r > sorted.point_count()) {
    throw InvalidInput("softpool: N_r=" + std::to_string(n_r) + " exceeds the " +
                       std::to_string(sorted.point_count()) + " available points");
  }
  return softpool_range(sorted, 1, n_r);
}

std::vector<std::size_t> softpool_rows(const Tensor& f, std::size_t lo, std::size_t hi) {
  if (f.rank() != 2) throw ShapeError("softpool: feature matrix must be rank 2");
  check_range(lo, hi, f.dim(0));
  std::vector<std::size_t> rows;
  rows.reserve(f.dim(1) * (hi - lo + 1));
  for (std::size_t k = 0; k < f.dim(1); ++k) {
    const auto order = sorted_rows(f, k);
    rows.insert(rows.end(), order.begin() + static_cast<std::ptrdiff_t>(lo - 1),
                order.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return rows;
}

ad::Var softpool(const ad::Var& f, std::size_t lo, std::size_t hi, ad::DecisionLog* decisions) {
  const auto rows = ad::decide(decisions, [&] { return softpool_rows(f.value(), lo, hi); });
  return ad::gather_rows(f, rows);
}

std::vector<double> pointnet_feature(const SortedFeatureTensor& sorted) {
  std::vector<double> out(sorted.feature_count());
  if (sorted.point_count() == 0) throw InvalidInput("pointnet_feature: no points");
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sorted.slices[k](0, k);
  return out;
}

std::vector<std::size_t> region_assign(const Tensor& f) {
  if (f.rank() != 2 || f.dim(1) == 0) throw ShapeError("region_assign: feature matrix must be N x N_f");
  std::vector<std::size_t> out(f.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto r = f.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

double region_probability(std::span<const double> feature, std::size_t region) {
  if (region >= feature.size()) throw InvalidInput("region_probability: region index out of range");
  double total = 0.0;
  for (double v : feature) total += v;
  if (total == 0.0 || !std::isfinite(total)) throw NumericError("region_probability: row sums to zero");
  return feature[region] / total;
}

}  // namespace softpool
