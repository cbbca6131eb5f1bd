#include "softpool/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "softpool/distance.hpp"
#include "softpool/gradcheck.hpp"
#include "softpool/losses.hpp"
#include "softpool/model.hpp"
#include "softpool/random.hpp"
#include "softpool/regional_conv.hpp"
#include "softpool/trainer.hpp"

namespace softpool::verify {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = uniform(rng, lo, hi);
  return t;
}

PointCloud random_cloud(std::size_t n, Rng& rng) {
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
  return PointCloud(std::move(pts));
}

std::string format_error(const ad::GradCheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err %.3g (param %zu elem %zu: analytic %.6g numeric %.6g, %zu coords)",
                r.max_relative_error, r.parameter, r.element, r.analytic, r.numeric, r.coordinates);
  return buf;
}

CheckResult gradient_check(const std::string& name, const ad::GraphFunction& build, const std::vector<Tensor>& params) {
  const auto report = ad::check_gradients(build, params);
  return {name, report.max_relative_error < kGradientTolerance, format_error(report)};
}

ad::Var maybe_flip(const ad::Var& v, bool flip) { return flip ? ad::testing::scale_gradient(v, -1.0) : v; }

std::vector<CheckResult> gradient_checks(const Options& o) {
  Rng rng(derive_seed(o.seed, 1));
  std::vector<CheckResult> out;

  const PointCloud gt = random_cloud(10, rng);
  out.push_back(gradient_check(
      "grad/complete",
      [&](ad::Tape&, std::span<const ad::Var> p, ad::DecisionLog* d) {
        return loss_complete(p[0], p[1], gt, CompletionOptions{true, 7}, d);
      },
      {random_tensor({12, 3}, rng), random_tensor({6, 3}, rng)}));

  out.push_back(gradient_check(
      "grad/inter",
      [&](ad::Tape&, std::span<const ad::Var> p, ad::DecisionLog*) {
        const ad::Var batch[] = {ad::softmax(p[0], 1), ad::softmax(p[1], 1)};
        return loss_inter(batch);
      },
      {random_tensor({9, 4}, rng, -2, 2), random_tensor({7, 4}, rng, -2, 2)}));

  out.push_back(gradient_check(
      "grad/intra",
      [&](ad::Tape&, std::span<const ad::Var> p, ad::DecisionLog*) {
        const ad::Var batch[] = {ad::softmax(p[0], 1), ad::softmax(p[1], 1)};
        return maybe_flip(loss_intra(batch), o.inject_intra_sign_error);
      },
      {random_tensor({9, 4}, rng, -2, 2), random_tensor({7, 4}, rng, -2, 2)}));

  out.push_back(gradient_check(
      "grad/boundary",
      [&](ad::Tape&, std::span<const ad::Var> p, ad::DecisionLog* d) {
        return loss_boundary(p[0], ad::softmax(p[1], 1), 0.3, d);
      },
      {random_tensor({16, 3}, rng), random_tensor({16, 3}, rng, -1.5, 1.5)}));

  out.push_back(gradient_check(
      "grad/preserve",
      [&](ad::Tape&, std::span<const ad::Var> p, ad::DecisionLog* d) {
        return loss_preserve(ad::softmax(p[0], 1), ad::softmax(p[1], 1), 11, 8, d);
      },
      {random_tensor({10, 4}, rng, -2, 2), random_tensor({12, 4}, rng, -2, 2)}));

  // End to end: a small network on a batch of two 32-point clouds.
  Architecture arch;
  arch.n_in = 32;
  arch.hidden = {8};
  arch.n_f = 4;
  arch.n_r = 4;
  arch.n_p = 4;
  arch.upsample = 2;
  const SoftPoolNet net = SoftPoolNet::initialize(arch, derive_seed(o.seed, 2));
  std::vector<Tensor> params;
  for (const auto& p : net.parameters()) params.push_back(p.value);
  const PointCloud inputs[] = {random_cloud(32, rng), random_cloud(32, rng)};
  const PointCloud targets[] = {random_cloud(40, rng), random_cloud(40, rng)};
  LossConfig cfg;
  cfg.preserve_samples = 16;
  cfg.flip_intra_gradient = o.inject_intra_sign_error;
  out.push_back(gradient_check(
      "grad/total",
      [&](ad::Tape& tape, std::span<const ad::Var> p, ad::DecisionLog* d) {
        ad::Var total;
        for (std::size_t b = 0; b < 2; ++b) {
          const ad::Var pts = tape.constant(Tensor({32, 3}, inputs[b].flat()));
          const Forward f = net.forward(p, pts, std::nullopt, d);
          const ItemLoss l = item_objective(f.features, f.fstar, f.coarse, f.fine, targets[b], cfg, 100 + b, d);
          total = b == 0 ? l.total : ad::add(total, l.total);
        }
        return ad::scale(total, 0.5);
      },
      params));
  return out;
}

CheckResult permutation_check(const Options& o) {
  Rng rng(derive_seed(o.seed, 3));
  Architecture arch;
  arch.n_in = 128;
  arch.hidden = {16, 16};
  arch.n_r = 8;
  arch.n_p = 8;
  arch.upsample = 4;
  const SoftPoolNet net = SoftPoolNet::initialize(arch, derive_seed(o.seed, 4));
  const PointCloud cloud = random_cloud(arch.n_in, rng);
  const Completion ref = net.complete(cloud);
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t t = 0; t < o.cases; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    const Completion c = net.complete(cloud.permuted(order));
    if (!(c.fstar == ref.fstar && c.coarse == ref.coarse && c.fine == ref.fine)) {
      return {"permutation/network", false, "shuffle " + std::to_string(t) + " changed the output"};
    }
  }
  return {"permutation/network", true, std::to_string(o.cases) + " shuffles bit-identical"};
}

CheckResult chamfer_oracle(const Options& o) {
  Rng rng(derive_seed(o.seed, 5));
  double worst = 0.0;
  for (std::size_t t = 0; t < o.cases; ++t) {
    const PointCloud a = random_cloud(1 + uniform_index(rng, 60), rng);
    const PointCloud b = random_cloud(1 + uniform_index(rng, 60), rng);
    double ab = 0.0, ba = 0.0;
    for (const auto& p : a) {
      double best = INFINITY;
      for (const auto& q : b) best = std::min(best, distance(p, q));
      ab += best;
    }
    for (const auto& q : b) {
      double best = INFINITY;
      for (const auto& p : a) best = std::min(best, distance(p, q));
      ba += best;
    }
    const double oracle = 0.5 * (ab / static_cast<double>(a.size()) + ba / static_cast<double>(b.size()));
    worst = std::max({worst, std::abs(chamfer(a, b) - oracle), std::abs(chamfer_accelerated(a, b) - oracle)});
  }
  return {"oracle/chamfer", worst <= 1e-12, "max abs diff " + std::to_string(worst)};
}

CheckResult emd_oracle(const Options& o) {
  Rng rng(derive_seed(o.seed, 6));
  double worst = 0.0;
  for (std::size_t t = 0; t < o.cases; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const PointCloud a = random_cloud(n, rng), b = random_cloud(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = INFINITY;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += distance(a[i], b[perm[i]]);
      best = std::min(best, s / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    worst = std::max(worst, std::abs(earth_mover(a, b) - best));
  }
  return {"oracle/earth_mover", worst <= 1e-12, "max abs diff " + std::to_string(worst)};
}

CheckResult conv_oracle(const Options& o) {
  Rng rng(derive_seed(o.seed, 7));
  double worst = 0.0;
  for (std::size_t t = 0; t < o.cases; ++t) {
    const std::size_t regions = 1 + uniform_index(rng, 4), per = 1 + uniform_index(rng, 6);
    const std::size_t extent = 1 + uniform_index(rng, 5), c_in = 1 + uniform_index(rng, 4);
    const std::size_t c_out = 1 + uniform_index(rng, 3);
    const Tensor x = random_tensor({regions * per, c_in}, rng);
    RegionalKernel k{random_tensor({extent, c_in, c_out}, rng), random_tensor({c_out}, rng), {}};
    const Tensor y = regional_conv(x, regions, k);
    for (std::size_t g = 0; g < regions; ++g) {
      for (std::size_t i = 0; i < per; ++i) {
        for (std::size_t j = 0; j < c_out; ++j) {
          double s = k.bias[j];
          for (std::size_t e = 0; e < extent; ++e) {
            const std::size_t src = g * per + std::min(i + e, per - 1);
            for (std::size_t l = 0; l < c_in; ++l) s += x(src, l) * k.weights[(e * c_in + l) * c_out + j];
          }
          worst = std::max(worst, std::abs(y(g * per + i, j) - s));
        }
      }
    }
  }
  return {"oracle/regional_conv", worst <= 1e-12, "max abs diff " + std::to_string(worst)};
}

CheckResult thread_check(const Options& o) {
  Rng rng(derive_seed(o.seed, 8));
  Architecture arch;
  arch.n_in = 64;
  arch.hidden = {16};
  arch.n_r = 4;
  arch.n_p = 4;
  arch.upsample = 2;
  const SoftPoolNet net = SoftPoolNet::initialize(arch, derive_seed(o.seed, 9));
  std::vector<Sample> items;
  for (std::size_t i = 0; i < 6; ++i) items.push_back({random_cloud(64, rng), random_cloud(80, rng), 50 + i});
  LossConfig cfg;
  cfg.preserve_samples = 32;
  const auto one = evaluate_items(net, cfg, items, true, 1);
  const auto many = evaluate_items(net, cfg, items, true, o.threads);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (one[i].total != many[i].total || one[i].grads != many[i].grads) {
      return {"determinism/threads", false, "item " + std::to_string(i) + " differs"};
    }
  }
  return {"determinism/threads", true, "1 vs " + std::to_string(o.threads) + " threads identical"};
}

}  // namespace

std::vector<CheckResult> run_checks(const Options& options) {
  std::vector<CheckResult> out = gradient_checks(options);
  for (auto check : {permutation_check, chamfer_oracle, emd_oracle, conv_oracle, thread_check}) {
    try {
      out.push_back(check(options));
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace softpool::verify
