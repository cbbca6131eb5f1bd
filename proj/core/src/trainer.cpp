#include "softpool/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "softpool/adam.hpp"
#include "softpool/checkpoint.hpp"
#include "softpool/distance.hpp"
#include "softpool/errors.hpp"
#include "softpool/io.hpp"
#include "softpool/parallel.hpp"
#include "softpool/random.hpp"

namespace softpool {

namespace {

ItemResult run_item(const SoftPoolNet& model, const LossConfig& loss, const Sample& item, bool with_grad) {
  ad::Tape tape;
  const auto params = model.bind(tape, with_grad);
  const ad::Var points = tape.constant(Tensor({item.input.size(), 3}, item.input.flat()));
  const Forward f = model.forward(params, points);
  const ItemLoss l = item_objective(f.features, f.fstar, f.coarse, f.fine, item.target, loss, item.seed);
  ItemResult out{l.values(), l.total.value().item(), {}};
  if (!std::isfinite(out.total)) throw NumericError("non-finite loss");
  if (with_grad) {
    tape.backward(l.total);
    out.grads.reserve(params.size());
    for (const auto& p : params) out.grads.push_back(tape.grad(p));
  }
  return out;
}

void write_losses(const std::filesystem::path& path, const std::vector<StepRecord>& steps) {
  std::string csv = loss_csv_header();
  for (const auto& s : steps) csv += loss_csv_row(s);
  io::write_file_atomic(path, csv);
}

}  // namespace

PointCloud prepare_input(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
  if (cloud.empty()) throw InvalidInput("input cloud is empty");
  return cloud.size() == n ? cloud : resample(cloud, n, seed);
}

std::vector<ItemResult> evaluate_items(const SoftPoolNet& model, const LossConfig& loss, std::span<const Sample> items,
                                       bool with_grad, std::size_t threads) {
  std::vector<ItemResult> out(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) { out[i] = run_item(model, loss, items[i], with_grad); });
  return out;
}

double mean_completion_chamfer(const SoftPoolNet& model, std::span<const Sample> items, std::size_t threads) {
  if (items.empty()) throw InvalidInput("no items to evaluate");
  std::vector<double> values(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    values[i] = chamfer_accelerated(model.complete(items[i].input).fine, items[i].target);
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string loss_csv_header() { return "step,complete,inter,intra,boundary,preserve,total\n"; }

std::string loss_csv_row(const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.values.complete,
                r.values.inter, r.values.intra, r.values.boundary, r.values.preserve, r.total);
  return buf;
}

std::vector<Sample> make_samples(std::span<const synth::ScanPair> pairs, std::size_t n_in, std::uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back({prepare_input(pairs[i].partial, n_in, derive_seed(seed, 2 * i)), pairs[i].complete,
                   derive_seed(seed, 2 * i + 1)});
  }
  return out;
}

TrainResult train(const RunConfig& config, std::span<const Sample> train_items, std::span<const Sample> holdout_items,
                  const TrainOptions& options) {
  config.validate();
  if (train_items.empty()) throw InvalidInput("training set is empty");
  const LossConfig loss = config.loss_config();
  TrainResult result{SoftPoolNet::initialize(config.architecture(), config.seed), {}, {}};
  auto& params = result.model.parameters();

  std::vector<Tensor> values;
  for (const auto& p : params) values.push_back(p.value);
  ad::Adam adam(ad::AdamOptions{config.lr, config.beta1, config.beta2, config.eps}, values);

  auto evaluate_holdout = [&](std::size_t epoch) {
    if (holdout_items.empty()) return;
    const double c = mean_completion_chamfer(result.model, holdout_items, config.threads);
    result.holdout.emplace_back(epoch, c);
    if (options.on_epoch) options.on_epoch(epoch, c);
  };
  evaluate_holdout(0);

  std::vector<std::size_t> order(train_items.size());
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, 0x5000 + epoch));
    shuffle(order, rng);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Sample> batch;
      for (std::size_t i = start; i < end; ++i) {
        Sample s = train_items[order[i]];
        s.seed = derive_seed(s.seed, epoch);
        batch.push_back(std::move(s));
      }
      const auto items = evaluate_items(result.model, loss, batch, true, config.threads);

      // Fixed-order reduction keeps the update independent of thread timing.
      const double inv = 1.0 / static_cast<double>(items.size());
      std::vector<Tensor> grads = items[0].grads;
      StepRecord rec{step, epoch, {}, 0.0};
      for (std::size_t b = 0; b < items.size(); ++b) {
        if (b > 0) {
          for (std::size_t p = 0; p < grads.size(); ++p) {
            auto g = grads[p].data();
            const auto add = items[b].grads[p].data();
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += add[k];
          }
        }
        rec.values.complete += items[b].values.complete * inv;
        rec.values.inter += items[b].values.inter * inv;
        rec.values.intra += items[b].values.intra * inv;
        rec.values.boundary += items[b].values.boundary * inv;
        rec.values.preserve += items[b].values.preserve * inv;
        rec.total += items[b].total * inv;
      }
      for (auto& g : grads) {
        for (double& x : g.data()) x *= inv;
        if (!g.all_finite()) throw NumericError("non-finite gradient at step " + std::to_string(step));
      }
      adam.step(values, grads);
      for (std::size_t p = 0; p < params.size(); ++p) params[p].value = values[p];

      result.steps.push_back(rec);
      if (options.on_step) options.on_step(rec);
      ++step;
    }

    if (!options.checkpoint.empty()) write_checkpoint(options.checkpoint, params);
    if (!options.loss_csv.empty()) write_losses(options.loss_csv, result.steps);
    if (options.holdout_every_epoch && epoch < config.epochs) evaluate_holdout(epoch);
  }
  if (config.epochs > 0) evaluate_holdout(config.epochs);
  return result;
}

}  // namespace softpool
