#include "softpool/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "softpool/distance.hpp"
#include "softpool/errors.hpp"
#include "softpool/parallel.hpp"
#include "softpool/random.hpp"
#include "softpool/shapes.hpp"
#include "softpool/trainer.hpp"

namespace softpool::eval {

double fidelity(const PointCloud& input, const PointCloud& output) {
  if (input.empty() || output.empty()) throw InvalidInput("fidelity: empty cloud");
  const auto nn = nearest_indices(input.points(), output.points());
  double sum = 0.0;
  for (std::size_t i = 0; i < nn.size(); ++i) sum += distance(input[i], output[nn[i]]);
  return sum / static_cast<double>(input.size());
}

double mmd(const PointCloud& output, std::span<const PointCloud> references) {
  if (references.empty()) throw InvalidInput("mmd: no reference clouds");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : references) best = std::min(best, chamfer_accelerated(output, r));
  return best;
}

double consistency(std::span<const PointCloud> outputs) {
  if (outputs.size() < 2) throw InvalidInput("consistency: need at least two outputs");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < outputs.size(); ++i) sum += chamfer_accelerated(outputs[i], outputs[i + 1]);
  return sum / static_cast<double>(outputs.size() - 1);
}

LinearSvm LinearSvm::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                         const Options& options) {
  if (x.size() != labels.size() || x.empty()) throw InvalidInput("svm: descriptors and labels must match");
  const std::size_t dim = x[0].size();
  for (const auto& row : x) {
    if (row.size() != dim) throw InvalidInput("svm: descriptors have different lengths");
  }
  if (!(options.lambda > 0.0) || options.epochs == 0) throw InvalidInput("svm: invalid options");

  LinearSvm svm;
  svm.classes_ = labels;
  std::sort(svm.classes_.begin(), svm.classes_.end());
  svm.classes_.erase(std::unique(svm.classes_.begin(), svm.classes_.end()), svm.classes_.end());
  if (svm.classes_.size() < 2) throw InvalidInput("svm: training set needs at least two classes");

  const double n = static_cast<double>(x.size());
  svm.mean_.assign(dim, 0.0);
  svm.inv_std_.assign(dim, 1.0);
  for (const auto& row : x) {
    for (std::size_t d = 0; d < dim; ++d) svm.mean_[d] += row[d] / n;
  }
  for (std::size_t d = 0; d < dim; ++d) {
    double var = 0.0;
    for (const auto& row : x) var += (row[d] - svm.mean_[d]) * (row[d] - svm.mean_[d]) / n;
    svm.inv_std_[d] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
  }
  std::vector<std::vector<double>> z(x.size(), std::vector<double>(dim));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) z[i][d] = (x[i][d] - svm.mean_[d]) * svm.inv_std_[d];
  }

  const double lambda = options.lambda;
  const double radius = 1.0 / std::sqrt(lambda);
  for (std::size_t c = 0; c < svm.classes_.size(); ++c) {
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    Rng rng(derive_seed(options.seed, c));
    std::vector<std::size_t> order(x.size());
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(order, rng);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double y = labels[i] == svm.classes_[c] ? 1.0 : -1.0;
        double score = b;
        for (std::size_t d = 0; d < dim; ++d) score += w[d] * z[i][d];
        const double shrink = 1.0 - eta * lambda;
        for (double& wd : w) wd *= shrink;
        if (y * score < 1.0) {
          for (std::size_t d = 0; d < dim; ++d) w[d] += eta * y * z[i][d];
          b += eta * y;
        }
        // Projection onto the ball that contains the optimum.
        double norm2 = 0.0;
        for (double wd : w) norm2 += wd * wd;
        if (norm2 > radius * radius) {
          const double f = radius / std::sqrt(norm2);
          for (double& wd : w) wd *= f;
        }
      }
    }
    svm.w_.push_back(std::move(w));
    svm.b_.push_back(b);
  }
  return svm;
}

int LinearSvm::predict(std::span<const double> x) const {
  if (x.size() != mean_.size()) throw InvalidInput("svm: descriptor length differs from training");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    double s = b_[c];
    for (std::size_t d = 0; d < x.size(); ++d) s += w_[c][d] * (x[d] - mean_[d]) * inv_std_[d];
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return classes_[best];
}

std::vector<int> LinearSvm::predict(const std::vector<std::vector<double>>& x) const {
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict(row));
  return out;
}

Classification classify_descriptor(const std::vector<std::vector<double>>& train_x, const std::vector<int>& train_y,
                                   const std::vector<std::vector<double>>& test_x, const std::vector<int>& test_y,
                                   const LinearSvm::Options& options) {
  if (test_x.size() != test_y.size()) throw InvalidInput("classify: test descriptors and labels must match");
  const LinearSvm svm = LinearSvm::fit(train_x, train_y, options);
  Classification out;
  out.predicted = svm.predict(test_x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_y.size(); ++i) correct += out.predicted[i] == test_y[i];
  out.accuracy = test_y.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_y.size());
  return out;
}

std::vector<double> descriptor(const SoftPoolNet& model, const PointCloud& cloud) {
  const Completion c = model.complete(prepare_input(cloud, model.architecture().n_in));
  const auto d = c.fstar.data();
  return {d.begin(), d.end()};
}

namespace {

double average(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double EvalReport::chamfer_avg() const { return average(chamfer); }
double EvalReport::emd_avg() const { return average(emd); }

TextTable EvalReport::completion_table() const {
  TextTable t;
  t.header.push_back("Method");
  t.header.insert(t.header.end(), classes.begin(), classes.end());
  t.header.push_back("Avg");
  auto row = [&](const std::string& label, const std::vector<double>& values, double avg, double scale) {
    std::vector<std::string> r{method + " " + label};
    for (double v : values) r.push_back(fixed(v * scale, 2));
    r.push_back(fixed(avg * scale, 2));
    t.rows.push_back(std::move(r));
  };
  row("Chamfer x1e3", chamfer, chamfer_avg(), 1e3);
  if (!emd.empty()) row("EMD x1e2", emd, emd_avg(), 1e2);
  return t;
}

TextTable EvalReport::summary_table() const {
  TextTable t;
  t.header = {"Method", "Fidelity", "MMD", "Consistency", "Accuracy"};
  auto cell = [](const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : std::string("-"); };
  t.rows.push_back({method, cell(fidelity, 5), cell(mmd, 5), cell(consistency, 5), cell(accuracy, 4)});
  return t;
}

std::string EvalReport::to_csv() const { return completion_table().to_csv() + "\n" + summary_table().to_csv(); }

std::string EvalReport::to_text() const { return completion_table().to_text() + "\n" + summary_table().to_text(); }

EvalReport evaluate(const SoftPoolNet& model, std::span<const synth::ScanPair> test,
                    std::span<const synth::ScanPair> references, const EvalOptions& options,
                    const std::string& method) {
  if (test.empty()) throw InvalidInput("evaluate: empty test set");
  const std::size_t n_in = model.architecture().n_in;

  struct ItemMetrics {
    std::string cls;
    double chamfer = 0, emd = 0, fidelity = 0, mmd = 0, consistency = 0;
    bool has_mmd = false, has_consistency = false;
  };
  std::vector<ItemMetrics> items(test.size());

  std::map<std::string, std::vector<PointCloud>> refs_by_class;
  for (const auto& r : references) refs_by_class[std::string(synth::class_name(r.spec.kind))].push_back(r.complete);

  auto work = [&](std::size_t i) {
    const auto& pair = test[i];
    ItemMetrics m;
    m.cls = std::string(synth::class_name(pair.spec.kind));
    const std::uint64_t seed = derive_seed(options.seed, i);
    const PointCloud input = prepare_input(pair.partial, n_in, seed);
    const Completion out = model.complete(input);
    m.chamfer = chamfer_accelerated(out.fine, pair.complete);
    const std::size_t k = std::min({options.emd_points, out.fine.size(), pair.complete.size(), kMaxExactTransport});
    m.emd = earth_mover(resample(out.fine, k, derive_seed(seed, 1)), resample(pair.complete, k, derive_seed(seed, 2)));
    m.fidelity = fidelity(pair.partial, out.fine);
    if (auto it = refs_by_class.find(m.cls); it != refs_by_class.end()) {
      m.mmd = mmd(out.fine, it->second);
      m.has_mmd = true;
    }
    if (options.frames >= 2) {
      const auto surface = synth::sample_surface(pair.spec, 4 * n_in, derive_seed(seed, 3));
      std::vector<PointCloud> frames;
      for (std::size_t f = 0; f < options.frames; ++f) {
        const synth::Pose turn{static_cast<double>(f) * 5.0 * std::numbers::pi / 180.0, {0, 0, 0}};
        try {
          const PointCloud scan = synth::partial_scan(pair.spec, surface, turn.rotate(pair.view), derive_seed(seed, 4), n_in);
          frames.push_back(model.complete(scan).fine);
        } catch (const DegenerateView&) {
        }
      }
      if (frames.size() >= 2) {
        m.consistency = consistency(frames);
        m.has_consistency = true;
      }
    }
    items[i] = std::move(m);
  };
  parallel_for(test.size(), options.threads, work);

  EvalReport report;
  report.method = method;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_class;
  std::vector<double> fid, mm, cons;
  for (const auto& m : items) {
    if (std::find(report.classes.begin(), report.classes.end(), m.cls) == report.classes.end()) {
      report.classes.push_back(m.cls);
    }
    per_class[m.cls].first.push_back(m.chamfer);
    per_class[m.cls].second.push_back(m.emd);
    fid.push_back(m.fidelity);
    if (m.has_mmd) mm.push_back(m.mmd);
    if (m.has_consistency) cons.push_back(m.consistency);
  }
  for (const auto& c : report.classes) {
    report.chamfer.push_back(average(per_class[c].first));
    report.emd.push_back(average(per_class[c].second));
  }
  report.fidelity = average(fid);
  if (!mm.empty()) report.mmd = average(mm);
  if (!cons.empty()) report.consistency = average(cons);
  return report;
}

}  // namespace softpool::eval
