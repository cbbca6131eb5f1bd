#include "softpool/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "softpool/errors.hpp"

namespace softpool::ad {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport finite_diff_check(const ScalarFunction& f, std::span<const Tensor> params,
                                  std::span<const Tensor> analytic, double h) {
  if (params.size() != analytic.size()) throw InvalidInput("finite_diff_check: gradient count mismatch");
  std::vector<Tensor> probe(params.begin(), params.end());
  GradCheckReport report;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    if (analytic[p].shape() != probe[p].shape()) throw ShapeError("finite_diff_check: gradient shape mismatch");
    for (std::size_t i = 0; i < probe[p].size(); ++i) {
      const double saved = probe[p][i];
      probe[p][i] = saved + h;
      const double up = f(probe);
      probe[p][i] = saved - h;
      const double down = f(probe);
      probe[p][i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[p][i], numeric);
      ++report.coordinates;
      if (err > report.max_relative_error || report.coordinates == 1) {
        report.max_relative_error = err;
        report.parameter = p;
        report.element = i;
        report.analytic = analytic[p][i];
        report.numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport check_gradients(const GraphFunction& build, std::span<const Tensor> params, double h) {
  DecisionLog decisions;
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& p : params) vars.push_back(tape.variable(p));
    const Var loss = build(tape, vars, &decisions);
    tape.backward(loss);
    for (const Var& v : vars) analytic.push_back(tape.grad(v));
  }
  auto f = [&](std::span<const Tensor> probe) {
    decisions.start_replay();
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& p : probe) vars.push_back(tape.constant(p));
    return build(tape, vars, &decisions).value().item();
  };
  return finite_diff_check(f, params, analytic, h);
}

}  // namespace softpool::ad
