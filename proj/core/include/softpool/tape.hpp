#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "softpool/tensor.hpp"

namespace softpool::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive and has not been reset.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode record of a computation.
///
/// Nodes are appended in evaluation order, which is a topological order, so
/// backward() walks ids downward from the loss and visits each node once.
/// A tape is single-owner: record, call backward() once, then read grads.
/// Recording onto or differentiating a consumed tape throws; call reset() to
/// start a new forward pass.
class Tape {
 public:
  /// Local gradient step of one node: reads out_grad(self) and accumulates
  /// into grad_sink(parent) for each parent that requires a gradient.
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Appends an op result. Throws NumericError if `value` has NaN/Inf.
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward, const char* op);
  Var record(Tensor value, std::span<const Var> parents, Backward backward, const char* op);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every requires-grad node.
  void backward(const Var& loss);

  /// Gradient of the last backward() with respect to `v`; zeros when no
  /// gradient reached it.
  Tensor grad(const Var& v) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Tensor& out_grad(std::size_t id) const { return nodes_[id].grad; }
  /// Gradient accumulator for `id`, allocated on first use; nullptr when the
  /// node does not require a gradient.
  Tensor* grad_sink(std::size_t id);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }
  std::size_t backward_visits() const noexcept { return visits_; }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_[id].parents; }
  const std::string& op_name(std::size_t id) const { return nodes_[id].op; }

  void reset();

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> parents;
    Backward backward;
    std::string op;
  };

  void check_open() const;
  Var push(Node node);

  std::vector<Node> nodes_;
  bool consumed_ = false;
  std::size_t visits_ = 0;
};

/// Records discrete choices (sort orders, nearest-neighbour matches,
/// assignments, set memberships) so a later evaluation can replay them.
///
/// Gradients treat these choices as locally constant; replaying them while
/// perturbing parameters makes finite differences measure exactly the same
/// piece of the piecewise-smooth function.
class DecisionLog {
 public:
  enum class Mode { Record, Replay };

  Mode mode() const noexcept { return mode_; }
  void start_replay() {
    mode_ = Mode::Replay;
    cursor_ = 0;
  }
  std::size_t size() const noexcept { return entries_.size(); }

  template <typename Compute>
  std::vector<std::size_t> resolve(Compute&& compute) {
    if (mode_ == Mode::Record) {
      entries_.push_back(compute());
      return entries_.back();
    }
    return next();
  }

 private:
  std::vector<std::size_t> next();

  Mode mode_ = Mode::Record;
  std::vector<std::vector<std::size_t>> entries_;
  std::size_t cursor_ = 0;
};

/// Runs `compute` directly when `log` is null, otherwise through the log.
template <typename Compute>
std::vector<std::size_t> decide(DecisionLog* log, Compute&& compute) {
  if (!log) return compute();
  return log->resolve(std::forward<Compute>(compute));
}

}  // namespace softpool::ad
