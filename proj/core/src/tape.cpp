#include "softpool/tape.hpp"

#include "softpool/errors.hpp"

namespace softpool::ad {

const Tensor& Var::value() const {
  if (!tape_) throw InvalidInput("use of an unbound Var");
  return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

void Tape::check_open() const {
  if (consumed_) throw InvalidInput("tape already consumed by backward(); reset() before recording");
}

Var Tape::push(Node node) {
  check_open();
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.op = "variable";
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward, const char* op) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward), op);
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward, const char* op) {
  if (!value.all_finite()) throw NumericError(std::string(op) + " produced a non-finite value");
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (const Var& p : parents) {
    if (&p.tape() != this) throw InvalidInput(std::string(op) + ": operands live on different tapes");
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Tensor* Tape::grad_sink(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::backward(const Var& loss) {
  check_open();
  if (&loss.tape() != this) throw InvalidInput("backward: loss recorded on another tape");
  if (loss.value().size() != 1) {
    throw InvalidInput("backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  }
  if (!nodes_[loss.id()].requires_grad) {
    throw InvalidInput("backward: loss does not depend on any variable");
  }
  grad_sink(loss.id())->data()[0] = 1.0;
  visits_ = 0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.has_grad) continue;
    ++visits_;
    if (n.backward) n.backward(*this, id);
  }
  consumed_ = true;
}

Tensor Tape::grad(const Var& v) const {
  const Node& n = nodes_.at(v.id());
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
  visits_ = 0;
}

std::vector<std::size_t> DecisionLog::next() {
  if (cursor_ >= entries_.size()) throw InvalidInput("DecisionLog: replay ran past the recorded decisions");
  return entries_[cursor_++];
}

}  // namespace softpool::ad
