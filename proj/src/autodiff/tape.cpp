#include "pinnforge/autodiff/tape.hpp"

#include <cmath>
#include <string>

#include "pinnforge/autodiff/scalar.hpp"
#include "pinnforge/error.hpp"

namespace pinnforge::ad {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Neg: return "neg";
    case OpKind::Scale: return "scale";
    case OpKind::Offset: return "offset";
    case OpKind::Sin: return "sin";
    case OpKind::Cos: return "cos";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Relu: return "relu";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Pow: return "pow";
  }
  return "unknown";
}

Var Tape::leaf(double value) {
  const auto index = push(Node{value, -1, -1, 0.0, 0.0, OpKind::Leaf});
  leaves_.push_back(index);
  return Var(this, static_cast<std::int64_t>(index), value);
}

std::size_t Tape::push(const Node& node) {
  nodes_.push_back(node);
  return nodes_.size() - 1;
}

void Tape::clear() {
  nodes_.clear();
  leaves_.clear();
}

void Tape::reserve(std::size_t nodes) { nodes_.reserve(nodes); }

std::vector<double> Tape::adjoints(std::size_t output) const {
  if (output >= nodes_.size()) {
    throw StructuralError("output node " + std::to_string(output) + " is not on the tape (" +
                          std::to_string(nodes_.size()) + " nodes)");
  }
  std::vector<double> adj(output + 1, 0.0);
  adj[output] = 1.0;
  for (std::size_t k = output + 1; k-- > 0;) {
    const Node& node = nodes_[k];
    const auto check = [&](std::int64_t operand) {
      if (operand >= static_cast<std::int64_t>(k) || operand < -1) {
        throw StructuralError("node " + std::to_string(k) + " (" + std::string(to_string(node.kind)) +
                              ") references operand " + std::to_string(operand));
      }
    };
    check(node.lhs);
    check(node.rhs);
    const double a = adj[k];
    if (a == 0.0) continue;
    if (node.lhs >= 0) adj[static_cast<std::size_t>(node.lhs)] += a * node.d_lhs;
    if (node.rhs >= 0) adj[static_cast<std::size_t>(node.rhs)] += a * node.d_rhs;
  }
  return adj;
}

Gradient grad(const Tape& tape, std::size_t output) {
  const auto adj = tape.adjoints(output);
  Gradient g;
  g.by_leaf.resize(tape.leaf_count(), 0.0);
  for (LeafId id = 0; id < tape.leaf_count(); ++id) {
    const auto node = tape.leaf_node(id);
    if (node < adj.size()) g.by_leaf[id] = adj[node];
  }
  return g;
}

Gradient grad(const Var& output) {
  if (output.is_constant()) {
    throw ContractViolation("grad of a constant: output is not recorded on any tape");
  }
  return grad(*output.tape(), output.index());
}

Var make_unary(OpKind kind, const Var& x, double value, double dx) {
  if (x.is_constant()) return Var(value);
  const auto index = x.tape_->push(Node{value, x.index_, -1, dx, 0.0, kind});
  return Var(x.tape_, static_cast<std::int64_t>(index), value);
}

Var make_binary(OpKind kind, const Var& x, const Var& y, double value, double dx, double dy) {
  if (x.is_constant() && y.is_constant()) return Var(value);
  if (y.is_constant()) return make_unary(kind, x, value, dx);
  if (x.is_constant()) return make_unary(kind, y, value, dy);
  if (x.tape_ != y.tape_) throw ContractViolation("operands recorded on different tapes");
  const auto index = x.tape_->push(Node{value, x.index_, y.index_, dx, dy, kind});
  return Var(x.tape_, static_cast<std::int64_t>(index), value);
}

Var operator+(const Var& x, const Var& y) {
  return make_binary(OpKind::Add, x, y, x.value() + y.value(), 1.0, 1.0);
}

Var operator-(const Var& x, const Var& y) {
  return make_binary(OpKind::Sub, x, y, x.value() - y.value(), 1.0, -1.0);
}

Var operator*(const Var& x, const Var& y) {
  return make_binary(OpKind::Mul, x, y, x.value() * y.value(), y.value(), x.value());
}

Var operator/(const Var& x, const Var& y) {
  if (y.value() == 0.0) throw NumericError("division by zero");
  const double inv = 1.0 / y.value();
  const double q = x.value() * inv;
  return make_binary(OpKind::Div, x, y, q, inv, -q * inv);
}

Var operator-(const Var& x) { return make_unary(OpKind::Neg, x, -x.value(), -1.0); }

Var sin(const Var& x) { return make_unary(OpKind::Sin, x, std::sin(x.value()), std::cos(x.value())); }

Var cos(const Var& x) { return make_unary(OpKind::Cos, x, std::cos(x.value()), -std::sin(x.value())); }

Var tanh(const Var& x) {
  const double t = std::tanh(x.value());
  return make_unary(OpKind::Tanh, x, t, 1.0 - t * t);
}

Var sigmoid(const Var& x) {
  const double s = ad::sigmoid(x.value());
  return make_unary(OpKind::Sigmoid, x, s, s * (1.0 - s));
}

Var relu(const Var& x) {
  const double v = x.value();
  return make_unary(OpKind::Relu, x, v > 0.0 ? v : 0.0, relu_step(v));
}

Var exp(const Var& x) {
  const double e = std::exp(x.value());
  return make_unary(OpKind::Exp, x, e, e);
}

Var log(const Var& x) {
  if (x.value() <= 0.0) throw NumericError("log of non-positive value");
  return make_unary(OpKind::Log, x, std::log(x.value()), 1.0 / x.value());
}

Var pow(const Var& x, double exponent) {
  const double v = x.value();
  const double p = std::pow(v, exponent);
  const double d = exponent == 0.0 ? 0.0 : exponent * std::pow(v, exponent - 1.0);
  return make_unary(OpKind::Pow, x, p, d);
}

Var pow(const Var& base, const Var& exponent) {
  const double b = base.value();
  const double e = exponent.value();
  if (b <= 0.0 && !exponent.is_constant()) {
    throw NumericError("pow with a differentiable exponent needs a positive base");
  }
  const double p = std::pow(b, e);
  const double db = e == 0.0 ? 0.0 : e * std::pow(b, e - 1.0);
  const double de = b > 0.0 ? p * std::log(b) : 0.0;
  return make_binary(OpKind::Pow, base, exponent, p, db, de);
}

}  // namespace pinnforge::ad
