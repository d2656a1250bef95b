#pragma once

// Reverse-mode scalar tape.
//
// Every arithmetic operation on a taped `Var` appends one node holding its
// value, up to two operand indices and the local partial derivative with
// respect to each operand. Nodes are appended in evaluation order, so the tape
// is topologically sorted by construction and a single backward sweep
// computes the adjoint of every node.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pinnforge::ad {

enum class OpKind : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Scale,
  Offset,
  Sin,
  Cos,
  Tanh,
  Sigmoid,
  Relu,
  Exp,
  Log,
  Pow,
};

std::string_view to_string(OpKind kind);

struct Node {
  double value = 0.0;
  std::int64_t lhs = -1;
  std::int64_t rhs = -1;
  double d_lhs = 0.0;
  double d_rhs = 0.0;
  OpKind kind = OpKind::Leaf;
};

/// Ordinal of a registered parameter leaf (registration order, starting at 0).
using LeafId = std::size_t;

/// Partial derivatives of one output with respect to every registered leaf.
struct Gradient {
  std::vector<double> by_leaf;

  double operator[](LeafId id) const { return by_leaf.at(id); }
  std::size_t size() const noexcept { return by_leaf.size(); }
};

class Var;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Registers a differentiable leaf holding `value`.
  Var leaf(double value);

  /// Appends a node. Operand indices must refer to existing nodes; this is
  /// checked during the backward sweep, not here, so that hand-built tapes
  /// can be validated by `grad`.
  std::size_t push(const Node& node);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::span<const std::size_t> leaves() const noexcept { return leaves_; }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }

  /// Node index of leaf `id`.
  std::size_t leaf_node(LeafId id) const { return leaves_.at(id); }

  void clear();
  void reserve(std::size_t nodes);

  /// Adjoint of every node with respect to `output` from one reverse sweep.
  /// Throws StructuralError on dangling or forward-referencing operands.
  std::vector<double> adjoints(std::size_t output) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::size_t> leaves_;
};

/// d(output)/d(leaf) for every registered leaf.
Gradient grad(const Tape& tape, std::size_t output);
Gradient grad(const Var& output);

/// Scalar that is either a plain constant or a node on a tape.
///
/// Constants carry no tape pointer, so mixing them with taped values adds no
/// nodes for the constant side.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::size_t index() const noexcept { return static_cast<std::size_t>(index_); }

 private:
  friend class Tape;
  friend Var make_unary(OpKind, const Var&, double, double);
  friend Var make_binary(OpKind, const Var&, const Var&, double, double, double);

  Var(Tape* tape, std::int64_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::int64_t index_ = -1;
  double value_ = 0.0;
};

Var make_unary(OpKind kind, const Var& x, double value, double dx);
Var make_binary(OpKind kind, const Var& x, const Var& y, double value, double dx, double dy);

Var operator+(const Var& x, const Var& y);
Var operator-(const Var& x, const Var& y);
Var operator*(const Var& x, const Var& y);
Var operator/(const Var& x, const Var& y);
Var operator-(const Var& x);

inline Var& operator+=(Var& x, const Var& y) { return x = x + y; }
inline Var& operator-=(Var& x, const Var& y) { return x = x - y; }
inline Var& operator*=(Var& x, const Var& y) { return x = x * y; }
inline Var& operator/=(Var& x, const Var& y) { return x = x / y; }

Var sin(const Var& x);
Var cos(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var relu(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var pow(const Var& x, double exponent);
Var pow(const Var& base, const Var& exponent);

inline double value_of(double x) noexcept { return x; }
inline double value_of(const Var& x) noexcept { return x.value(); }

}  // namespace pinnforge::ad
