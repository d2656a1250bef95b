#pragma once

// First-order forward-mode jets.
//
// A Jet carries a value and its gradient with respect to an ordered input
// basis (t, x, y, ...). The scalar type is either `double` (plain forward
// mode) or `ad::Var`, in which case every value and every partial is recorded
// on a tape so that reverse mode can differentiate through input derivatives.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinnforge/autodiff/scalar.hpp"
#include "pinnforge/autodiff/tape.hpp"
#include "pinnforge/error.hpp"

namespace pinnforge::ad {

/// Identifies the input basis a jet is differentiated against.
using BasisTag = int;

template <class T>
class Jet {
 public:
  Jet() = default;
  Jet(T value, std::vector<T> d1, BasisTag tag = 0) : value_(std::move(value)), d1_(std::move(d1)), tag_(tag) {}

  /// A constant over a basis of dimension `dim`: zero gradient.
  static Jet constant(T value, std::size_t dim, BasisTag tag = 0) {
    return Jet(std::move(value), std::vector<T>(dim, T(0.0)), tag);
  }

  const T& value() const noexcept { return value_; }
  const std::vector<T>& d1() const noexcept { return d1_; }
  std::vector<T>& d1() noexcept { return d1_; }
  const T& d(std::size_t i) const { return d1_.at(i); }
  std::size_t dim() const noexcept { return d1_.size(); }
  BasisTag tag() const noexcept { return tag_; }

 private:
  T value_{};
  std::vector<T> d1_;
  BasisTag tag_ = 0;
};

/// Seeds input coordinate `i`: value coords[i], gradient e_i.
template <class T = double>
Jet<T> lift_input(std::span<const double> coords, std::size_t i, BasisTag tag = 0) {
  if (i >= coords.size()) {
    throw DomainError("lift_input: index " + std::to_string(i) + " out of range for " +
                      std::to_string(coords.size()) + " coordinates");
  }
  std::vector<T> d1(coords.size(), T(0.0));
  d1[i] = T(1.0);
  return Jet<T>(T(coords[i]), std::move(d1), tag);
}

namespace detail {

template <class T>
void check_same_basis(const Jet<T>& a, const Jet<T>& b) {
  if (a.tag() != b.tag() || a.dim() != b.dim()) {
    throw ContractViolation("jet operands differentiate against different input bases (tag " +
                            std::to_string(a.tag()) + " vs " + std::to_string(b.tag()) + ")");
  }
}

/// f(u) with f'(u) supplied: gradient is f'(u) * du.
template <class T>
Jet<T> chain(const Jet<T>& u, T value, const T& slope) {
  std::vector<T> d1;
  d1.reserve(u.dim());
  for (const auto& du : u.d1()) d1.push_back(slope * du);
  return Jet<T>(std::move(value), std::move(d1), u.tag());
}

}  // namespace detail

template <class T>
Jet<T> operator+(const Jet<T>& a, const Jet<T>& b) {
  detail::check_same_basis(a, b);
  std::vector<T> d1(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d1[i] = a.d1()[i] + b.d1()[i];
  return Jet<T>(a.value() + b.value(), std::move(d1), a.tag());
}

template <class T>
Jet<T> operator-(const Jet<T>& a, const Jet<T>& b) {
  detail::check_same_basis(a, b);
  std::vector<T> d1(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d1[i] = a.d1()[i] - b.d1()[i];
  return Jet<T>(a.value() - b.value(), std::move(d1), a.tag());
}

template <class T>
Jet<T> operator-(const Jet<T>& a) {
  std::vector<T> d1(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d1[i] = -a.d1()[i];
  return Jet<T>(-a.value(), std::move(d1), a.tag());
}

template <class T>
Jet<T> operator*(const Jet<T>& a, const Jet<T>& b) {
  detail::check_same_basis(a, b);
  std::vector<T> d1(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d1[i] = a.d1()[i] * b.value() + a.value() * b.d1()[i];
  return Jet<T>(a.value() * b.value(), std::move(d1), a.tag());
}

template <class T>
Jet<T> operator/(const Jet<T>& a, const Jet<T>& b) {
  detail::check_same_basis(a, b);
  if (value_of(b.value()) == 0.0) throw NumericError("jet division by a zero-valued denominator");
  const T q = a.value() / b.value();
  std::vector<T> d1(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d1[i] = (a.d1()[i] - q * b.d1()[i]) / b.value();
  return Jet<T>(q, std::move(d1), a.tag());
}

// Scalar-jet mixes. The scalar is a constant with respect to the input basis.

template <class T>
Jet<T> operator*(const T& s, const Jet<T>& a) {
  return detail::chain(a, s * a.value(), s);
}

template <class T>
Jet<T> operator*(const Jet<T>& a, const T& s) {
  return s * a;
}

template <class T>
Jet<T> operator+(const Jet<T>& a, const T& s) {
  return Jet<T>(a.value() + s, a.d1(), a.tag());
}

template <class T>
Jet<T> operator-(const Jet<T>& a, const T& s) {
  return Jet<T>(a.value() - s, a.d1(), a.tag());
}

template <class T>
Jet<T> sin(const Jet<T>& u) {
  using std::cos;
  using std::sin;
  return detail::chain(u, T(sin(u.value())), T(cos(u.value())));
}

template <class T>
Jet<T> cos(const Jet<T>& u) {
  using std::cos;
  using std::sin;
  return detail::chain(u, T(cos(u.value())), T(-sin(u.value())));
}

template <class T>
Jet<T> tanh(const Jet<T>& u) {
  using std::tanh;
  const T t = tanh(u.value());
  return detail::chain(u, t, T(T(1.0) - t * t));
}

template <class T>
Jet<T> sigmoid(const Jet<T>& u) {
  const T s = ad::sigmoid(u.value());
  return detail::chain(u, s, T(s * (T(1.0) - s)));
}

template <class T>
Jet<T> relu(const Jet<T>& u) {
  // The step is piecewise constant, so it carries no tape node.
  const double step = relu_step(value_of(u.value()));
  return detail::chain(u, T(step * u.value()), T(step));
}

template <class T>
Jet<T> exp(const Jet<T>& u) {
  using std::exp;
  const T e = exp(u.value());
  return detail::chain(u, e, e);
}

template <class T>
Jet<T> pow(const Jet<T>& u, double exponent) {
  using std::pow;
  const T p = pow(u.value(), exponent);
  const T slope = exponent == 0.0 ? T(0.0) : T(exponent * pow(u.value(), exponent - 1.0));
  return detail::chain(u, p, slope);
}

/// u^v for jets; requires a positive base value.
template <class T>
Jet<T> pow(const Jet<T>& u, const Jet<T>& v) {
  using std::log;
  detail::check_same_basis(u, v);
  if (value_of(u.value()) <= 0.0) throw NumericError("jet pow needs a positive base");
  return exp(v * Jet<T>(log(u.value()), [&] {
               std::vector<T> d1(u.dim());
               for (std::size_t i = 0; i < u.dim(); ++i) d1[i] = u.d1()[i] / u.value();
               return d1;
             }(), u.tag()));
}

}  // namespace pinnforge::ad
