#include <cmath>
#include <numbers>
#include <vector>

#include "pinnforge/error.hpp"
#include "pinnforge/oracles.hpp"

namespace pinnforge {

namespace {

constexpr double pi = std::numbers::pi;

// k-th derivative of sin(w s): w^k sin(w s + k pi/2).
double sin_derivative(double w, double s, int k) {
  return std::pow(w, k) * std::sin(w * s + 0.5 * pi * static_cast<double>(k % 4));
}

// k-th derivative of cos(w s): w^k cos(w s + k pi/2).
double cos_derivative(double w, double s, int k) {
  return std::pow(w, k) * std::cos(w * s + 0.5 * pi * static_cast<double>(k % 4));
}

}  // namespace

double transport_exact(double t, double x, double a) { return initial_transport(x - a * t); }

double fourier_coeff(int m, int n) {
  if (m < 1 || n < 1) throw DomainError("fourier_coeff: modes start at 1");
  if (m % 2 == 0 || n % 2 == 0) return 0.0;
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  return 64.0 / (mn * mn * mn * std::pow(pi, 6));
}

void SeriesTruncation::validate() const {
  if (max_mode < 1 || max_mode % 2 == 0) {
    throw ConfigError("series truncation must be an odd mode number >= 1, got " + std::to_string(max_mode));
  }
}

double SeriesTruncation::tail_bound() const {
  validate();
  // sum over odd m of 1/m^3 = (7/8) zeta(3)
  constexpr double zeta3 = 1.2020569031595942;
  const double full = 7.0 / 8.0 * zeta3;
  double partial = 0.0;
  for (int m = 1; m <= max_mode; m += 2) partial += 1.0 / std::pow(static_cast<double>(m), 3);
  const double scale = 64.0 / std::pow(pi, 6);
  return scale * (full * full - partial * partial);
}

double series_derivative(SeriesKind kind, double t, double x, double y, double a2, const SeriesTruncation& trunc,
                         DerivativeOrder order) {
  trunc.validate();
  const auto modes = static_cast<std::size_t>((trunc.max_mode + 1) / 2);
  std::vector<double> sx(modes), sy(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    const double w = pi * static_cast<double>(2 * i + 1);
    sx[i] = sin_derivative(w, x, order.x);
    sy[i] = sin_derivative(w, y, order.y);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < modes; ++i) {
    const int m = static_cast<int>(2 * i + 1);
    for (std::size_t j = 0; j < modes; ++j) {
      const int n = static_cast<int>(2 * j + 1);
      const double k2 = static_cast<double>(m * m + n * n);
      double time = 0.0;
      if (kind == SeriesKind::heat) {
        const double rate = -a2 * k2 * pi * pi;
        time = std::pow(rate, order.t) * std::exp(rate * t);
      } else {
        const double omega = std::sqrt(a2 * k2) * pi;
        time = cos_derivative(omega, t, order.t);
      }
      sum += fourier_coeff(m, n) * sx[i] * sy[j] * time;
    }
  }
  return sum;
}

double heat_series(double t, double x, double y, double a2, const SeriesTruncation& trunc) {
  return series_derivative(SeriesKind::heat, t, x, y, a2, trunc, {});
}

double wave_series(double t, double x, double y, double a2, const SeriesTruncation& trunc) {
  return series_derivative(SeriesKind::wave, t, x, y, a2, trunc, {});
}

}  // namespace pinnforge
