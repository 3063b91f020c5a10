#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stratexp/rng.hpp"

namespace stratexp {

enum class NoiseKind { Laplace, Hyperbolic, Gaussian, Gumbel };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// Unit-scale perturbation law with density proportional to exp(-nu(z)).
///
/// Laplace and Hyperbolic satisfy |nu'(z)| <= 1 everywhere and carry that
/// bound; Gaussian and Gumbel have unbounded |nu'| and exist as negative
/// controls. Gumbel is the only asymmetric member.
///
/// Values are immutable and can be shared across threads.
class NoiseModel {
 public:
  explicit NoiseModel(NoiseKind kind);

  NoiseKind kind() const { return kind_; }
  std::optional<double> condition1_bound() const;

  double nu(double z) const;
  /// Analytic derivative of nu; 0 at the Laplace kink.
  double nu_prime(double z) const;

  double normalizer() const { return normalizer_; }
  double pdf(double z) const;
  double cdf(double z) const;
  /// cdf for bulk evaluation: identical to cdf() for closed forms, a cached
  /// Hermite-interpolated table (error below 1e-11) for Hyperbolic.
  double cdf_fast(double z) const;
  /// 1 - cdf(z), computed without cancellation.
  double survival(double z) const;
  /// pdf(z) / survival(z). Throws std::overflow_error when the survival
  /// function underflows.
  double hazard_rate(double z) const;
  /// True when cdf/survival rely on numeric quadrature.
  bool uses_quadrature() const { return kind_ == NoiseKind::Hyperbolic; }

  double sample(Rng& rng) const;

 private:
  // Hyperbolic: integral of exp(nu(z) - nu(x)) over [z, inf) for z >= 0.
  double hyperbolic_scaled_tail(double z) const;

  NoiseKind kind_;
  double normalizer_;
};

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50);

struct Condition1Report {
  double max_abs_nu_prime = 0.0;
  bool bounded = false;
};

Condition1Report check_condition1(const NoiseModel& model, std::span<const double> z_grid);

/// True iff hazard_rate(z) <= bound * (1 + tol) on every grid point, where tol
/// is 1e-9 for closed-form cdfs and 1e-6 for quadrature.
bool verify_hazard_bound(const NoiseModel& model, double bound, std::span<const double> z_grid);

/// Inclusive grid lo, lo + step, ..., hi (hi included up to rounding).
std::vector<double> make_grid(double lo, double hi, double step);

// ---------------------------------------------------------------------------

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace stratexp
