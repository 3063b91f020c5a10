#include "stratexp/noise.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stratexp {
namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kWindow = 50.0;

double hyperbolic_nu(double z) { return std::sqrt(1.0 + z * z); }

// Integral of exp(-sqrt(1 + x^2)) over the real line, integrated on unit
// panels over the window with the asymptotic tail appended.
double hyperbolic_mass() {
  auto f = [](double x) { return std::exp(-hyperbolic_nu(x)); };
  double half = 0.0;
  for (int k = 0; k < static_cast<int>(kWindow); ++k) {
    half += adaptive_simpson(f, k, k + 1.0, kQuadTol / kWindow);
  }
  half += std::exp(-hyperbolic_nu(kWindow)) * hyperbolic_nu(kWindow) / kWindow;
  return 2.0 * half;
}

// Hyperbolic cdf tabulated on [-window, window]; cdf values at the nodes are
// accumulated from per-interval Simpson rules starting at the left tail.
struct HyperbolicTable {
  static constexpr double kStep = 1e-3;
  std::vector<double> cdf;
  std::vector<double> pdf;
  double lo = -kWindow;

  explicit HyperbolicTable(const NoiseModel& model) {
    const auto n = static_cast<std::size_t>(2.0 * kWindow / kStep + 0.5) + 1;
    cdf.resize(n);
    pdf.resize(n);
    for (std::size_t k = 0; k < n; ++k) pdf[k] = model.pdf(lo + static_cast<double>(k) * kStep);
    cdf[0] = model.cdf(lo);
    for (std::size_t k = 1; k < n; ++k) {
      const double a = lo + static_cast<double>(k - 1) * kStep;
      cdf[k] = cdf[k - 1] + kStep / 6.0 * (pdf[k - 1] + 4.0 * model.pdf(a + 0.5 * kStep) + pdf[k]);
    }
  }

  double operator()(double z) const {
    const double u = (z - lo) / kStep;
    const auto k = static_cast<std::size_t>(u);
    const double s = u - static_cast<double>(k);
    const double s2 = s * s;
    const double s3 = s2 * s;
    // Cubic Hermite with the density as derivative.
    return (2 * s3 - 3 * s2 + 1) * cdf[k] + (s3 - 2 * s2 + s) * kStep * pdf[k] + (-2 * s3 + 3 * s2) * cdf[k + 1] +
           (s3 - s2) * kStep * pdf[k + 1];
  }
};

double checked_hazard(double pdf, double survival) {
  if (!(survival >= DBL_MIN)) {
    throw std::overflow_error("hazard_rate: survival function underflows; restrict the evaluation window");
  }
  return pdf / survival;
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Laplace: return "laplace";
    case NoiseKind::Hyperbolic: return "hyperbolic";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Gumbel: return "gumbel";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "laplace") return NoiseKind::Laplace;
  if (name == "hyperbolic") return NoiseKind::Hyperbolic;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "gumbel") return NoiseKind::Gumbel;
  throw std::invalid_argument("unknown noise model '" + std::string(name) + "'");
}

NoiseModel::NoiseModel(NoiseKind kind) : kind_(kind) {
  switch (kind) {
    case NoiseKind::Laplace: normalizer_ = 0.5; break;
    case NoiseKind::Gaussian: normalizer_ = 1.0 / std::sqrt(2.0 * std::numbers::pi); break;
    case NoiseKind::Gumbel: normalizer_ = 1.0; break;
    case NoiseKind::Hyperbolic: {
      static const double mass = hyperbolic_mass();
      normalizer_ = 1.0 / mass;
      break;
    }
  }
}

std::optional<double> NoiseModel::condition1_bound() const {
  if (kind_ == NoiseKind::Laplace || kind_ == NoiseKind::Hyperbolic) return 1.0;
  return std::nullopt;
}

double NoiseModel::nu(double z) const {
  switch (kind_) {
    case NoiseKind::Laplace: return std::abs(z);
    case NoiseKind::Hyperbolic: return hyperbolic_nu(z);
    case NoiseKind::Gaussian: return 0.5 * z * z;
    case NoiseKind::Gumbel: return z + std::exp(-z);
  }
  return 0.0;
}

double NoiseModel::nu_prime(double z) const {
  switch (kind_) {
    case NoiseKind::Laplace: return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case NoiseKind::Hyperbolic: return z / hyperbolic_nu(z);
    case NoiseKind::Gaussian: return z;
    case NoiseKind::Gumbel: return 1.0 - std::exp(-z);
  }
  return 0.0;
}

double NoiseModel::pdf(double z) const { return normalizer_ * std::exp(-nu(z)); }

double NoiseModel::hyperbolic_scaled_tail(double z) const {
  const double nz = hyperbolic_nu(z);
  auto f = [nz](double x) { return std::exp(nz - hyperbolic_nu(x)); };
  const double upper = std::max(kWindow, z + kWindow);
  double total = 0.0;
  for (double a = z; a < upper; a += 1.0) {
    total += adaptive_simpson(f, a, std::min(a + 1.0, upper), kQuadTol / kWindow);
  }
  // Remaining tail, below the Laplace envelope exp(nz - upper).
  total += std::exp(nz - hyperbolic_nu(upper)) * hyperbolic_nu(upper) / upper;
  return total;
}

double NoiseModel::survival(double z) const {
  switch (kind_) {
    case NoiseKind::Laplace: return z >= 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
    case NoiseKind::Gaussian: return 0.5 * std::erfc(z / std::numbers::sqrt2);
    case NoiseKind::Gumbel: return -std::expm1(-std::exp(-z));
    case NoiseKind::Hyperbolic:
      if (z >= 0.0) return pdf(z) * hyperbolic_scaled_tail(z);
      return 1.0 - pdf(z) * hyperbolic_scaled_tail(-z);
  }
  return 0.0;
}

double NoiseModel::cdf(double z) const {
  switch (kind_) {
    case NoiseKind::Laplace: return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    case NoiseKind::Gaussian: return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case NoiseKind::Gumbel: return std::exp(-std::exp(-z));
    case NoiseKind::Hyperbolic:
      if (z < 0.0) return pdf(z) * hyperbolic_scaled_tail(-z);
      return 1.0 - pdf(z) * hyperbolic_scaled_tail(z);
  }
  return 0.0;
}

double NoiseModel::cdf_fast(double z) const {
  if (kind_ != NoiseKind::Hyperbolic) return cdf(z);
  if (z <= -kWindow + 1e-9 || z >= kWindow - 1e-9) return cdf(z);
  static const HyperbolicTable table(*this);
  return table(z);
}

double NoiseModel::hazard_rate(double z) const {
  switch (kind_) {
    case NoiseKind::Laplace:
      if (z >= 0.0) {
        const double tail = 0.5 * std::exp(-z);
        return checked_hazard(tail, tail);
      }
      return checked_hazard(pdf(z), survival(z));
    case NoiseKind::Hyperbolic:
      if (z >= 0.0) {
        // pdf / survival with the common factor exp(-nu(z)) cancelled.
        if (!(pdf(z) >= DBL_MIN)) {
          throw std::overflow_error("hazard_rate: survival function underflows; restrict the evaluation window");
        }
        return 1.0 / hyperbolic_scaled_tail(z);
      }
      return checked_hazard(pdf(z), survival(z));
    case NoiseKind::Gaussian:
    case NoiseKind::Gumbel:
      return checked_hazard(pdf(z), survival(z));
  }
  return 0.0;
}

double NoiseModel::sample(Rng& rng) const {
  auto open_uniform = [&rng] {
    double u = 0.0;
    while (u == 0.0) u = uniform01(rng);
    return u;
  };
  auto laplace = [&] {
    const double u = open_uniform();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  };
  switch (kind_) {
    case NoiseKind::Laplace: return laplace();
    case NoiseKind::Hyperbolic:
      // Laplace proposal; density ratio exp(|z| - sqrt(1 + z^2)) lies in (0, 1].
      for (;;) {
        const double z = laplace();
        if (std::log(open_uniform()) < std::abs(z) - hyperbolic_nu(z)) return z;
      }
    case NoiseKind::Gaussian: return std::normal_distribution<double>(0.0, 1.0)(rng);
    case NoiseKind::Gumbel: return -std::log(-std::log(open_uniform()));
  }
  return 0.0;
}

Condition1Report check_condition1(const NoiseModel& model, std::span<const double> z_grid) {
  if (z_grid.empty()) throw std::invalid_argument("check_condition1: empty grid");
  Condition1Report report;
  for (double z : z_grid) {
    report.max_abs_nu_prime = std::max(report.max_abs_nu_prime, std::abs(model.nu_prime(z)));
  }
  const auto bound = model.condition1_bound();
  report.bounded = bound.has_value() && report.max_abs_nu_prime <= *bound;
  return report;
}

bool verify_hazard_bound(const NoiseModel& model, double bound, std::span<const double> z_grid) {
  const double tol = model.uses_quadrature() ? 1e-6 : 1e-9;
  return std::all_of(z_grid.begin(), z_grid.end(),
                     [&](double z) { return model.hazard_rate(z) <= bound * (1.0 + tol); });
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("make_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

}  // namespace stratexp
