#include "nhpg/polya_gamma.hpp"

#include <cmath>
#include <numbers>

#include "nhpg/error.hpp"

namespace nhpg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;

// Draw from the inverse Gaussian IG(1/z, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
  double x = kTrunc + 1.0;
  if (1.0 / kTrunc > z) {
    // Mean beyond the truncation point: propose from the z = 0 law (a
    // truncated 1/chi^2_1 obtained from exponentials) and accept with
    // probability exp(-z^2 x / 2).
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      const double s = 1.0 + e1 * kTrunc;
      x = kTrunc / (s * s);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > kTrunc) {
      const double n = rng.normal();
      const double mu_y = mu * n * n;
      const double half_mu = 0.5 * mu;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

// log(a_n(x) / a_0(x)) for the alternating series of the Jacobi density.
double log_term_ratio(int n, double x) {
  const double nn = static_cast<double>(n);
  const double m = nn * (nn + 1.0);
  if (x > kTrunc) return std::log(2.0 * nn + 1.0) - 0.5 * kPi * kPi * x * m;
  return std::log(2.0 * nn + 1.0) - 2.0 * m / x;
}

// One draw of J*(1, z); PG(1, c) = J*(1, |c| / 2) / 4.
double sample_jacobi_star(double z, Rng& rng) {
  const double rate = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_exp = detail::exponential_proposal_mass(z);
  for (;;) {
    const double x =
        rng.uniform() < p_exp ? kTrunc + rng.exponential() / rate : truncated_inverse_gaussian(z, rng);
    // Partial sums of the series divided by its leading term, so the
    // comparison never under- or overflows.
    double s = 1.0;
    const double u = rng.uniform();
    for (int n = 1;; ++n) {
      const double term = std::exp(log_term_ratio(n, x));
      if (n % 2 == 1) {
        s -= term;
        if (u <= s) return x;
      } else {
        s += term;
        if (u > s) break;
      }
    }
  }
}

}  // namespace

namespace detail {

double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  const double inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv * (1.0 - 9.0 * inv))));
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

double exponential_proposal_mass(double z) {
  const double rate = 0.125 * kPi * kPi + 0.5 * z * z;
  const double root = std::sqrt(1.0 / kTrunc);
  const double b = root * (kTrunc * z - 1.0);
  const double a = -root * (kTrunc * z + 1.0);
  const double x0 = std::log(rate) + rate * kTrunc;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double hi = std::max(xa, xb);
  const double log_q_over_p = std::log(4.0 / kPi) + hi + std::log(std::exp(xa - hi) + std::exp(xb - hi));
  // 1 / (1 + q/p), evaluated without overflow.
  if (log_q_over_p > 0.0) {
    const double e = std::exp(-log_q_over_p);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(log_q_over_p));
}

}  // namespace detail

double sample_pg(const PgParams& params, Rng& rng) {
  if (params.b < 1 || !std::isfinite(params.c)) {
    throw invalid_argument("sample_pg: need integer b >= 1 and finite c");
  }
  const double z = 0.5 * std::fabs(params.c);
  double sum = 0.0;
  for (int i = 0; i < params.b; ++i) sum += 0.25 * sample_jacobi_star(z, rng);
  return sum;
}

double pg_mean(const PgParams& params) {
  const double b = params.b;
  const double c = std::fabs(params.c);
  if (c < 1e-6) return 0.25 * b * (1.0 - c * c / 12.0);
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_variance(const PgParams& params) {
  const double b = params.b;
  const double c = std::fabs(params.c);
  if (c < 1e-4) return b / 24.0;
  // sinh(c) / cosh^2(c/2) == 2 tanh(c/2); this form stays finite for large c.
  const double ch = std::cosh(0.5 * c);
  const double sech2 = std::isfinite(ch * ch) ? 1.0 / (ch * ch) : 0.0;
  return b * (2.0 * std::tanh(0.5 * c) - c * sech2) / (4.0 * c * c * c);
}

}  // namespace nhpg
