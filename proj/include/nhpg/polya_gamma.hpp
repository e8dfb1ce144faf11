#pragma once

#include "nhpg/rng.hpp"

namespace nhpg {

/// Parameters of the Polya-Gamma distribution PG(b, c): integer shape b >= 1
/// and real tilt c.
struct PgParams {
  int b = 1;
  double c = 0.0;
};

/// Exact draw from PG(b, c). PG(1, c) uses the alternating-series
/// accept-reject sampler on the Jacobi density with truncation point 0.64;
/// larger b is the sum of b independent PG(1, c) draws.
double sample_pg(const PgParams& params, Rng& rng);

/// E[PG(b, c)] = b / (2c) * tanh(c / 2), with the c -> 0 limit b / 4.
double pg_mean(const PgParams& params);

/// Variance of PG(b, c).
double pg_variance(const PgParams& params);

namespace detail {

/// log Phi(x) for the standard normal CDF, stable far into the lower tail.
double log_normal_cdf(double x);

/// Probability that the PG(1, c) proposal comes from the truncated
/// exponential piece rather than the truncated inverse Gaussian piece;
/// `z` is |c| / 2.
double exponential_proposal_mass(double z);

}  // namespace detail

}  // namespace nhpg
