#include <doctest.h>

#include <cmath>
#include <limits>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "nhpg/error.hpp"
#include "nhpg/mcmc.hpp"
#include "nhpg/synthetic.hpp"
#include "oracles.hpp"

using namespace nhpg;
using doctest::Approx;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

SyntheticData small_dataset(const Scenario& s, std::size_t length, std::uint64_t seed) {
  Scenario copy = s;
  copy.length = length;
  Rng rng(seed);
  return generate(copy, rng);
}

McmcConfig short_config(std::size_t iterations, std::size_t chains = 1) {
  McmcConfig c;
  c.iterations = iterations;
  c.burn_in = iterations / 2;
  c.thin = 1;
  c.chains = chains;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("priors and chain settings are validated") {
  Priors p;
  CHECK_NOTHROW(p.validate(3));
  p.ig_shape = 1.0;
  CHECK_THROWS_AS(p.validate(3), Error);
  p = Priors{};
  p.prec_b = 0.0;
  CHECK_THROWS_AS(p.validate(3), Error);
  p = Priors{};
  p.mean_b = Eigen::Vector2d(1, 2);
  CHECK_THROWS_AS(p.validate(3), Error);

  McmcConfig c;
  CHECK(c.retained() == 5000);
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), Error);
  c = McmcConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = McmcConfig{};
  c.chains = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("flat-prior limit of the conjugate update is least squares") {
  Rng rng(1);
  const Eigen::Index n = 200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    y(i) = 0.3 - 1.2 * x(i, 1) + 0.5 * rng.normal();
  }
  const Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  Priors p;
  p.prec_b = 1e-12;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) mean += sample_state_params(x, y, p, rng).coef / draws;
  CHECK(mean(0) == Approx(ols(0)).epsilon(0.01));
  CHECK(mean(1) == Approx(ols(1)).epsilon(0.01));
}

TEST_CASE("conjugate draws have the closed-form posterior moments") {
  Rng rng(2);
  const Eigen::Index n = 30;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    y(i) = 1.0 + x(i, 1) + rng.normal();
  }
  Priors p;
  p.prec_b = 0.5;
  p.ig_shape = 3.0;
  p.ig_scale = 2.0;
  p.mean_b = Eigen::Vector2d(0.2, -0.1);
  const Eigen::MatrixXd lam = x.transpose() * x + p.prec_b * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd mn = lam.ldlt().solve(p.prec_b * p.mean_b + x.transpose() * y);
  const double an = p.ig_shape + n / 2.0;
  const double bn = p.ig_scale + 0.5 * ((y - x * mn).squaredNorm() + p.prec_b * (mn - p.mean_b).squaredNorm());

  std::vector<double> s2, b1;
  for (int i = 0; i < 100000; ++i) {
    const auto d = sample_state_params(x, y, p, rng);
    s2.push_back(d.sigma2);
    b1.push_back(d.coef(1));
  }
  const double s2_mean = bn / (an - 1.0);
  const double s2_var = bn * bn / ((an - 1.0) * (an - 1.0) * (an - 2.0));
  CHECK(std::abs(mean_of(s2) - s2_mean) < 4.0 * std::sqrt(s2_var / s2.size()));
  // Marginal of B is Student-t with 2 an dof, scale bn/an * lam^{-1}.
  const Eigen::MatrixXd cov = lam.inverse() * bn / (an - 1.0);
  CHECK(std::abs(mean_of(b1) - mn(1)) < 4.0 * std::sqrt(cov(1, 1) / b1.size()));
  CHECK(var_of(b1) == Approx(cov(1, 1)).epsilon(0.03));
}

TEST_CASE("an empty state is drawn from its prior") {
  Rng rng(3);
  Priors p;
  const Eigen::MatrixXd x(0, 3);
  const Eigen::VectorXd y(0);
  std::vector<double> s2, b0;
  for (int i = 0; i < 10000; ++i) {
    const auto d = sample_state_params(x, y, p, rng);
    s2.push_back(d.sigma2);
    b0.push_back(d.coef(0) / std::sqrt(d.sigma2 / p.prec_b));
  }
  // sigma2 ~ IG(a, b)  <=>  1 / sigma2 ~ Gamma(a, rate b); B / sd ~ N(0, 1).
  const boost::math::gamma_distribution<> precision(p.ig_shape, 1.0 / p.ig_scale);
  const double p_var = oracle::ks_one_sample(s2, [&](double v) { return 1.0 - boost::math::cdf(precision, 1.0 / v); });
  const boost::math::normal standard;
  const double p_coef = oracle::ks_one_sample(b0, [&](double v) { return boost::math::cdf(standard, v); });
  CHECK(p_var > 0.01);
  CHECK(p_coef > 0.01);
}

TEST_CASE("logistic draw given fixed weights matches the Gaussian conditional") {
  Rng rng(4);
  const Eigen::Index n = 40;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd kappa(n), omega(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    kappa(i) = rng.uniform() < 0.6 ? 0.5 : -0.5;
    omega(i) = 0.1 + rng.exponential() * 0.2;
  }
  const Eigen::Vector2d m0(0.3, -0.2);
  const Eigen::Vector2d prec(0.5, 2.0);
  const Eigen::MatrixXd v = (x.transpose() * omega.asDiagonal() * x + Eigen::MatrixXd(prec.asDiagonal())).inverse();
  const Eigen::VectorXd m = v * (x.transpose() * kappa + prec.cwiseProduct(m0));

  std::vector<double> b0, b1;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto b = sample_logistic_given_omega(x, kappa, omega, m0, prec, rng);
    b0.push_back(b(0));
    b1.push_back(b(1));
  }
  CHECK(std::abs(mean_of(b0) - m(0)) < 4.0 * std::sqrt(v(0, 0) / draws));
  CHECK(std::abs(mean_of(b1) - m(1)) < 4.0 * std::sqrt(v(1, 1) / draws));
  CHECK(var_of(b0) == Approx(v(0, 0)).epsilon(0.02));
  CHECK(var_of(b1) == Approx(v(1, 1)).epsilon(0.02));
}

TEST_CASE("pinned logistic coefficients stay at the prior mean") {
  Rng rng(5);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(10, 3);
  x.col(1).setLinSpaced(-1, 1);
  const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(10, 0.5);
  const Eigen::VectorXd omega = Eigen::VectorXd::Constant(10, 0.25);
  Eigen::Vector3d prec(1.0, INFINITY, INFINITY);
  Eigen::Vector3d m0(0.0, 0.7, 0.0);
  for (int i = 0; i < 100; ++i) {
    const auto b = sample_logistic_given_omega(x, kappa, omega, m0, prec, rng);
    CHECK(b(1) == 0.7);
    CHECK(b(2) == 0.0);
  }
}

TEST_CASE("balanced transitions center an intercept-only logistic posterior at zero") {
  // Alternating blocks: every state has as many stays as switches.
  const std::size_t n = 2001;
  ModelData data;
  data.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  data.design = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  StatePath path(n);
  for (std::size_t t = 0; t < n; ++t) path[t] = (t / 2) % 2 == 0 ? 1 : 2;
  Priors p;
  p.prec_beta = 1e-8;
  Rng rng(6);
  TransitionParams current{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  double sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    current = sample_logistic_params(data, path, current, p, rng);
    sum += current.beta1(0);
  }
  CHECK(std::abs(sum / draws) < 0.05);
}

TEST_CASE("chains are deterministic and keep their invariants") {
  const auto d = small_dataset(scenarios::well_separated(), 300, 9);
  const auto data = synthetic_model_data(d);
  const McmcConfig cfg = short_config(400, 2);
  const auto a = run_chain(data, Priors{}, cfg, 0);
  const auto b = run_chain(data, Priors{}, cfg, 0);
  const auto c = run_chain(data, Priors{}, cfg, 1);
  REQUIRE(a.sweeps.size() == cfg.retained());
  bool differs = false;
  for (std::size_t i = 0; i < a.sweeps.size(); ++i) {
    CHECK(a.sweeps[i].model.state1.coef == b.sweeps[i].model.state1.coef);
    CHECK(a.sweeps[i].path == b.sweeps[i].path);
    differs = differs || a.sweeps[i].model.state1.sigma2 != c.sweeps[i].model.state1.sigma2;
    const auto& s = a.sweeps[i];
    CHECK(s.model.state1.sigma2 >= s.model.state2.sigma2);
    CHECK(s.model.state2.sigma2 > 0.0);
    for (Eigen::Index t = 0; t < s.smoothed.rows(); ++t) CHECK(std::abs(s.smoothed.row(t).sum() - 1.0) < 1e-10);
  }
  CHECK(differs);

  const auto parallel = run_chains(data, Priors{}, cfg);
  REQUIRE(parallel.size() == 2);
  CHECK(parallel[1].sweeps.back().model.transitions.beta2 == c.sweeps.back().model.transitions.beta2);
}

TEST_CASE("intercept-only priors give time-constant transition probabilities") {
  const auto d = small_dataset(scenarios::homogeneous(), 300, 10);
  const auto data = synthetic_model_data(d);
  const Priors p = Priors::intercept_only_transitions(data.dimension());
  const auto chains = run_chains(data, p, short_config(300));
  for (const auto& s : chains[0].sweeps) {
    CHECK(s.model.transitions.beta1(1) == 0.0);
    CHECK(s.model.transitions.beta2(2) == 0.0);
  }
  const auto stay = posterior_stay_probabilities(chains, data);
  CHECK((stay.col(0).array() - stay(0, 0)).abs().maxCoeff() < 1e-8);
  CHECK((stay.col(1).array() - stay(0, 1)).abs().maxCoeff() < 1e-8);
}

TEST_CASE("identical states give a symmetric smoothed probability on average") {
  const auto d = small_dataset(scenarios::indistinguishable(), 400, 12);
  const auto data = synthetic_model_data(d);
  McmcConfig cfg = short_config(3000, 2);
  // Variance ordering breaks the label symmetry on purpose, so it is off here.
  cfg.order_by_variance = false;
  const auto summary = summarize(run_chains(data, Priors{}, cfg));
  double mean = 0.0;
  for (double p : summary.p_state1) mean += p / static_cast<double>(summary.p_state1.size());
  CHECK(std::abs(mean - 0.5) < 0.05);
}

TEST_CASE("summaries flag intervals that exclude zero") {
  McmcDraws chain;
  chain.covariate_names = {"x"};
  for (int i = 0; i < 200; ++i) {
    SweepDraw s;
    s.model.state1 = {Eigen::Vector2d(1.0 + 0.01 * i, (i % 2 ? 1.0 : -1.0) * i), 2.0};
    s.model.state2 = {Eigen::Vector2d(0.0, 0.0), 1.0};
    s.model.transitions = {Eigen::Vector2d(-1.0 - 0.01 * i, 0.0), Eigen::Vector2d(0.0, 0.0)};
    s.smoothed = ProbabilityMatrix::Constant(4, 2, 0.5);
    s.smoothed(0, 0) = 0.9;
    s.smoothed(0, 1) = 0.1;
    chain.sweeps.push_back(s);
  }
  chain.dates.resize(4);
  const auto sum = summarize({chain});
  REQUIRE(sum.coefficients.size() == 10);
  CHECK(sum.coefficients[0].significant);        // intercept of state 1, all positive
  CHECK_FALSE(sum.coefficients[1].significant);  // symmetric about zero
  CHECK(sum.coefficients[6].significant);        // beta1 intercept, all negative
  CHECK(sum.coefficients[0].q_low <= sum.coefficients[0].mean);
  CHECK(sum.coefficients[0].mean <= sum.coefficients[0].q_high);
  CHECK(sum.state1_count + sum.state2_count == 4);
  CHECK(sum.assigned[0] == 1);
  CHECK(sum.assigned[1] == 2);  // exactly 0.5 is not above the threshold

  chain.sweeps.resize(99);
  CHECK_THROWS_AS(summarize({chain}), Error);
}

TEST_CASE("type-7 sample quantiles") {
  CHECK(sample_quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(sample_quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(sample_quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(sample_quantile({0, 10}, 0.25) == 2.5);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), Error);
}
