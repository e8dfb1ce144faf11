#include "nhpg/synthetic.hpp"

#include <cmath>

#include "nhpg/csv.hpp"
#include "nhpg/error.hpp"

namespace nhpg {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

CovariatePanel replay_panel(const CovariateSpec& spec, std::size_t rows, std::size_t columns) {
  const DatedTable table = read_dated_table(spec.replay_path);
  if (table.columns.size() < columns) {
    throw invalid_argument("scenario: replay file has " + std::to_string(table.columns.size()) +
                           " covariates, model needs " + std::to_string(columns));
  }
  if (table.dates.size() < rows) throw invalid_argument("scenario: replay file has too few rows");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns));
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t j = 0; j < columns; ++j) {
      const auto& cell = table.cells[t][j];
      if (!cell) throw invalid_argument("scenario: replay file has a missing cell on " + format_date(table.dates[t]));
      values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = *cell;
    }
  }
  std::vector<Date> dates(table.dates.begin(), table.dates.begin() + static_cast<std::ptrdiff_t>(rows));
  std::vector<std::string> names(table.columns.begin(), table.columns.begin() + static_cast<std::ptrdiff_t>(columns));
  return zscore_normalize(CovariatePanel(std::move(dates), std::move(names), std::move(values)));
}

}  // namespace

void Scenario::validate() const {
  if (length < 100) throw invalid_argument("scenario " + name + ": T must be at least 100");
  if (seeds.empty()) throw invalid_argument("scenario " + name + ": no seeds");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw invalid_argument("scenario " + name + ": noise_scale must be non-negative");
  }
  if (covariates.kind == CovariateKind::ar1 && !(std::abs(covariates.ar_coefficient) < 1.0)) {
    throw invalid_argument("scenario " + name + ": AR coefficient must lie in (-1, 1)");
  }
  truth.validate();
}

SyntheticData generate(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const std::size_t rows = scenario.length + 1;
  const std::size_t k = scenario.truth.dimension() - 1;
  CovariatePanel panel;
  if (scenario.covariates.kind == CovariateKind::replay) {
    panel = replay_panel(scenario.covariates, rows, k);
  } else {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    const double phi = scenario.covariates.kind == CovariateKind::ar1 ? scenario.covariates.ar_coefficient : 0.0;
    const double innovation_sd = std::sqrt(1.0 - phi * phi);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      double x = rng.normal();
      for (Eigen::Index t = 0; t < values.rows(); ++t) {
        if (t > 0) x = phi * x + innovation_sd * rng.normal();
        values(t, j) = x;
      }
    }
    std::vector<Date> dates(rows);
    for (std::size_t t = 0; t < rows; ++t) dates[t] = scenario.start + std::chrono::days(static_cast<int>(t));
    std::vector<std::string> names = scenario.truth.covariate_names;
    if (names.size() != k) {
      names.clear();
      for (std::size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
    }
    panel = CovariatePanel(std::move(dates), std::move(names), std::move(values));
  }

  const int z1 = rng.uniform() < 0.5 ? 1 : 2;
  Simulation sim = simulate(scenario.truth, panel, z1, rng);
  if (scenario.noise_scale != 1.0) {
    std::vector<double> y = sim.y.values();
    for (std::size_t t = 0; t < y.size(); ++t) {
      const double mean = panel.design_row(t).dot(scenario.truth.state(sim.path[t]).coef);
      y[t] = mean + scenario.noise_scale * (y[t] - mean);
    }
    sim.y = DatedSeries(sim.y.name(), sim.y.dates(), std::move(y));
  }
  return {std::move(sim.y), std::move(panel), std::move(sim.path)};
}

ModelData synthetic_model_data(const SyntheticData& data) { return make_model_data(data.y, data.covariates); }

RecoveryMetrics score_recovery(const PosteriorSummary& fit, const NhpgModel& truth, const StatePath& path) {
  const std::size_t n = path.size();
  if (fit.p_state1.size() != n || fit.assigned.size() != n) {
    throw invalid_argument("score_recovery: fit and truth differ in length");
  }
  const std::size_t r = truth.dimension();
  if (fit.coefficients.size() != 4 * r + 2) throw invalid_argument("score_recovery: fit and truth differ in dimension");

  RecoveryMetrics m;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < n; ++t) agree += fit.assigned[t] == path[t] ? 1 : 0;
  m.unaligned_accuracy = static_cast<double>(agree) / static_cast<double>(n);
  m.labels_swapped = agree * 2 < n;
  m.accuracy = m.labels_swapped ? 1.0 - m.unaligned_accuracy : m.unaligned_accuracy;

  double brier = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double p1 = m.labels_swapped ? 1.0 - fit.p_state1[t] : fit.p_state1[t];
    const double d = p1 - (path[t] == 1 ? 1.0 : 0.0);
    brier += d * d;
  }
  m.brier = brier / static_cast<double>(n);

  // Coefficients follow summarize(): per state (b[0..r), sigma2), then per state beta[0..r).
  const std::size_t mean_block = 2 * (r + 1);
  for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
    const auto& c = fit.coefficients[i];
    const int s = m.labels_swapped ? 3 - c.state : c.state;
    double value = 0.0;
    if (i < mean_block) {
      const std::size_t j = i % (r + 1);
      value = j == r ? truth.state(s).sigma2 : truth.state(s).coef(static_cast<Eigen::Index>(j));
    } else {
      value = truth.transitions.beta(s)(static_cast<Eigen::Index>((i - mean_block) % r));
    }
    const bool inside = c.q_low <= value && value <= c.q_high;
    m.covered_flags.push_back(inside);
    m.covered += inside ? 1 : 0;
  }
  m.coefficients = fit.coefficients.size();
  m.coverage = static_cast<double>(m.covered) / static_cast<double>(m.coefficients);
  return m;
}

namespace scenarios {

Scenario well_separated() {
  Scenario s;
  s.name = "well-separated";
  s.truth.state1 = {vec({1.5, 0.5, -0.3}), 4.0};
  s.truth.state2 = {vec({-1.5, 0.2, 0.4}), 1.0};
  s.truth.transitions.beta1 = vec({2.0, 0.8, -0.5});
  s.truth.transitions.beta2 = vec({2.5, -0.6, 0.4});
  s.truth.covariate_names = {"x1", "x2"};
  s.length = 2000;
  s.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return s;
}

Scenario homogeneous() {
  Scenario s = well_separated();
  s.name = "homogeneous";
  s.truth.transitions.beta1 = vec({1.5, 0.0, 0.0});
  s.truth.transitions.beta2 = vec({2.0, 0.0, 0.0});
  return s;
}

Scenario indistinguishable() {
  Scenario s = well_separated();
  s.name = "indistinguishable";
  s.truth.state1 = {vec({0.0, 0.5, -0.3}), 1.0};
  s.truth.state2 = s.truth.state1;
  s.truth.transitions.beta1 = vec({0.0, 0.0, 0.0});
  s.truth.transitions.beta2 = vec({0.0, 0.0, 0.0});
  return s;
}

}  // namespace scenarios

}  // namespace nhpg
