#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nhpg/rng.hpp"
#include "nhpg/series.hpp"

namespace nhpg {

/// Hidden-state labels, one per emission, each in {1, 2}.
using StatePath = std::vector<int>;

/// Emission regression for one hidden state: y_t ~ N(x_{t-1}' coef, sigma2).
struct StateParams {
  Eigen::VectorXd coef;  // intercept first
  double sigma2 = 1.0;
};

/// Logistic coefficients of the two self-transition probabilities. The
/// off-diagonal coefficients are identically zero and never stored.
struct TransitionParams {
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;

  const Eigen::VectorXd& beta(int state) const { return state == 1 ? beta1 : beta2; }
  Eigen::VectorXd& beta(int state) { return state == 1 ? beta1 : beta2; }
};

struct NhpgModel {
  StateParams state1;
  StateParams state2;
  TransitionParams transitions;
  std::vector<std::string> covariate_names;  // excludes the intercept

  /// Design dimension r (intercept included).
  std::size_t dimension() const { return static_cast<std::size_t>(state1.coef.size()); }
  const StateParams& state(int s) const { return s == 1 ? state1 : state2; }
  StateParams& state(int s) { return s == 1 ? state1 : state2; }

  /// Throws unless every block has dimension r, variances are positive and
  /// all entries finite.
  void validate() const;
  /// Exchanges the two state labels in every parameter block.
  void swap_labels();
};

/// Model-time view of a dated series and its covariates. Row t of `design` is
/// x_{t-1} = (1, covariates on the day before y_t): it is the emission mean
/// regressor of y_t and the transition regressor for the move into t.
struct ModelData {
  std::vector<Date> dates;
  Eigen::VectorXd y;
  Eigen::MatrixXd design;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t dimension() const { return static_cast<std::size_t>(design.cols()); }
};

/// Pairs each observation with the covariate row of the preceding panel date.
/// Observations without a preceding panel row are dropped, so a series that
/// shares the panel calendar loses its first value.
ModelData make_model_data(const DatedSeries& y, const CovariatePanel& panel);

struct TransitionRow {
  double stay;   // p_ii
  double leave;  // 1 - p_ii
};

/// Numerically stable logistic function.
double logistic(double eta);

/// Self- and cross-transition probabilities for design row x and coefficients beta.
TransitionRow transition_row(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& beta);

/// Gaussian log-density of y with mean x_prev' coef and variance sigma2.
double emission_logdensity(double y, const Eigen::Ref<const Eigen::VectorXd>& x_prev, const StateParams& state);

struct Simulation {
  DatedSeries y;
  StatePath path;
};

/// Forward simulation: the first observation is emitted on the second panel
/// date (its mean uses the first panel row); z1 is the state of that first
/// observation.
Simulation simulate(const NhpgModel& model, const CovariatePanel& covariates, int z1, Rng& rng);

nlohmann::json to_json(const NhpgModel& model);
NhpgModel model_from_json(const nlohmann::json& doc);

}  // namespace nhpg
