#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nhpg/error.hpp"
#include "nhpg/forward_backward.hpp"
#include "nhpg/model.hpp"
#include "nhpg/rng.hpp"

namespace nhpg {

/// Prior hyperparameters.
///
/// Emission block (per state, Normal-Inverse-Gamma):
///   sigma2 ~ IG(ig_shape, ig_scale),  B | sigma2 ~ N(mean_b, sigma2 / prec_b I).
/// Transition block (per row): beta ~ N(mean_beta, diag(1 / beta_precision)).
///
/// Empty mean vectors mean zero. `prec_beta_diag`, when non-empty, overrides
/// `prec_beta` per coefficient; an infinite entry pins that coefficient at its
/// prior mean.
struct Priors {
  Eigen::VectorXd mean_b;
  double prec_b = 0.01;
  double ig_shape = 2.5;
  double ig_scale = 0.5;
  Eigen::VectorXd mean_beta;
  double prec_beta = 0.01;
  Eigen::VectorXd prec_beta_diag;

  void validate(std::size_t dimension) const;
  Eigen::VectorXd b_mean(std::size_t dimension) const;
  Eigen::VectorXd beta_mean(std::size_t dimension) const;
  Eigen::VectorXd beta_precision(std::size_t dimension) const;

  /// Pins every non-intercept transition coefficient at zero, reducing the
  /// model to a homogeneous two-state HMM.
  static Priors intercept_only_transitions(std::size_t dimension, Priors base);
  static Priors intercept_only_transitions(std::size_t dimension);
};

struct McmcConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 10000;
  std::size_t thin = 2;
  std::uint64_t seed = 20140101;
  std::size_t chains = 2;
  /// Relabel after every sweep so that sigma2_1 >= sigma2_2.
  bool order_by_variance = true;

  void validate() const;
  std::size_t retained() const { return (iterations - burn_in) / thin; }
};

/// One retained sweep.
struct SweepDraw {
  NhpgModel model;
  StatePath path;
  ProbabilityMatrix smoothed;  // exact P(Z_t = i | y, model) for this sweep's parameters
  double log_likelihood = 0.0;
};

struct McmcDraws {
  std::size_t chain = 0;
  std::vector<SweepDraw> sweeps;
  std::vector<Date> dates;
  std::vector<std::string> covariate_names;
  /// Sweeps in which some state held fewer than r + 2 observations, or had no
  /// outgoing transitions; its update then leaned entirely on the prior.
  std::size_t sparse_state_sweeps = 0;
  std::size_t label_swaps = 0;
};

/// A chain that hit a numerical failure. Carries the sweep index and the last
/// parameter state that completed a sweep.
class ChainFailure : public Error {
 public:
  ChainFailure(std::size_t sweep, NhpgModel last_valid, const std::string& what)
      : Error(ErrorCode::numerical, what), sweep_(sweep), last_valid_(std::move(last_valid)) {}

  std::size_t sweep() const noexcept { return sweep_; }
  const NhpgModel& last_valid() const noexcept { return last_valid_; }

 private:
  std::size_t sweep_;
  NhpgModel last_valid_;
};

struct MeanUpdateInfo {
  std::size_t occupancy1 = 0;
  std::size_t occupancy2 = 0;
  bool sparse = false;
};

/// Exact Normal-Inverse-Gamma draw for one state given its subsample.
StateParams sample_state_params(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Priors& priors,
                                Rng& rng);

/// Conjugate update of both emission regressions given the hidden path.
std::pair<StateParams, StateParams> sample_mean_params(const ModelData& data, const StatePath& path,
                                                       const Priors& priors, Rng& rng,
                                                       MeanUpdateInfo* info = nullptr);

/// Gaussian full conditional of logistic coefficients given Polya-Gamma
/// weights `omega` and centered responses `kappa` (= indicator - 1/2).
Eigen::VectorXd sample_logistic_given_omega(const Eigen::MatrixXd& design, const Eigen::VectorXd& kappa,
                                            const Eigen::VectorXd& omega, const Eigen::VectorXd& prior_mean,
                                            const Eigen::VectorXd& prior_precision, Rng& rng);

/// Polya-Gamma augmented update of both transition rows given the path: for
/// each transition out of state i, omega ~ PG(1, x_t' beta_i), then beta_i
/// from its Gaussian conditional.
TransitionParams sample_logistic_params(const ModelData& data, const StatePath& path,
                                        const TransitionParams& current, const Priors& priors, Rng& rng,
                                        bool* sparse = nullptr);

/// Deterministic starting point: high/low halves of the squared demeaned
/// series, followed by one conjugate and one logistic update.
NhpgModel initial_model(const ModelData& data, const Priors& priors, Rng& rng, StatePath* path = nullptr);

/// One chain; its random stream is derived from (config.seed, chain).
McmcDraws run_chain(const ModelData& data, const Priors& priors, const McmcConfig& config, std::size_t chain = 0);

/// `config.chains` independent chains run concurrently, returned in chain order.
std::vector<McmcDraws> run_chains(const ModelData& data, const Priors& priors, const McmcConfig& config);

enum class Block { mean, transition };

struct CoefficientSummary {
  std::string name;
  int state = 1;
  Block block = Block::mean;
  double mean = 0.0;
  double q_low = 0.0;
  double q_high = 0.0;
  bool significant = false;
};

struct PosteriorSummary {
  double level = 0.05;
  std::size_t draws = 0;
  std::vector<CoefficientSummary> coefficients;
  std::vector<Date> dates;
  std::vector<double> p_state1;  // mean smoothed P(Z_t = 1)
  std::vector<int> assigned;     // 1 if p_state1 > 0.5, else 2
  std::size_t state1_count = 0;
  std::size_t state2_count = 0;
  NhpgModel posterior_mean;
};

/// Pools retained sweeps of all chains. Intervals are equal-tailed at
/// 1 - level; a coefficient is significant when its interval excludes zero.
PosteriorSummary summarize(const std::vector<McmcDraws>& chains, double level = 0.05);

/// Posterior mean of p_11(t) and p_22(t) for every observation.
ProbabilityMatrix posterior_stay_probabilities(const std::vector<McmcDraws>& chains, const ModelData& data);

/// Linear-interpolation (type 7) sample quantile.
double sample_quantile(std::vector<double> values, double prob);

std::string block_name(Block block);

}  // namespace nhpg
