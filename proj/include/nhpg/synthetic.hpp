#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nhpg/mcmc.hpp"
#include "nhpg/model.hpp"
#include "nhpg/series.hpp"

namespace nhpg {

enum class CovariateKind { iid_normal, ar1, replay };

struct CovariateSpec {
  CovariateKind kind = CovariateKind::iid_normal;
  double ar_coefficient = 0.9;        // ar1 only; innovations keep unit marginal variance
  std::filesystem::path replay_path;  // replay only: wide CSV, first T + 1 rows used
};

struct Scenario {
  std::string name;
  NhpgModel truth;
  CovariateSpec covariates;
  std::size_t length = 2000;  // number of observations T
  std::vector<std::uint64_t> seeds{1};
  Date start = Date{std::chrono::year{2014} / 1 / 1};
  /// Multiplies the emission noise; 0 yields the regression means exactly.
  double noise_scale = 1.0;

  void validate() const;
};

struct SyntheticData {
  DatedSeries y;
  CovariatePanel covariates;  // T + 1 rows; row k drives observation k
  StatePath path;
};

/// Draws covariates, an initial state from the uniform law, and then the
/// hidden path and observations from the true model.
SyntheticData generate(const Scenario& scenario, Rng& rng);

/// Model-ready view of a synthetic dataset, without normalization.
ModelData synthetic_model_data(const SyntheticData& data);

struct RecoveryMetrics {
  std::size_t covered = 0;
  std::size_t coefficients = 0;
  double coverage = 0.0;
  std::vector<bool> covered_flags;  // in PosteriorSummary::coefficients order
  double accuracy = 0.0;
  double unaligned_accuracy = 0.0;
  bool labels_swapped = false;
  double brier = 0.0;
};

/// Coverage of the true parameters by the summary intervals, state accuracy
/// under the better of the two label assignments, and the Brier score of the
/// smoothed state-1 probability against the true path (after alignment).
RecoveryMetrics score_recovery(const PosteriorSummary& fit, const NhpgModel& truth, const StatePath& path);

namespace scenarios {

/// sigma2 = 4 vs 1, intercepts 3 noise units apart, covariate-driven transitions.
Scenario well_separated();
/// Same emissions, intercept-only transitions.
Scenario homogeneous();
/// Both states identical, transitions at one half.
Scenario indistinguishable();

}  // namespace scenarios

}  // namespace nhpg
