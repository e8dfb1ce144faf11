#pragma once

#include <Eigen/Dense>

#include "nhpg/model.hpp"
#include "nhpg/rng.hpp"

namespace nhpg {

using ProbabilityMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Scaled forward variables: row t is P(Z_t = i | y_1..y_t), and
/// `log_likelihood` the accumulated log normalizer log p(y_1..y_T).
struct ForwardLattice {
  ProbabilityMatrix filtered;
  double log_likelihood = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(filtered.rows()); }
};

/// Everything the recursions need from (model, data): per-observation emission
/// log-densities and the self-transition probability of each state for the
/// move into t (row 0 is unused; the initial law is uniform).
struct HmmInputs {
  ProbabilityMatrix log_emission;
  ProbabilityMatrix stay;
};

HmmInputs hmm_inputs(const NhpgModel& model, const ModelData& data);

/// Forward recursion with per-step normalization. Throws a numerical error
/// naming the first observation whose likelihood is not finite.
ForwardLattice forward_filter(const HmmInputs& inputs);
ForwardLattice forward_pass(const NhpgModel& model, const ModelData& data);

/// Draws z_T from the last filtered row, then each earlier z_t from
/// P(z_t | y_1..y_t, z_{t+1}) -- an exact joint draw from the path posterior.
StatePath backward_sample(const ForwardLattice& lattice, const HmmInputs& inputs, Rng& rng);
StatePath backward_sample(const ForwardLattice& lattice, const NhpgModel& model, const ModelData& data, Rng& rng);

/// P(Z_t = i | y_1..y_T) by the marginalizing backward recursion.
ProbabilityMatrix smoothed_marginals(const ForwardLattice& lattice, const HmmInputs& inputs);
ProbabilityMatrix smoothed_marginals(const ForwardLattice& lattice, const NhpgModel& model, const ModelData& data);

}  // namespace nhpg
