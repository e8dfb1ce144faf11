#include "nhpg/forward_backward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nhpg/error.hpp"

namespace nhpg {

namespace {

// P(Z_t = j | Z_{t-1} = i) from the self-transition probabilities of row t.
inline double transition(const ProbabilityMatrix& stay, Eigen::Index t, int i, int j) {
  const double p = stay(t, i);
  return i == j ? p : 1.0 - p;
}

void check_shapes(const ForwardLattice& lattice, const HmmInputs& inputs) {
  if (lattice.filtered.rows() != inputs.stay.rows() || lattice.filtered.rows() == 0) {
    throw invalid_argument("forward-backward: lattice and inputs differ in length");
  }
}

}  // namespace

HmmInputs hmm_inputs(const NhpgModel& model, const ModelData& data) {
  if (data.dimension() != model.dimension()) throw invalid_argument("forward-backward: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(data.size());
  HmmInputs in;
  in.log_emission.resize(n, 2);
  in.stay.resize(n, 2);
  const Eigen::VectorXd mean1 = data.design * model.state1.coef;
  const Eigen::VectorXd mean2 = data.design * model.state2.coef;
  const Eigen::VectorXd eta1 = data.design * model.transitions.beta1;
  const Eigen::VectorXd eta2 = data.design * model.transitions.beta2;
  const double c1 = -0.5 * std::log(2.0 * std::numbers::pi * model.state1.sigma2);
  const double c2 = -0.5 * std::log(2.0 * std::numbers::pi * model.state2.sigma2);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double r1 = data.y(t) - mean1(t);
    const double r2 = data.y(t) - mean2(t);
    in.log_emission(t, 0) = c1 - 0.5 * r1 * r1 / model.state1.sigma2;
    in.log_emission(t, 1) = c2 - 0.5 * r2 * r2 / model.state2.sigma2;
    in.stay(t, 0) = logistic(eta1(t));
    in.stay(t, 1) = logistic(eta2(t));
  }
  in.stay.row(0).setConstant(0.5);
  return in;
}

ForwardLattice forward_filter(const HmmInputs& inputs) {
  const auto n = inputs.log_emission.rows();
  if (n == 0 || inputs.stay.rows() != n) throw invalid_argument("forward_filter: empty or mismatched inputs");
  ForwardLattice lattice;
  lattice.filtered.resize(n, 2);
  double log_norm = 0.0;
  double prev0 = 0.5, prev1 = 0.5;  // uniform initial law
  for (Eigen::Index t = 0; t < n; ++t) {
    double pred0 = 0.5, pred1 = 0.5;
    if (t > 0) {
      pred0 = prev0 * transition(inputs.stay, t, 0, 0) + prev1 * transition(inputs.stay, t, 1, 0);
      pred1 = prev0 * transition(inputs.stay, t, 0, 1) + prev1 * transition(inputs.stay, t, 1, 1);
    }
    const double l0 = inputs.log_emission(t, 0);
    const double l1 = inputs.log_emission(t, 1);
    const double m = std::max(l0, l1);
    const double a0 = pred0 * std::exp(l0 - m);
    const double a1 = pred1 * std::exp(l1 - m);
    const double total = a0 + a1;
    if (!std::isfinite(m) || !(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorCode::numerical,
                  "forward_filter: non-finite likelihood at observation " + std::to_string(t));
    }
    log_norm += m + std::log(total);
    prev0 = a0 / total;
    prev1 = a1 / total;
    lattice.filtered(t, 0) = prev0;
    lattice.filtered(t, 1) = prev1;
  }
  lattice.log_likelihood = log_norm;
  return lattice;
}

ForwardLattice forward_pass(const NhpgModel& model, const ModelData& data) {
  return forward_filter(hmm_inputs(model, data));
}

StatePath backward_sample(const ForwardLattice& lattice, const HmmInputs& inputs, Rng& rng) {
  check_shapes(lattice, inputs);
  const auto n = lattice.filtered.rows();
  StatePath path(static_cast<std::size_t>(n));
  int next = rng.uniform() < lattice.filtered(n - 1, 0) ? 1 : 2;
  path.back() = next;
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const int j = next - 1;
    const double w0 = transition(inputs.stay, t + 1, 0, j) * lattice.filtered(t, 0);
    const double w1 = transition(inputs.stay, t + 1, 1, j) * lattice.filtered(t, 1);
    next = rng.uniform() * (w0 + w1) < w0 ? 1 : 2;
    path[static_cast<std::size_t>(t)] = next;
  }
  return path;
}

StatePath backward_sample(const ForwardLattice& lattice, const NhpgModel& model, const ModelData& data, Rng& rng) {
  return backward_sample(lattice, hmm_inputs(model, data), rng);
}

ProbabilityMatrix smoothed_marginals(const ForwardLattice& lattice, const HmmInputs& inputs) {
  check_shapes(lattice, inputs);
  const auto n = lattice.filtered.rows();
  ProbabilityMatrix smoothed(n, 2);
  smoothed.row(n - 1) = lattice.filtered.row(n - 1);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const double f0 = lattice.filtered(t, 0);
    const double f1 = lattice.filtered(t, 1);
    // One-step predictions for t + 1 given data through t.
    const double pred0 = f0 * transition(inputs.stay, t + 1, 0, 0) + f1 * transition(inputs.stay, t + 1, 1, 0);
    const double pred1 = f0 * transition(inputs.stay, t + 1, 0, 1) + f1 * transition(inputs.stay, t + 1, 1, 1);
    const double r0 = pred0 > 0.0 ? smoothed(t + 1, 0) / pred0 : 0.0;
    const double r1 = pred1 > 0.0 ? smoothed(t + 1, 1) / pred1 : 0.0;
    double s0 = f0 * (transition(inputs.stay, t + 1, 0, 0) * r0 + transition(inputs.stay, t + 1, 0, 1) * r1);
    double s1 = f1 * (transition(inputs.stay, t + 1, 1, 0) * r0 + transition(inputs.stay, t + 1, 1, 1) * r1);
    const double total = s0 + s1;
    smoothed(t, 0) = s0 / total;
    smoothed(t, 1) = s1 / total;
  }
  return smoothed;
}

ProbabilityMatrix smoothed_marginals(const ForwardLattice& lattice, const NhpgModel& model, const ModelData& data) {
  return smoothed_marginals(lattice, hmm_inputs(model, data));
}

}  // namespace nhpg
