#pragma once

#include <string>
#include <vector>

#include "nhpg/mcmc.hpp"

namespace nhpg {

/// Scalar parameter traces, one vector per chain, with a parameter name.
struct ParameterTraces {
  std::string name;
  std::vector<std::vector<double>> chains;
};

/// Flattens every parameter of every retained sweep: b1[j], sigma2_1, b2[j],
/// sigma2_2, beta1[j], beta2[j].
std::vector<ParameterTraces> flatten_parameters(const std::vector<McmcDraws>& chains);

struct ParameterDiagnostic {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
};

struct DiagnosticsReport {
  std::vector<ParameterDiagnostic> parameters;
  std::vector<std::string> warnings;
  /// All chains produced bit-identical draws (e.g. the same seed twice).
  bool degenerate = false;
  std::size_t chains = 0;
  std::size_t draws_per_chain = 0;
  std::size_t sparse_state_sweeps = 0;

  double max_rhat() const;
  double min_ess() const;
};

inline constexpr double rhat_warning_threshold = 1.1;
inline constexpr double ess_warning_threshold = 100.0;

/// Split potential scale reduction. Chains must have equal length >= 4.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size with Geyer's initial monotone sequence.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Needs at least two chains.
DiagnosticsReport diagnostics(const std::vector<McmcDraws>& chains);

std::string format_diagnostics(const DiagnosticsReport& report);

}  // namespace nhpg
