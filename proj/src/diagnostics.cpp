#include "nhpg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nhpg/csv.hpp"

namespace nhpg {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

void check_chains(const std::vector<std::vector<double>>& chains, std::size_t min_length) {
  if (chains.empty()) throw invalid_argument("diagnostics: no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw invalid_argument("diagnostics: chains differ in length");
  }
  if (n < min_length) throw invalid_argument("diagnostics: chains too short");
}

bool constant(const std::vector<std::vector<double>>& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double x : c) {
      if (x != first) return false;
    }
  }
  return true;
}

// Autocovariance at lags 0..n-1, biased (divide by n).
std::vector<double> autocovariance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double m = mean_of(x);
  std::vector<double> acov(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += (x[t] - m) * (x[t + k] - m);
    acov[k] = s / static_cast<double>(n);
  }
  return acov;
}

}  // namespace

double DiagnosticsReport::max_rhat() const {
  double m = 1.0;
  for (const auto& p : parameters) m = std::max(m, p.rhat);
  return m;
}

double DiagnosticsReport::min_ess() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : parameters) m = std::min(m, p.ess);
  return m;
}

std::vector<ParameterTraces> flatten_parameters(const std::vector<McmcDraws>& chains) {
  if (chains.empty() || chains.front().sweeps.empty()) return {};
  const std::size_t r = chains.front().sweeps.front().model.dimension();
  std::vector<ParameterTraces> out;
  const auto add = [&](std::string name, auto&& get) {
    ParameterTraces p;
    p.name = std::move(name);
    for (const auto& c : chains) {
      std::vector<double> v;
      v.reserve(c.sweeps.size());
      for (const auto& s : c.sweeps) v.push_back(get(s.model));
      p.chains.push_back(std::move(v));
    }
    out.push_back(std::move(p));
  };
  for (int s : {1, 2}) {
    const std::string tag = std::to_string(s);
    for (std::size_t j = 0; j < r; ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      add("b" + tag + "[" + std::to_string(j) + "]", [=](const NhpgModel& m) { return m.state(s).coef(idx); });
    }
    add("sigma2_" + tag, [=](const NhpgModel& m) { return m.state(s).sigma2; });
  }
  for (int s : {1, 2}) {
    for (std::size_t j = 0; j < r; ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      add("beta" + std::to_string(s) + "[" + std::to_string(j) + "]",
          [=](const NhpgModel& m) { return m.transitions.beta(s)(idx); });
    }
  }
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  check_chains(chains, 4);
  if (constant(chains)) return 1.0;
  const std::size_t half = chains.front().size() / 2;
  std::vector<std::vector<double>> split;
  for (const auto& c : chains) {
    split.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    split.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  const double n = static_cast<double>(half);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : split) {
    means.push_back(mean_of(c));
    w += variance_of(c);
  }
  w /= static_cast<double>(split.size());
  const double b = n * variance_of(means);
  if (w <= 0.0) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  check_chains(chains, 4);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);
  if (constant(chains)) return total;

  std::vector<std::vector<double>> acov;
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    acov.push_back(autocovariance(c));
    means.push_back(mean_of(c));
    w += acov.back()[0] * static_cast<double>(n) / static_cast<double>(n - 1);
  }
  w /= static_cast<double>(m);
  const double b = m > 1 ? variance_of(means) : 0.0;
  const double var_plus = w * static_cast<double>(n - 1) / static_cast<double>(n) + b;
  if (!(var_plus > 0.0)) return total;

  const auto rho = [&](std::size_t k) {
    double s = 0.0;
    for (const auto& a : acov) s += a[k];
    s /= static_cast<double>(m);
    return 1.0 - (w - s) / var_plus;
  };

  // Geyer: sum of consecutive pairs while positive, forced monotone.
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    double pair = rho(k) + rho(k + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(total));
  return total / tau;
}

DiagnosticsReport diagnostics(const std::vector<McmcDraws>& chains) {
  if (chains.size() < 2) throw invalid_argument("diagnostics: need at least two chains");
  DiagnosticsReport report;
  report.chains = chains.size();
  report.draws_per_chain = chains.front().sweeps.size();
  for (const auto& c : chains) report.sparse_state_sweeps += c.sparse_state_sweeps;

  const auto traces = flatten_parameters(chains);
  report.degenerate = !traces.empty();
  for (const auto& p : traces) {
    for (std::size_t c = 1; c < p.chains.size(); ++c) {
      if (p.chains[c] != p.chains[0]) report.degenerate = false;
    }
  }

  for (const auto& p : traces) {
    ParameterDiagnostic d;
    d.name = p.name;
    d.rhat = report.degenerate ? 1.0 : split_rhat(p.chains);
    d.ess = effective_sample_size(p.chains);
    if (d.rhat > rhat_warning_threshold || !std::isfinite(d.rhat)) {
      report.warnings.push_back("R-hat " + format_number(d.rhat) + " above " + format_number(rhat_warning_threshold) +
                                " for " + d.name);
    }
    if (d.ess < ess_warning_threshold) {
      report.warnings.push_back("effective sample size " + format_number(std::round(d.ess)) + " below " +
                                format_number(ess_warning_threshold) + " for " + d.name);
    }
    report.parameters.push_back(std::move(d));
  }
  if (report.degenerate) report.warnings.push_back("all chains are identical; R-hat is uninformative");
  if (report.sparse_state_sweeps > 0) {
    report.warnings.push_back(std::to_string(report.sparse_state_sweeps) +
                              " sweeps had a sparsely occupied state; its update was prior-dominated");
  }
  return report;
}

std::string format_diagnostics(const DiagnosticsReport& report) {
  std::ostringstream out;
  out << "chains: " << report.chains << "\n";
  out << "draws_per_chain: " << report.draws_per_chain << "\n";
  out << "degenerate: " << (report.degenerate ? "true" : "false") << "\n";
  out << "sparse_state_sweeps: " << report.sparse_state_sweeps << "\n";
  out << "\nparameter,rhat,ess\n";
  for (const auto& p : report.parameters) {
    out << p.name << "," << format_number(p.rhat) << "," << format_number(p.ess) << "\n";
  }
  out << "\nwarnings: " << report.warnings.size() << "\n";
  for (const auto& w : report.warnings) out << "WARNING " << w << "\n";
  return out.str();
}

}  // namespace nhpg
