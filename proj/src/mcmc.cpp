#include "nhpg/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "nhpg/polya_gamma.hpp"

namespace nhpg {

namespace {

Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Eigen::VectorXd vector_or(const Eigen::VectorXd& v, std::size_t dimension, double fill) {
  if (v.size() == 0) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dimension), fill);
  if (static_cast<std::size_t>(v.size()) != dimension) {
    throw invalid_argument("priors: vector hyperparameter has the wrong dimension");
  }
  return v;
}

Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& precision, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, std::string(what) + ": posterior precision is not positive definite");
  }
  return llt;
}

}  // namespace

void Priors::validate(std::size_t dimension) const {
  if (!(prec_b > 0.0) || !(prec_beta > 0.0)) throw invalid_argument("priors: precisions must be positive");
  if (!(ig_shape > 1.0)) throw invalid_argument("priors: ig_shape must exceed 1");
  if (!(ig_scale > 0.0)) throw invalid_argument("priors: ig_scale must be positive");
  b_mean(dimension);
  beta_mean(dimension);
  const Eigen::VectorXd p = beta_precision(dimension);
  if ((p.array() <= 0.0).any() || p.hasNaN()) throw invalid_argument("priors: beta precisions must be positive");
}

Eigen::VectorXd Priors::b_mean(std::size_t dimension) const { return vector_or(mean_b, dimension, 0.0); }
Eigen::VectorXd Priors::beta_mean(std::size_t dimension) const { return vector_or(mean_beta, dimension, 0.0); }
Eigen::VectorXd Priors::beta_precision(std::size_t dimension) const {
  return vector_or(prec_beta_diag, dimension, prec_beta);
}

Priors Priors::intercept_only_transitions(std::size_t dimension, Priors base) {
  base.prec_beta_diag = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dimension),
                                                  std::numeric_limits<double>::infinity());
  base.prec_beta_diag(0) = base.prec_beta;
  return base;
}

Priors Priors::intercept_only_transitions(std::size_t dimension) {
  return intercept_only_transitions(dimension, Priors{});
}

void McmcConfig::validate() const {
  if (iterations == 0) throw invalid_argument("mcmc: iterations must be positive");
  if (burn_in >= iterations) throw invalid_argument("mcmc: burn_in must be smaller than iterations");
  if (thin < 1) throw invalid_argument("mcmc: thin must be at least 1");
  if (chains < 1) throw invalid_argument("mcmc: need at least one chain");
}

StateParams sample_state_params(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Priors& priors,
                                Rng& rng) {
  const auto r = static_cast<std::size_t>(design.cols());
  const Eigen::VectorXd m0 = priors.b_mean(r);
  Eigen::MatrixXd precision = design.transpose() * design;
  precision.diagonal().array() += priors.prec_b;
  const auto llt = cholesky(precision, "mean update");
  const Eigen::VectorXd mean = llt.solve(priors.prec_b * m0 + design.transpose() * y);

  const double n = static_cast<double>(y.size());
  const Eigen::VectorXd resid = y - design * mean;
  const double prior_dev = priors.prec_b * (mean - m0).squaredNorm();
  const double shape = priors.ig_shape + 0.5 * n;
  const double scale = priors.ig_scale + 0.5 * (resid.squaredNorm() + prior_dev);

  StateParams out;
  out.sigma2 = rng.inverse_gamma(shape, scale);
  // B = mean + sigma * L^{-T} z, so that Cov(B) = sigma2 * precision^{-1}.
  const Eigen::VectorXd z = standard_normal_vector(static_cast<Eigen::Index>(r), rng);
  out.coef = mean + std::sqrt(out.sigma2) * llt.matrixU().solve(z);
  return out;
}

std::pair<StateParams, StateParams> sample_mean_params(const ModelData& data, const StatePath& path,
                                                       const Priors& priors, Rng& rng, MeanUpdateInfo* info) {
  if (path.size() != data.size()) throw invalid_argument("sample_mean_params: path length mismatch");
  const auto r = static_cast<Eigen::Index>(data.dimension());
  std::array<std::vector<Eigen::Index>, 2> rows;
  for (std::size_t t = 0; t < path.size(); ++t) rows[static_cast<std::size_t>(path[t] - 1)].push_back(static_cast<Eigen::Index>(t));

  std::array<StateParams, 2> out;
  for (std::size_t s = 0; s < 2; ++s) {
    const auto n = static_cast<Eigen::Index>(rows[s].size());
    Eigen::MatrixXd x(n, r);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = data.design.row(rows[s][static_cast<std::size_t>(i)]);
      y(i) = data.y(rows[s][static_cast<std::size_t>(i)]);
    }
    out[s] = sample_state_params(x, y, priors, rng);
  }
  if (info) {
    info->occupancy1 = rows[0].size();
    info->occupancy2 = rows[1].size();
    const auto threshold = static_cast<std::size_t>(r) + 2;
    info->sparse = rows[0].size() < threshold || rows[1].size() < threshold;
  }
  return {std::move(out[0]), std::move(out[1])};
}

Eigen::VectorXd sample_logistic_given_omega(const Eigen::MatrixXd& design, const Eigen::VectorXd& kappa,
                                            const Eigen::VectorXd& omega, const Eigen::VectorXd& prior_mean,
                                            const Eigen::VectorXd& prior_precision, Rng& rng) {
  const auto r = design.cols();
  std::vector<Eigen::Index> free_idx;
  std::vector<Eigen::Index> pinned_idx;
  for (Eigen::Index j = 0; j < r; ++j) {
    (std::isinf(prior_precision(j)) ? pinned_idx : free_idx).push_back(j);
  }
  Eigen::VectorXd beta = prior_mean;
  if (free_idx.empty()) return beta;

  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  const auto n = design.rows();
  Eigen::MatrixXd xf(n, nf);
  for (Eigen::Index k = 0; k < nf; ++k) xf.col(k) = design.col(free_idx[static_cast<std::size_t>(k)]);
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j : pinned_idx) offset += design.col(j) * prior_mean(j);

  Eigen::MatrixXd precision = xf.transpose() * omega.asDiagonal() * xf;
  Eigen::VectorXd linear = xf.transpose() * (kappa - omega.cwiseProduct(offset));
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index j = free_idx[static_cast<std::size_t>(k)];
    precision(k, k) += prior_precision(j);
    linear(k) += prior_precision(j) * prior_mean(j);
  }
  const auto llt = cholesky(precision, "logistic update");
  const Eigen::VectorXd mean = llt.solve(linear);
  const Eigen::VectorXd draw = mean + llt.matrixU().solve(standard_normal_vector(nf, rng));
  for (Eigen::Index k = 0; k < nf; ++k) beta(free_idx[static_cast<std::size_t>(k)]) = draw(k);
  return beta;
}

TransitionParams sample_logistic_params(const ModelData& data, const StatePath& path,
                                        const TransitionParams& current, const Priors& priors, Rng& rng,
                                        bool* sparse) {
  if (path.size() != data.size()) throw invalid_argument("sample_logistic_params: path length mismatch");
  const std::size_t r = data.dimension();
  const Eigen::VectorXd prior_mean = priors.beta_mean(r);
  const Eigen::VectorXd prior_precision = priors.beta_precision(r);

  TransitionParams out;
  if (sparse) *sparse = false;
  for (int i : {1, 2}) {
    std::vector<Eigen::Index> rows;
    for (std::size_t t = 1; t < path.size(); ++t) {
      if (path[t - 1] == i) rows.push_back(static_cast<Eigen::Index>(t));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0 && sparse) *sparse = true;
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(r));
    Eigen::VectorXd kappa(n);
    Eigen::VectorXd omega(n);
    const Eigen::VectorXd& beta = current.beta(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index t = rows[static_cast<std::size_t>(k)];
      x.row(k) = data.design.row(t);
      kappa(k) = (path[static_cast<std::size_t>(t)] == i ? 1.0 : 0.0) - 0.5;
      omega(k) = sample_pg({1, x.row(k).dot(beta)}, rng);
    }
    out.beta(i) = sample_logistic_given_omega(x, kappa, omega, prior_mean, prior_precision, rng);
  }
  return out;
}

NhpgModel initial_model(const ModelData& data, const Priors& priors, Rng& rng, StatePath* path_out) {
  const std::size_t n = data.size();
  const double mean = data.y.mean();
  std::vector<double> sq(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double d = data.y(static_cast<Eigen::Index>(t)) - mean;
    sq[t] = d * d;
  }
  std::vector<double> sorted = sq;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double median = *mid;
  StatePath path(n);
  for (std::size_t t = 0; t < n; ++t) path[t] = sq[t] >= median ? 1 : 2;

  NhpgModel model;
  model.covariate_names = data.covariate_names;
  std::tie(model.state1, model.state2) = sample_mean_params(data, path, priors, rng);
  TransitionParams zero;
  zero.beta1 = priors.beta_mean(data.dimension());
  zero.beta2 = zero.beta1;
  model.transitions = sample_logistic_params(data, path, zero, priors, rng);
  if (path_out) *path_out = std::move(path);
  return model;
}

McmcDraws run_chain(const ModelData& data, const Priors& priors, const McmcConfig& config, std::size_t chain) {
  config.validate();
  priors.validate(data.dimension());
  if (data.size() < 2) throw invalid_argument("run_chain: need at least two observations");

  Rng rng = Rng::substream(config.seed, chain);
  McmcDraws draws;
  draws.chain = chain;
  draws.dates = data.dates;
  draws.covariate_names = data.covariate_names;
  draws.sweeps.reserve(config.retained());

  NhpgModel model = initial_model(data, priors, rng);
  if (config.order_by_variance && model.state1.sigma2 < model.state2.sigma2) model.swap_labels();

  for (std::size_t sweep = 1; sweep <= config.iterations; ++sweep) {
    const NhpgModel last_valid = model;
    try {
      const HmmInputs inputs = hmm_inputs(model, data);
      const ForwardLattice lattice = forward_filter(inputs);
      StatePath path = backward_sample(lattice, inputs, rng);

      MeanUpdateInfo info;
      std::tie(model.state1, model.state2) = sample_mean_params(data, path, priors, rng, &info);
      bool no_transitions = false;
      model.transitions = sample_logistic_params(data, path, model.transitions, priors, rng, &no_transitions);
      if (info.sparse || no_transitions) ++draws.sparse_state_sweeps;

      if (config.order_by_variance && model.state1.sigma2 < model.state2.sigma2) {
        model.swap_labels();
        for (int& z : path) z = 3 - z;
        ++draws.label_swaps;
      }
      model.validate();

      if (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
        const HmmInputs current = hmm_inputs(model, data);
        const ForwardLattice filtered = forward_filter(current);
        SweepDraw d;
        d.smoothed = smoothed_marginals(filtered, current);
        d.log_likelihood = filtered.log_likelihood;
        d.model = model;
        d.path = std::move(path);
        draws.sweeps.push_back(std::move(d));
      }
    } catch (const Error& e) {
      throw ChainFailure(sweep, last_valid,
                         "chain " + std::to_string(chain) + " failed at sweep " + std::to_string(sweep) + ": " +
                             e.what());
    }
  }
  return draws;
}

std::vector<McmcDraws> run_chains(const ModelData& data, const Priors& priors, const McmcConfig& config) {
  config.validate();
  std::vector<std::future<McmcDraws>> futures;
  futures.reserve(config.chains);
  for (std::size_t c = 0; c < config.chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&data, &priors, &config, c] {
      return run_chain(data, priors, config, c);
    }));
  }
  std::vector<McmcDraws> out;
  out.reserve(config.chains);
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw invalid_argument("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string block_name(Block block) { return block == Block::mean ? "mean" : "transition"; }

namespace {

CoefficientSummary summarize_one(std::string name, int state, Block block, const std::vector<double>& values,
                                 double level) {
  CoefficientSummary s;
  s.name = std::move(name);
  s.state = state;
  s.block = block;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.q_low = sample_quantile(values, 0.5 * level);
  s.q_high = sample_quantile(values, 1.0 - 0.5 * level);
  s.significant = s.q_low > 0.0 || s.q_high < 0.0;
  return s;
}

}  // namespace

PosteriorSummary summarize(const std::vector<McmcDraws>& chains, double level) {
  if (!(level > 0.0 && level < 1.0)) throw invalid_argument("summarize: level must be in (0, 1)");
  std::vector<const SweepDraw*> pooled;
  for (const auto& c : chains) {
    for (const auto& s : c.sweeps) pooled.push_back(&s);
  }
  if (pooled.size() < 100) {
    throw invalid_argument("summarize: need at least 100 retained draws, have " + std::to_string(pooled.size()));
  }
  const auto& first = chains.front();
  const std::size_t r = pooled.front()->model.dimension();
  const std::size_t n = pooled.front()->smoothed.rows();
  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), first.covariate_names.begin(), first.covariate_names.end());
  if (names.size() != r) names.resize(r, "x");

  PosteriorSummary out;
  out.level = level;
  out.draws = pooled.size();
  out.posterior_mean.covariate_names = first.covariate_names;
  std::vector<double> values(pooled.size());
  const auto collect = [&](auto&& get) {
    for (std::size_t g = 0; g < pooled.size(); ++g) values[g] = get(pooled[g]->model);
    return values;
  };
  for (int s : {1, 2}) {
    Eigen::VectorXd coef(static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      out.coefficients.push_back(summarize_one(names[j], s, Block::mean,
                                               collect([&](const NhpgModel& m) { return m.state(s).coef(idx); }),
                                               level));
      coef(idx) = out.coefficients.back().mean;
    }
    out.coefficients.push_back(
        summarize_one("sigma2", s, Block::mean, collect([&](const NhpgModel& m) { return m.state(s).sigma2; }), level));
    out.posterior_mean.state(s).coef = coef;
    out.posterior_mean.state(s).sigma2 = out.coefficients.back().mean;
  }
  for (int s : {1, 2}) {
    Eigen::VectorXd beta(static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      out.coefficients.push_back(summarize_one(names[j], s, Block::transition,
                                               collect([&](const NhpgModel& m) { return m.transitions.beta(s)(idx); }),
                                               level));
      beta(idx) = out.coefficients.back().mean;
    }
    out.posterior_mean.transitions.beta(s) = beta;
  }

  out.dates = first.dates;
  out.p_state1.assign(n, 0.0);
  for (const SweepDraw* d : pooled) {
    if (static_cast<std::size_t>(d->smoothed.rows()) != n) throw invalid_argument("summarize: chains differ in length");
    for (std::size_t t = 0; t < n; ++t) out.p_state1[t] += d->smoothed(static_cast<Eigen::Index>(t), 0);
  }
  out.assigned.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.p_state1[t] /= static_cast<double>(pooled.size());
    out.assigned[t] = out.p_state1[t] > 0.5 ? 1 : 2;
    (out.assigned[t] == 1 ? out.state1_count : out.state2_count) += 1;
  }
  return out;
}

ProbabilityMatrix posterior_stay_probabilities(const std::vector<McmcDraws>& chains, const ModelData& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  ProbabilityMatrix acc = ProbabilityMatrix::Zero(n, 2);
  std::size_t count = 0;
  for (const auto& c : chains) {
    for (const auto& s : c.sweeps) {
      const Eigen::VectorXd eta1 = data.design * s.model.transitions.beta1;
      const Eigen::VectorXd eta2 = data.design * s.model.transitions.beta2;
      for (Eigen::Index t = 0; t < n; ++t) {
        acc(t, 0) += logistic(eta1(t));
        acc(t, 1) += logistic(eta2(t));
      }
      ++count;
    }
  }
  if (count == 0) throw invalid_argument("posterior_stay_probabilities: no draws");
  return acc / static_cast<double>(count);
}

}  // namespace nhpg
