#include "nhpg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhpg/error.hpp"

namespace nhpg {

void NhpgModel::validate() const {
  const auto r = state1.coef.size();
  if (r < 1) throw invalid_argument("model: empty coefficient vector");
  if (state2.coef.size() != r || transitions.beta1.size() != r || transitions.beta2.size() != r) {
    throw invalid_argument("model: parameter blocks differ in dimension");
  }
  if (!covariate_names.empty() && covariate_names.size() + 1 != static_cast<std::size_t>(r)) {
    throw invalid_argument("model: covariate names do not match the design dimension");
  }
  for (int s : {1, 2}) {
    const auto& p = state(s);
    if (!(p.sigma2 > 0.0) || !std::isfinite(p.sigma2)) throw invalid_argument("model: sigma2 must be positive");
    if (!p.coef.allFinite()) throw invalid_argument("model: non-finite regression coefficient");
  }
  if (!transitions.beta1.allFinite() || !transitions.beta2.allFinite()) {
    throw invalid_argument("model: non-finite transition coefficient");
  }
}

void NhpgModel::swap_labels() {
  std::swap(state1, state2);
  std::swap(transitions.beta1, transitions.beta2);
}

ModelData make_model_data(const DatedSeries& y, const CovariatePanel& panel) {
  ModelData data;
  data.covariate_names = panel.names();
  const auto& pd = panel.dates();
  std::vector<double> values;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(pd.begin(), pd.end(), y.dates()[i]);
    if (it == pd.end() || *it != y.dates()[i]) {
      throw invalid_argument("make_model_data: observation date " + format_date(y.dates()[i]) +
                             " missing from the covariate panel");
    }
    if (it == pd.begin()) continue;
    data.dates.push_back(y.dates()[i]);
    values.push_back(y.values()[i]);
    rows.push_back(static_cast<Eigen::Index>(it - pd.begin()) - 1);
  }
  if (values.empty()) throw invalid_argument("make_model_data: no usable observations");
  const auto r = static_cast<Eigen::Index>(panel.design_dimension());
  data.y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  data.design.resize(static_cast<Eigen::Index>(rows.size()), r);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    data.design.row(static_cast<Eigen::Index>(t)) = panel.design_row(static_cast<std::size_t>(rows[t])).transpose();
  }
  return data;
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

TransitionRow transition_row(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& beta) {
  if (x.size() != beta.size()) throw invalid_argument("transition_row: dimension mismatch");
  const double eta = x.dot(beta);
  // Both entries computed directly so neither suffers cancellation near 0 or 1.
  return {logistic(eta), logistic(-eta)};
}

double emission_logdensity(double y, const Eigen::Ref<const Eigen::VectorXd>& x_prev, const StateParams& state) {
  const double resid = y - x_prev.dot(state.coef);
  return -0.5 * std::log(2.0 * std::numbers::pi * state.sigma2) - 0.5 * resid * resid / state.sigma2;
}

Simulation simulate(const NhpgModel& model, const CovariatePanel& covariates, int z1, Rng& rng) {
  model.validate();
  if (covariates.rows() < 2) throw invalid_argument("simulate: need at least two covariate rows");
  if (covariates.design_dimension() != model.dimension()) throw invalid_argument("simulate: dimension mismatch");
  if (z1 != 1 && z1 != 2) throw invalid_argument("simulate: initial state must be 1 or 2");

  const std::size_t n = covariates.rows() - 1;
  StatePath path(n);
  std::vector<double> y(n);
  int z = z1;
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::VectorXd x = covariates.design_row(t);
    if (t > 0) {
      const TransitionRow row = transition_row(x, model.transitions.beta(z));
      if (rng.uniform() >= row.stay) z = 3 - z;
    }
    path[t] = z;
    const StateParams& s = model.state(z);
    y[t] = x.dot(s.coef) + std::sqrt(s.sigma2) * rng.normal();
  }
  std::vector<Date> dates(covariates.dates().begin() + 1, covariates.dates().end());
  return {DatedSeries("y", std::move(dates), std::move(y)), std::move(path)};
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_json_vec(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const NhpgModel& model) {
  return nlohmann::json{
      {"b1", to_vec(model.state1.coef)},
      {"sigma2_1", model.state1.sigma2},
      {"b2", to_vec(model.state2.coef)},
      {"sigma2_2", model.state2.sigma2},
      {"beta1", to_vec(model.transitions.beta1)},
      {"beta2", to_vec(model.transitions.beta2)},
      {"covariate_names", model.covariate_names},
  };
}

NhpgModel model_from_json(const nlohmann::json& doc) {
  NhpgModel m;
  try {
    m.state1.coef = from_json_vec(doc, "b1");
    m.state1.sigma2 = doc.at("sigma2_1").get<double>();
    m.state2.coef = from_json_vec(doc, "b2");
    m.state2.sigma2 = doc.at("sigma2_2").get<double>();
    m.transitions.beta1 = from_json_vec(doc, "beta1");
    m.transitions.beta2 = from_json_vec(doc, "beta2");
    m.covariate_names = doc.value("covariate_names", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::artifact, std::string("model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace nhpg
