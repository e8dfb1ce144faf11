#include "nhpg/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "nhpg/error.hpp"

namespace nhpg {

namespace {

int parse_fixed_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw invalid_argument("malformed date '" + std::string(whole) + "' (expected YYYY-MM-DD)");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw invalid_argument("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const int y = parse_fixed_int(text.substr(0, 4), text);
  const int m = parse_fixed_int(text.substr(5, 2), text);
  const int d = parse_fixed_int(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw invalid_argument("invalid calendar date '" + std::string(text) + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

DatedSeries::DatedSeries(std::string name, std::vector<Date> dates, std::vector<double> values)
    : name_(std::move(name)), dates_(std::move(dates)), values_(std::move(values)) {
  if (dates_.size() != values_.size()) {
    throw invalid_argument("series '" + name_ + "': dates and values differ in length");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw invalid_argument("series '" + name_ + "': non-finite value on " + format_date(dates_[i]));
    }
    if (i > 0 && dates_[i] <= dates_[i - 1]) {
      throw invalid_argument("series '" + name_ + "': dates not strictly increasing at " +
                             format_date(dates_[i]));
    }
  }
}

DatedSeries DatedSeries::renamed(std::string name) const {
  DatedSeries copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

CovariatePanel::CovariatePanel(std::vector<Date> dates, std::vector<std::string> names,
                               Eigen::MatrixXd values, std::optional<Normalization> normalization)
    : dates_(std::move(dates)),
      names_(std::move(names)),
      values_(std::move(values)),
      normalization_(std::move(normalization)) {
  if (static_cast<std::size_t>(values_.rows()) != dates_.size() ||
      static_cast<std::size_t>(values_.cols()) != names_.size()) {
    throw invalid_argument("covariate panel: matrix shape does not match dates/names");
  }
  if (!values_.allFinite()) throw invalid_argument("covariate panel: non-finite entry");
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (dates_[i] <= dates_[i - 1]) {
      throw invalid_argument("covariate panel: dates not strictly increasing at " + format_date(dates_[i]));
    }
  }
}

Eigen::VectorXd CovariatePanel::design_row(std::size_t row) const {
  Eigen::VectorXd x(design_dimension());
  x(0) = 1.0;
  x.tail(columns()) = values_.row(static_cast<Eigen::Index>(row)).transpose();
  return x;
}

DatedSeries log_returns(const DatedSeries& prices) {
  if (prices.size() < 2) throw invalid_argument("log_returns: need at least two prices");
  const auto& v = prices.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) {
      throw invalid_argument("log_returns: non-positive price on " + format_date(prices.dates()[i]));
    }
  }
  std::vector<Date> dates(prices.dates().begin() + 1, prices.dates().end());
  std::vector<double> out(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i) out[i - 1] = std::log(v[i]) - std::log(v[i - 1]);
  return DatedSeries(prices.name(), std::move(dates), std::move(out));
}

DatedSeries log_prices(const DatedSeries& prices) {
  std::vector<double> out(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    const double p = prices.values()[i];
    if (!(p > 0.0)) throw invalid_argument("log_prices: non-positive price on " + format_date(prices.dates()[i]));
    out[i] = std::log(p);
  }
  return DatedSeries(prices.name(), prices.dates(), std::move(out));
}

CovariatePanel zscore_normalize(const CovariatePanel& panel) {
  const auto n = panel.values().rows();
  if (n < 2) throw invalid_argument("zscore_normalize: need at least two rows");
  Eigen::MatrixXd out = panel.values();
  Normalization norm;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double mean = out.col(j).mean();
    out.col(j).array() -= mean;
    const double var = out.col(j).squaredNorm() / static_cast<double>(n - 1);
    if (!(var > 0.0)) {
      throw invalid_argument("zscore_normalize: column '" + panel.names()[static_cast<std::size_t>(j)] +
                             "' has zero variance");
    }
    const double sd = std::sqrt(var);
    out.col(j) /= sd;
    // Re-center: removes the rounding residue left by the first pass.
    out.col(j).array() -= out.col(j).mean();
    norm.means.push_back(mean);
    norm.sds.push_back(sd);
  }
  return CovariatePanel(panel.dates(), panel.names(), std::move(out), std::move(norm));
}

AlignedData align(const DatedSeries& price, const std::vector<DatedSeries>& covariates) {
  if (price.empty()) throw Error(ErrorCode::ingestion, "align: empty price series");
  for (const auto& c : covariates) {
    if (c.empty()) throw Error(ErrorCode::ingestion, "align: covariate '" + c.name() + "' is empty");
    if (c.dates().front() > price.dates().back() || c.dates().back() < price.dates().front()) {
      throw Error(ErrorCode::ingestion, "align: covariate '" + c.name() + "' does not overlap the price dates");
    }
  }

  const std::size_t k = covariates.size();
  std::vector<std::size_t> cursor(k, 0);
  std::vector<Date> dates;
  std::vector<double> values;
  std::vector<double> cells;
  AlignedData out;
  for (std::size_t i = 0; i < price.size(); ++i) {
    const Date d = price.dates()[i];
    bool complete = true;
    std::size_t filled = 0;
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& cd = covariates[j].dates();
      while (cursor[j] < cd.size() && cd[cursor[j]] <= d) ++cursor[j];
      if (cursor[j] == 0) {
        complete = false;
        break;
      }
      row[j] = covariates[j].values()[cursor[j] - 1];
      if (cd[cursor[j] - 1] != d) ++filled;
    }
    if (!complete) {
      if (dates.empty()) {
        ++out.dropped_leading;
        continue;
      }
      // Cursors only advance, so an incomplete row after a complete one is impossible.
      throw Error(ErrorCode::ingestion, "align: internal ordering error");
    }
    dates.push_back(d);
    values.push_back(price.values()[i]);
    cells.insert(cells.end(), row.begin(), row.end());
    out.filled_cells += filled;
  }
  if (dates.empty()) throw Error(ErrorCode::ingestion, "align: empty overlap between price and covariates");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < dates.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * k + j];
    }
  }
  std::vector<std::string> names;
  for (const auto& c : covariates) names.push_back(c.name());
  out.covariates = CovariatePanel(dates, std::move(names), std::move(m));
  out.price = DatedSeries(price.name(), std::move(dates), std::move(values));
  return out;
}

namespace {

std::pair<std::size_t, std::size_t> window_bounds(const std::vector<Date>& dates, std::optional<Date> start,
                                                  std::optional<Date> end) {
  const auto first = start ? std::lower_bound(dates.begin(), dates.end(), *start) : dates.begin();
  const auto last = end ? std::upper_bound(dates.begin(), dates.end(), *end) : dates.end();
  const auto lo = static_cast<std::size_t>(first - dates.begin());
  const auto hi = static_cast<std::size_t>(last - dates.begin());
  return {lo, std::max(lo, hi)};
}

}  // namespace

DatedSeries slice(const DatedSeries& series, std::optional<Date> start, std::optional<Date> end) {
  const auto [lo, hi] = window_bounds(series.dates(), start, end);
  return DatedSeries(series.name(), std::vector<Date>(series.dates().begin() + lo, series.dates().begin() + hi),
                     std::vector<double>(series.values().begin() + lo, series.values().begin() + hi));
}

CovariatePanel slice(const CovariatePanel& panel, std::optional<Date> start, std::optional<Date> end) {
  const auto [lo, hi] = window_bounds(panel.dates(), start, end);
  Eigen::MatrixXd m = panel.values().middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
  return CovariatePanel(std::vector<Date>(panel.dates().begin() + lo, panel.dates().begin() + hi), panel.names(),
                        std::move(m), panel.normalization());
}

DescriptiveStats describe(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 4) throw invalid_argument("describe: need at least 4 observations");
  // Sorting first makes the floating-point sums independent of input order.
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sorted) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double dn = static_cast<double>(n);
  if (!(m2 > 0.0)) throw invalid_argument("describe: degenerate (zero-variance) sample");
  DescriptiveStats s;
  s.count = n;
  s.mean = mean;
  s.variance = m2 / (dn - 1.0);
  const double pop_var = m2 / dn;
  s.skewness = (m3 / dn) / std::pow(pop_var, 1.5);
  s.kurtosis = (m4 / dn) / (pop_var * pop_var);
  return s;
}

DescriptiveStats describe(const DatedSeries& series) { return describe(series.values()); }

}  // namespace nhpg
