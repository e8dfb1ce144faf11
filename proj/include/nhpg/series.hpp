#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nhpg {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws on malformed input.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// A named, dated univariate series with strictly increasing daily dates and
/// finite values. Immutable after construction.
class DatedSeries {
 public:
  DatedSeries() = default;
  DatedSeries(std::string name, std::vector<Date> dates, std::vector<double> values);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  DatedSeries renamed(std::string name) const;

 private:
  std::string name_;
  std::vector<Date> dates_;
  std::vector<double> values_;
};

/// Column-wise affine map applied by `zscore_normalize`; kept so reports can
/// map coefficients back to raw covariate units.
struct Normalization {
  std::vector<double> means;
  std::vector<double> sds;
};

/// Dated covariate matrix, one column per named covariate. The constant
/// intercept column is not stored; it is prepended when design rows are built.
class CovariatePanel {
 public:
  CovariatePanel() = default;
  CovariatePanel(std::vector<Date> dates, std::vector<std::string> names, Eigen::MatrixXd values,
                 std::optional<Normalization> normalization = std::nullopt);

  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::optional<Normalization>& normalization() const noexcept { return normalization_; }

  std::size_t rows() const noexcept { return dates_.size(); }
  std::size_t columns() const noexcept { return names_.size(); }
  /// Design dimension r = 1 + number of covariates.
  std::size_t design_dimension() const noexcept { return names_.size() + 1; }
  /// (1, x_1t, ..., x_{r-1,t}) for panel row `row`.
  Eigen::VectorXd design_row(std::size_t row) const;

 private:
  std::vector<Date> dates_;
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  std::optional<Normalization> normalization_;
};

struct DescriptiveStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // denominator n - 1
  double kurtosis = 0.0;  // non-excess, normal = 3
  double skewness = 0.0;
};

/// r_t = log(y_t) - log(y_{t-1}); the output is dated by the later date.
DatedSeries log_returns(const DatedSeries& prices);
/// Elementwise natural log; prices must be strictly positive.
DatedSeries log_prices(const DatedSeries& prices);

/// Centers every column and scales it to unit sample variance (denominator
/// T - 1). Rejects zero-variance columns.
CovariatePanel zscore_normalize(const CovariatePanel& panel);

struct AlignedData {
  DatedSeries price;
  CovariatePanel covariates;
  std::size_t dropped_leading = 0;  // price dates dropped for lack of covariate history
  std::size_t filled_cells = 0;     // covariate cells carried forward
};

/// Joins covariates onto the price calendar. Gaps are filled by carrying the
/// last observation forward; leading price dates before every covariate has
/// been observed are dropped.
AlignedData align(const DatedSeries& price, const std::vector<DatedSeries>& covariates);

/// Restricts a series to [start, end] (inclusive; either bound optional).
DatedSeries slice(const DatedSeries& series, std::optional<Date> start, std::optional<Date> end);
CovariatePanel slice(const CovariatePanel& panel, std::optional<Date> start, std::optional<Date> end);

DescriptiveStats describe(const DatedSeries& series);
DescriptiveStats describe(const std::vector<double>& values);

}  // namespace nhpg
