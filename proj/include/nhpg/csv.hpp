#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nhpg/series.hpp"

namespace nhpg {

/// A parsed CSV file whose first column holds ISO dates. Missing cells (empty,
/// "NA", ".", "null") are represented as std::nullopt; anything else must
/// parse as a number.
struct DatedTable {
  std::filesystem::path source;
  std::vector<std::string> columns;  // excludes the date column
  std::vector<Date> dates;
  std::vector<std::vector<std::optional<double>>> cells;  // [row][column]
};

DatedTable read_dated_table(const std::filesystem::path& path);

/// Reads one price column (the first value column when `column` is empty).
/// Rows are sorted by date; duplicate dates, missing or non-finite prices are
/// rejected.
DatedSeries read_price_series(const std::filesystem::path& path, const std::string& column = {});

/// Reads covariate columns (all value columns when `columns` is empty). Each
/// returned series keeps only the rows where that column is present, so a
/// missing cell behaves like a calendar gap. Non-finite numbers are rejected.
std::vector<DatedSeries> read_covariate_series(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns = {});

/// Shortest round-trip decimal representation, independent of locale.
std::string format_number(double value);

/// Splits one CSV record; double-quoted fields may contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

/// Writes `date,<name>` rows for a single series.
void write_series_csv(const std::filesystem::path& path, const DatedSeries& series);
/// Writes `date,<names...>` rows for a covariate panel (raw stored values).
void write_panel_csv(const std::filesystem::path& path, const CovariatePanel& panel);

}  // namespace nhpg
