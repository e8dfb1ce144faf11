#include "nhpg/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "nhpg/error.hpp"

namespace nhpg {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "." || s == "NA" || s == "N/A" || s == "null" || s == "-";
}

Error ingest_error(const std::filesystem::path& path, const std::string& what) {
  return Error(ErrorCode::ingestion, path.string() + ": " + what);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

DatedTable read_dated_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ingest_error(path, "cannot open file");
  DatedTable table;
  table.source = path;
  std::string line;
  if (!std::getline(in, line)) throw ingest_error(path, "empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  auto header = split_csv_line(line);
  if (header.size() < 2) throw ingest_error(path, "need a date column and at least one value column");
  table.columns.assign(header.begin() + 1, header.end());

  std::vector<std::pair<Date, std::vector<std::optional<double>>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ingest_error(path, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                   " fields, found " + std::to_string(fields.size()));
    }
    Date date;
    try {
      date = parse_date(fields[0]);
    } catch (const Error& e) {
      throw ingest_error(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
    std::vector<std::optional<double>> cells(fields.size() - 1);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (is_missing_token(f)) continue;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw ingest_error(path, "line " + std::to_string(line_no) + ": cannot parse '" + f + "' in column '" +
                                     header[j] + "'");
      }
      cells[j - 1] = v;
    }
    rows.emplace_back(date, std::move(cells));
  }
  if (rows.empty()) throw ingest_error(path, "no data rows");
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw ingest_error(path, "duplicate date " + format_date(rows[i].first));
    }
  }
  for (auto& [d, c] : rows) {
    table.dates.push_back(d);
    table.cells.push_back(std::move(c));
  }
  return table;
}

namespace {

std::size_t column_index(const DatedTable& table, const std::string& name) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), name);
  if (it == table.columns.end()) throw ingest_error(table.source, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - table.columns.begin());
}

}  // namespace

DatedSeries read_price_series(const std::filesystem::path& path, const std::string& column) {
  const DatedTable table = read_dated_table(path);
  const std::size_t j = column.empty() ? 0 : column_index(table, column);
  std::vector<double> values;
  values.reserve(table.dates.size());
  for (std::size_t i = 0; i < table.dates.size(); ++i) {
    const auto& cell = table.cells[i][j];
    if (!cell || !std::isfinite(*cell)) {
      throw ingest_error(path, "missing or non-finite price on " + format_date(table.dates[i]));
    }
    values.push_back(*cell);
  }
  return DatedSeries(table.columns[j], table.dates, std::move(values));
}

std::vector<DatedSeries> read_covariate_series(const std::filesystem::path& path,
                                               const std::vector<std::string>& columns) {
  const DatedTable table = read_dated_table(path);
  std::vector<std::size_t> picks;
  if (columns.empty()) {
    picks.resize(table.columns.size());
    std::iota(picks.begin(), picks.end(), std::size_t{0});
  } else {
    for (const auto& c : columns) picks.push_back(column_index(table, c));
  }
  std::vector<DatedSeries> out;
  for (std::size_t j : picks) {
    std::vector<Date> dates;
    std::vector<double> values;
    for (std::size_t i = 0; i < table.dates.size(); ++i) {
      const auto& cell = table.cells[i][j];
      if (!cell) continue;
      if (!std::isfinite(*cell)) {
        throw ingest_error(path, "non-finite value in column '" + table.columns[j] + "' on " +
                                     format_date(table.dates[i]));
      }
      dates.push_back(table.dates[i]);
      values.push_back(*cell);
    }
    if (dates.empty()) throw ingest_error(path, "column '" + table.columns[j] + "' has no values");
    out.emplace_back(table.columns[j], std::move(dates), std::move(values));
  }
  return out;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

void write_series_csv(const std::filesystem::path& path, const DatedSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "date," << (series.name().empty() ? "value" : series.name()) << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_date(series.dates()[i]) << ',' << format_number(series.values()[i]) << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void write_panel_csv(const std::filesystem::path& path, const CovariatePanel& panel) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "date";
  for (const auto& n : panel.names()) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    out << format_date(panel.dates()[i]);
    for (std::size_t j = 0; j < panel.columns(); ++j) {
      out << ',' << format_number(panel.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace nhpg
