#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nhpg/mcmc.hpp"
#include "nhpg/series.hpp"
#include "nhpg/stats_tests.hpp"
#include "nhpg/synthetic.hpp"

namespace nhpg {

/// Flat key-value configuration: `key = value` lines, `#` comments and
/// `[section]` headers that prefix the following keys as `section.key`.
/// Values may be double-quoted; lists are comma-separated.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  const std::string& source() const noexcept { return source_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  double number_or(const std::string& key, double fallback) const;
  std::size_t count_or(const std::string& key, std::size_t fallback) const;
  std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Relative paths resolve against the directory of the file.
  std::optional<std::filesystem::path> path(const std::string& key) const;
  std::vector<std::filesystem::path> paths(const std::string& key) const;

  /// Rejects any key outside `known`, so typos do not pass silently.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::string source_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
};

enum class Transform { price, log_price, log_return };

Transform parse_transform(const std::string& name);
std::string transform_name(Transform t);
DatedSeries apply_transform(const DatedSeries& prices, Transform t);

struct RunConfig {
  std::filesystem::path price_path;
  std::string price_column;
  std::vector<std::filesystem::path> covariate_paths;
  std::vector<std::string> covariate_columns;
  std::optional<Date> start;
  std::optional<Date> end;
  Transform transform = Transform::log_return;
  bool normalize = true;
  bool intercept_only_transitions = false;
  Priors priors;
  McmcConfig mcmc;
  double level = 0.05;
  std::vector<Transform> test_series{Transform::price, Transform::log_price, Transform::log_return};
  BatteryOptions battery;
  std::optional<std::filesystem::path> assignments;
  std::filesystem::path output_dir = "out";

  /// Checks the window, the MCMC settings and that every input file exists.
  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from(const KeyValueFile& file);

struct ScenarioConfig {
  Scenario scenario;
  std::filesystem::path output_dir = "out";
};

ScenarioConfig load_scenario_config(const std::filesystem::path& path);
ScenarioConfig scenario_config_from(const KeyValueFile& file);

}  // namespace nhpg
