#include "nhpg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "nhpg/error.hpp"

namespace nhpg {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

Error config_error(const std::string& message) { return Error(ErrorCode::config, message); }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& source) {
  KeyValueFile file;
  file.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error(source + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw config_error(source + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw config_error(source + ":" + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.count(full)) throw config_error(source + ":" + std::to_string(line_no) + ": duplicate key " + full);
    file.values_[full] = unquote(trim(std::string_view(line).substr(eq + 1)));
    file.lines_[full] = line_no;
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  KeyValueFile file = parse(text.str(), path.string());
  file.base_dir_ = path.parent_path();
  return file;
}

void KeyValueFile::fail(const std::string& key, const std::string& message) const {
  const auto it = lines_.find(key);
  const std::string where = it == lines_.end() ? source_ : source_ + ":" + std::to_string(it->second);
  throw config_error(where + ": " + key + ": " + message);
}

std::optional<std::string> KeyValueFile::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::string_or(const std::string& key, const std::string& fallback) const {
  return string(key).value_or(fallback);
}

double KeyValueFile::number_or(const std::string& key, double fallback) const {
  const auto v = string(key);
  if (!v) return fallback;
  if (*v == "inf" || *v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) fail(key, "expected a number, got '" + *v + "'");
  return out;
}

std::size_t KeyValueFile::count_or(const std::string& key, std::size_t fallback) const {
  const auto v = string(key);
  if (!v) return fallback;
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) fail(key, "expected a non-negative integer, got '" + *v + "'");
  return out;
}

std::uint64_t KeyValueFile::seed_or(const std::string& key, std::uint64_t fallback) const {
  const auto v = string(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) fail(key, "expected an unsigned integer, got '" + *v + "'");
  return out;
}

bool KeyValueFile::flag_or(const std::string& key, bool fallback) const {
  const auto v = string(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  fail(key, "expected true or false, got '" + *v + "'");
}

std::vector<std::string> KeyValueFile::list(const std::string& key) const {
  std::vector<std::string> out;
  const auto v = string(key);
  if (!v) return out;
  std::string_view rest = *v;
  if (rest.size() >= 2 && rest.front() == '[' && rest.back() == ']') rest = rest.substr(1, rest.size() - 2);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = unquote(trim(rest.substr(0, comma)));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> KeyValueFile::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) fail(key, "expected numbers, got '" + item + "'");
    out.push_back(x);
  }
  return out;
}

std::optional<std::filesystem::path> KeyValueFile::path(const std::string& key) const {
  const auto v = string(key);
  if (!v || v->empty()) return std::nullopt;
  std::filesystem::path p(*v);
  return p.is_absolute() ? p : base_dir_ / p;
}

std::vector<std::filesystem::path> KeyValueFile::paths(const std::string& key) const {
  std::vector<std::filesystem::path> out;
  for (const auto& item : list(key)) {
    std::filesystem::path p(item);
    out.push_back(p.is_absolute() ? p : base_dir_ / p);
  }
  return out;
}

void KeyValueFile::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(key, "unknown key");
  }
}

Transform parse_transform(const std::string& name) {
  if (name == "price" || name == "level") return Transform::price;
  if (name == "log-price" || name == "log_price") return Transform::log_price;
  if (name == "log-return" || name == "log_return") return Transform::log_return;
  throw config_error("unknown transform '" + name + "' (expected price, log-price or log-return)");
}

std::string transform_name(Transform t) {
  switch (t) {
    case Transform::price: return "price";
    case Transform::log_price: return "log-price";
    case Transform::log_return: return "log-return";
  }
  return "price";
}

DatedSeries apply_transform(const DatedSeries& prices, Transform t) {
  switch (t) {
    case Transform::price: return prices;
    case Transform::log_price: return log_prices(prices).renamed("log-price");
    case Transform::log_return: return log_returns(prices).renamed("log-return");
  }
  return prices;
}

void RunConfig::validate() const {
  if (start && end && !(*start < *end)) throw config_error("window start must precede window end");
  if (!(level > 0.0 && level < 1.0)) throw config_error("level must lie in (0, 1)");
  try {
    mcmc.validate();
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  if (price_path.empty()) throw config_error("data.price is required");
  const auto check = [](const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) throw Error(ErrorCode::ingestion, "input file not found: " + p.string());
  };
  check(price_path);
  for (const auto& p : covariate_paths) check(p);
  // tests.assignments is usually a fit artifact; the tests command checks it when read.
}

namespace {

const std::vector<std::string> run_keys{
    "data.price", "data.price_column", "data.covariates", "data.covariate_columns", "data.start", "data.end",
    "data.transform", "data.normalize",
    "priors.mean_b", "priors.prec_b", "priors.ig_shape", "priors.ig_scale", "priors.mean_beta", "priors.prec_beta",
    "priors.transitions",
    "mcmc.iterations", "mcmc.burn_in", "mcmc.thin", "mcmc.seed", "mcmc.chains", "mcmc.order_by_variance",
    "summary.level",
    "tests.series", "tests.adf_lags", "tests.adf_drift", "tests.lbq_lags", "tests.kpss_trend", "tests.kpss_bandwidth",
    "tests.vr_periods", "tests.assignments",
    "output.dir"};

std::optional<Date> date_key(const KeyValueFile& file, const std::string& key) {
  const auto v = file.string(key);
  if (!v) return std::nullopt;
  try {
    return parse_date(*v);
  } catch (const Error& e) {
    throw config_error(key + ": " + e.what());
  }
}

int int_key(const KeyValueFile& file, const std::string& key, int fallback) {
  return static_cast<int>(file.count_or(key, static_cast<std::size_t>(fallback)));
}

}  // namespace

RunConfig run_config_from(const KeyValueFile& file) {
  file.require_known(run_keys);
  RunConfig c;
  const auto price = file.path("data.price");
  if (!price) throw config_error(file.source() + ": data.price is required");
  c.price_path = *price;
  c.price_column = file.string_or("data.price_column", "");
  c.covariate_paths = file.paths("data.covariates");
  c.covariate_columns = file.list("data.covariate_columns");
  c.start = date_key(file, "data.start");
  c.end = date_key(file, "data.end");
  c.transform = parse_transform(file.string_or("data.transform", "log-return"));
  c.normalize = file.flag_or("data.normalize", true);

  c.priors.mean_b = to_vector(file.numbers("priors.mean_b"));
  c.priors.prec_b = file.number_or("priors.prec_b", c.priors.prec_b);
  c.priors.ig_shape = file.number_or("priors.ig_shape", c.priors.ig_shape);
  c.priors.ig_scale = file.number_or("priors.ig_scale", c.priors.ig_scale);
  c.priors.mean_beta = to_vector(file.numbers("priors.mean_beta"));
  c.priors.prec_beta = file.number_or("priors.prec_beta", c.priors.prec_beta);
  const std::string transitions = file.string_or("priors.transitions", "covariates");
  if (transitions == "intercept-only") {
    c.intercept_only_transitions = true;
  } else if (transitions != "covariates") {
    throw config_error("priors.transitions must be 'covariates' or 'intercept-only'");
  }

  c.mcmc.iterations = file.count_or("mcmc.iterations", c.mcmc.iterations);
  c.mcmc.burn_in = file.count_or("mcmc.burn_in", c.mcmc.burn_in);
  c.mcmc.thin = file.count_or("mcmc.thin", c.mcmc.thin);
  c.mcmc.seed = file.seed_or("mcmc.seed", c.mcmc.seed);
  c.mcmc.chains = file.count_or("mcmc.chains", c.mcmc.chains);
  c.mcmc.order_by_variance = file.flag_or("mcmc.order_by_variance", true);
  c.level = file.number_or("summary.level", c.level);

  if (file.has("tests.series")) {
    c.test_series.clear();
    for (const auto& s : file.list("tests.series")) c.test_series.push_back(parse_transform(s));
  }
  c.battery.adf_lags = int_key(file, "tests.adf_lags", c.battery.adf_lags);
  c.battery.adf_drift = file.flag_or("tests.adf_drift", c.battery.adf_drift);
  c.battery.lbq_lags = int_key(file, "tests.lbq_lags", c.battery.lbq_lags);
  c.battery.kpss_trend = file.flag_or("tests.kpss_trend", c.battery.kpss_trend);
  if (file.has("tests.kpss_bandwidth")) c.battery.kpss_bandwidth = int_key(file, "tests.kpss_bandwidth", 0);
  if (file.has("tests.vr_periods")) {
    c.battery.vr_periods.clear();
    for (double q : file.numbers("tests.vr_periods")) {
      if (q < 1 || q != static_cast<int>(q)) throw config_error("tests.vr_periods must be positive integers");
      c.battery.vr_periods.push_back(static_cast<int>(q));
    }
  }
  c.assignments = file.path("tests.assignments");
  c.output_dir = file.path("output.dir").value_or(file.base_dir() / "out");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from(KeyValueFile::load(path)); }

namespace {

const std::vector<std::string> scenario_keys{
    "scenario.name", "scenario.T", "scenario.seeds", "scenario.start", "scenario.covariates",
    "scenario.ar_coefficient", "scenario.replay", "scenario.noise_scale", "scenario.covariate_names",
    "truth.b1", "truth.sigma2_1", "truth.b2", "truth.sigma2_2", "truth.beta1", "truth.beta2",
    "output.dir"};

Eigen::VectorXd required_vector(const KeyValueFile& file, const std::string& key) {
  const auto v = file.numbers(key);
  if (v.empty()) throw config_error(file.source() + ": " + key + " is required");
  return to_vector(v);
}

}  // namespace

ScenarioConfig scenario_config_from(const KeyValueFile& file) {
  file.require_known(scenario_keys);
  ScenarioConfig out;
  Scenario& s = out.scenario;
  s.name = file.string_or("scenario.name", "scenario");
  s.length = file.count_or("scenario.T", s.length);
  s.seeds.clear();
  for (double seed : file.numbers("scenario.seeds")) {
    if (seed < 0 || seed != static_cast<double>(static_cast<std::uint64_t>(seed))) {
      throw config_error("scenario.seeds must be non-negative integers");
    }
    s.seeds.push_back(static_cast<std::uint64_t>(seed));
  }
  if (s.seeds.empty()) s.seeds.push_back(1);
  if (const auto d = date_key(file, "scenario.start")) s.start = *d;
  const std::string kind = file.string_or("scenario.covariates", "iid-normal");
  if (kind == "iid-normal") {
    s.covariates.kind = CovariateKind::iid_normal;
  } else if (kind == "ar1") {
    s.covariates.kind = CovariateKind::ar1;
  } else if (kind == "replay") {
    s.covariates.kind = CovariateKind::replay;
    const auto p = file.path("scenario.replay");
    if (!p) throw config_error("scenario.replay is required for replayed covariates");
    s.covariates.replay_path = *p;
  } else {
    throw config_error("scenario.covariates must be iid-normal, ar1 or replay");
  }
  s.covariates.ar_coefficient = file.number_or("scenario.ar_coefficient", s.covariates.ar_coefficient);
  s.noise_scale = file.number_or("scenario.noise_scale", s.noise_scale);
  s.truth.state1.coef = required_vector(file, "truth.b1");
  s.truth.state1.sigma2 = file.number_or("truth.sigma2_1", 1.0);
  s.truth.state2.coef = required_vector(file, "truth.b2");
  s.truth.state2.sigma2 = file.number_or("truth.sigma2_2", 1.0);
  s.truth.transitions.beta1 = required_vector(file, "truth.beta1");
  s.truth.transitions.beta2 = required_vector(file, "truth.beta2");
  s.truth.covariate_names = file.list("scenario.covariate_names");
  if (s.truth.covariate_names.empty()) {
    for (Eigen::Index j = 1; j < s.truth.state1.coef.size(); ++j) s.truth.covariate_names.push_back("x" + std::to_string(j));
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw config_error(file.source() + ": " + e.what());
  }
  out.output_dir = file.path("output.dir").value_or(file.base_dir() / "out");
  return out;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  return scenario_config_from(KeyValueFile::load(path));
}

}  // namespace nhpg
