#include "nhpg/commands.hpp"

#include <array>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nhpg/csv.hpp"
#include "nhpg/diagnostics.hpp"
#include "nhpg/error.hpp"
#include "nhpg/stats_tests.hpp"
#include "nhpg/synthetic.hpp"

namespace nhpg {

namespace fs = std::filesystem;

namespace {

constexpr const char* significance_note =
    "significant = the equal-tailed credible interval at the configured level excludes zero";
constexpr const char* subseries_caveat =
    "subseries are concatenations of regime segments and are tested as if contiguous";

// Collects artifacts in a hidden directory and moves them into place on commit.
class StagedOutput {
 public:
  explicit StagedOutput(fs::path target) : target_(std::move(target)), staging_(target_ / ".staging") {
    std::error_code ec;
    fs::remove_all(staging_, ec);
    fs::create_directories(staging_, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory " + target_.string() + ": " + ec.message());
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }

  fs::path file(const std::string& name) {
    names_.push_back(name);
    return staging_ / name;
  }

  std::vector<fs::path> commit() {
    std::vector<fs::path> out;
    for (const auto& name : names_) {
      const fs::path staged = staging_ / name;
      if (!fs::is_regular_file(staged) || fs::file_size(staged) == 0) {
        throw Error(ErrorCode::artifact, "artifact " + name + " was not written");
      }
    }
    for (const auto& name : names_) {
      fs::create_directories((target_ / name).parent_path());
      fs::rename(staging_ / name, target_ / name);
      out.push_back(target_ / name);
    }
    return out;
  }

 private:
  fs::path target_;
  fs::path staging_;
  std::vector<std::string> names_;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

void note(const CommandOptions& o, const std::string& message) {
  if (o.log) *o.log << message << '\n';
}

RunConfig resolve_run_config(const CommandOptions& o) {
  RunConfig c = load_run_config(o.config);
  if (o.seed) c.mcmc.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.chains) c.mcmc.chains = *o.chains;
  c.validate();
  return c;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json sweep_json(const SweepDraw& d) {
  return {{"b1", to_vec(d.model.state1.coef)},       {"sigma2_1", d.model.state1.sigma2},
          {"b2", to_vec(d.model.state2.coef)},       {"sigma2_2", d.model.state2.sigma2},
          {"beta1", to_vec(d.model.transitions.beta1)}, {"beta2", to_vec(d.model.transitions.beta2)},
          {"log_likelihood", d.log_likelihood}};
}

std::string cell(const CoefficientSummary& c) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << c.mean << (c.significant ? "*" : "");
  return s.str();
}

DatedSeries windowed_prices(const RunConfig& c) {
  return slice(read_price_series(c.price_path, c.price_column), c.start, c.end);
}

}  // namespace

FitInputs prepare_fit_inputs(const RunConfig& config) {
  const DatedSeries prices = windowed_prices(config);
  if (prices.size() < 3) throw Error(ErrorCode::ingestion, "fewer than three prices inside the window");
  std::vector<DatedSeries> covariates;
  for (const auto& p : config.covariate_paths) {
    for (auto& s : read_covariate_series(p, config.covariate_columns.empty() ? std::vector<std::string>{}
                                                                              : config.covariate_columns)) {
      covariates.push_back(std::move(s));
    }
  }
  if (covariates.empty()) throw Error(ErrorCode::ingestion, "no covariates configured");

  // The panel follows the price calendar, so the row before each observation exists.
  AlignedData aligned = align(prices, covariates);
  FitInputs in;
  in.dropped_leading = aligned.dropped_leading;
  in.filled_cells = aligned.filled_cells;
  in.covariates = config.normalize ? zscore_normalize(aligned.covariates) : aligned.covariates;
  in.series = apply_transform(aligned.price, config.transform);
  in.data = make_model_data(in.series, in.covariates);
  return in;
}

void write_coefficients_csv(const fs::path& path, const PosteriorSummary& summary) {
  auto out = open_out(path);
  out << "name,state,block,mean,q025,q975,significant\n";
  for (const auto& c : summary.coefficients) {
    out << c.name << ',' << c.state << ',' << block_name(c.block) << ',' << format_number(c.mean) << ','
        << format_number(c.q_low) << ',' << format_number(c.q_high) << ',' << (c.significant ? "true" : "false")
        << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

void write_smoothed_csv(const fs::path& path, const PosteriorSummary& summary) {
  auto out = open_out(path);
  out << "date,smoothed_p_state1,assigned_state\n";
  for (std::size_t t = 0; t < summary.dates.size(); ++t) {
    out << format_date(summary.dates[t]) << ',' << format_number(summary.p_state1[t]) << ',' << summary.assigned[t]
        << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::string format_coefficient_table(const std::vector<CoefficientSummary>& coefficients) {
  std::vector<std::string> names;
  std::map<std::string, std::array<std::string, 4>> cells;
  for (const auto& c : coefficients) {
    if (c.name == "sigma2") continue;
    const int column = (c.block == Block::mean ? 0 : 2) + (c.state - 1);
    auto& row = cells[c.name];
    if (c.block == Block::mean && c.state == 1) names.push_back(c.name);
    row[static_cast<std::size_t>(column)] = cell(c);
  }
  std::ostringstream s;
  s << "| covariate | B_1 | B_2 | beta_1 | beta_2 |\n";
  s << "|---|---|---|---|---|\n";
  for (const auto& n : names) {
    const auto& row = cells[n];
    s << "| " << n << " | " << row[0] << " | " << row[1] << " | " << row[2] << " | " << row[3] << " |\n";
  }
  return s.str();
}

std::vector<fs::path> cmd_fit(const CommandOptions& options) {
  const RunConfig config = resolve_run_config(options);
  const FitInputs in = prepare_fit_inputs(config);
  note(options, "fit: " + std::to_string(in.data.size()) + " observations, " +
                    std::to_string(in.data.dimension() - 1) + " covariates, " + std::to_string(config.mcmc.chains) +
                    " chains of " + std::to_string(config.mcmc.iterations) + " sweeps");
  Priors priors = config.priors;
  if (config.intercept_only_transitions) priors = Priors::intercept_only_transitions(in.data.dimension(), priors);
  try {
    priors.validate(in.data.dimension());
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }

  std::vector<McmcDraws> chains;
  try {
    chains = run_chains(in.data, priors, config.mcmc);
  } catch (const ChainFailure& f) {
    throw Error(ErrorCode::numerical, f.what());
  }
  const PosteriorSummary summary = summarize(chains, config.level);
  std::optional<DiagnosticsReport> diag;
  if (chains.size() >= 2) diag = diagnostics(chains);

  StagedOutput out(config.output_dir);
  write_coefficients_csv(out.file("coefficients.csv"), summary);
  write_smoothed_csv(out.file("smoothed.csv"), summary);
  {
    auto plot = open_out(out.file("plot.csv"));
    plot << "date," << transform_name(config.transform) << ",smoothed_p_state1\n";
    for (std::size_t t = 0; t < summary.dates.size(); ++t) {
      plot << format_date(summary.dates[t]) << ',' << format_number(in.data.y(static_cast<Eigen::Index>(t))) << ','
           << format_number(summary.p_state1[t]) << '\n';
    }
  }
  {
    nlohmann::json model = to_json(summary.posterior_mean);
    nlohmann::json doc{{"posterior_mean", model},
                       {"level", config.level},
                       {"significance_rule", significance_note},
                       {"draws", summary.draws},
                       {"chains", config.mcmc.chains},
                       {"seed", config.mcmc.seed},
                       {"iterations", config.mcmc.iterations},
                       {"burn_in", config.mcmc.burn_in},
                       {"thin", config.mcmc.thin},
                       {"transform", transform_name(config.transform)},
                       {"observations", in.data.size()},
                       {"state1_count", summary.state1_count},
                       {"state2_count", summary.state2_count},
                       {"covariate_cells_filled", in.filled_cells},
                       {"dropped_leading_dates", in.dropped_leading},
                       {"intercept_only_transitions", config.intercept_only_transitions}};
    if (const auto& n = in.covariates.normalization()) {
      doc["normalization"] = {{"names", in.covariates.names()}, {"means", n->means}, {"sds", n->sds}};
    }
    write_text(out.file("model.json"), doc.dump(2) + "\n");
  }
  {
    nlohmann::json doc{{"seed", config.mcmc.seed}, {"chains", nlohmann::json::array()}};
    for (const auto& c : chains) {
      nlohmann::json sweeps = nlohmann::json::array();
      for (const auto& d : c.sweeps) sweeps.push_back(sweep_json(d));
      doc["chains"].push_back({{"chain", c.chain},
                               {"label_swaps", c.label_swaps},
                               {"sparse_state_sweeps", c.sparse_state_sweeps},
                               {"sweeps", std::move(sweeps)}});
    }
    write_text(out.file("draws.json"), doc.dump() + "\n");
  }
  {
    std::string text = diag ? format_diagnostics(*diag)
                            : "chains: 1\nconvergence diagnostics need at least two chains\n";
    write_text(out.file("diagnostics.txt"), text);
    if (diag) {
      for (const auto& w : diag->warnings) note(options, "warning: " + w);
    }
  }
  return out.commit();
}

std::vector<fs::path> cmd_tests(const CommandOptions& options) {
  const RunConfig config = resolve_run_config(options);
  const DatedSeries prices = windowed_prices(config);
  std::vector<TestReport> reports;
  std::vector<std::string> warnings;
  std::vector<DatedSeries> series;
  for (Transform t : config.test_series) {
    series.push_back(apply_transform(prices, t).renamed(transform_name(t)));
    for (auto& r : run_battery(series.back(), config.battery, &warnings)) reports.push_back(std::move(r));
  }

  StagedOutput out(config.output_dir);
  std::ostringstream notes;
  if (config.assignments) {
    const DatedTable table = read_dated_table(*config.assignments);
    const auto col = std::find(table.columns.begin(), table.columns.end(), "assigned_state");
    if (col == table.columns.end()) {
      throw Error(ErrorCode::ingestion, config.assignments->string() + ": no assigned_state column");
    }
    const auto j = static_cast<std::size_t>(col - table.columns.begin());
    std::vector<int> assigned;
    for (std::size_t i = 0; i < table.dates.size(); ++i) {
      const auto& v = table.cells[i][j];
      if (!v || (*v != 1.0 && *v != 2.0)) {
        throw Error(ErrorCode::ingestion, config.assignments->string() + ": bad state on " + format_date(table.dates[i]));
      }
      assigned.push_back(static_cast<int>(*v));
    }
    auto sub = std::ofstream(out.file("subseries.csv"), std::ios::binary);
    sub << "series_name,state,count,mean,variance,kurtosis,skewness";
    const std::vector<std::string> tests{"DF", "ADF", "LBQ", "KPSS", "VR", "JB"};
    for (const auto& t : tests) sub << ',' << t << "_p";
    sub << '\n';
    for (const auto& s : series) {
      SubseriesReport rep = subseries_report(s, table.dates, assigned, config.battery);
      for (const auto& w : rep.warnings) warnings.push_back(w);
      for (const auto& row : rep.rows) {
        sub << row.series_name << ',' << row.state << ',' << row.count;
        if (row.stats) {
          sub << ',' << format_number(row.stats->mean) << ',' << format_number(row.stats->variance) << ','
              << format_number(row.stats->kurtosis) << ',' << format_number(row.stats->skewness);
        } else {
          sub << ",,,,";
        }
        for (std::size_t k = 0; k < tests.size(); ++k) {
          sub << ',';
          for (const auto& r : row.tests) {
            if (r.test.rfind(tests[k], 0) == 0) sub << bracket_symbol(r.bracket) << format_number(r.p_value);
          }
        }
        sub << '\n';
        for (const auto& r : row.tests) {
          TestReport copy = r;
          copy.series_name = row.series_name + "_state" + std::to_string(row.state);
          reports.push_back(std::move(copy));
        }
      }
    }
    if (!sub) throw Error(ErrorCode::io, "failed writing subseries.csv");
    notes << "caveat: " << subseries_caveat << '\n';
  }
  write_test_report_csv(out.file("tests.csv"), reports);
  notes << "tests: " << reports.size() << '\n';
  for (const auto& w : warnings) notes << "WARNING " << w << '\n';
  write_text(out.file("tests_notes.txt"), notes.str());
  for (const auto& w : warnings) note(options, "warning: " + w);
  return out.commit();
}

std::vector<fs::path> cmd_simulate(const CommandOptions& options) {
  ScenarioConfig config = load_scenario_config(options.config);
  if (options.seed) config.scenario.seeds = {*options.seed};
  if (options.out) config.output_dir = *options.out;

  StagedOutput out(config.output_dir);
  const bool nested = config.scenario.seeds.size() > 1;
  for (std::uint64_t seed : config.scenario.seeds) {
    Rng rng = Rng::substream(seed, 0);
    const SyntheticData data = generate(config.scenario, rng);
    const std::string prefix = nested ? "seed_" + std::to_string(seed) + "/" : "";
    if (nested) fs::create_directories(config.output_dir / ".staging" / ("seed_" + std::to_string(seed)));
    write_series_csv(out.file(prefix + "y.csv"), data.y);
    write_panel_csv(out.file(prefix + "covariates.csv"), data.covariates);
    {
      auto p = open_out(out.file(prefix + "path.csv"));
      p << "date,state\n";
      for (std::size_t t = 0; t < data.path.size(); ++t) p << format_date(data.y.dates()[t]) << ',' << data.path[t] << '\n';
    }
    nlohmann::json truth{{"scenario", config.scenario.name},
                         {"seed", seed},
                         {"T", config.scenario.length},
                         {"noise_scale", config.scenario.noise_scale},
                         {"model", to_json(config.scenario.truth)}};
    write_text(out.file(prefix + "truth.json"), truth.dump(2) + "\n");
    note(options, "simulate: " + config.scenario.name + " seed " + std::to_string(seed) + ", " +
                      std::to_string(data.y.size()) + " observations");
  }
  return out.commit();
}

std::vector<fs::path> cmd_report(const CommandOptions& options, std::ostream& stream) {
  const KeyValueFile file = KeyValueFile::load(options.config);
  const fs::path dir = options.out ? *options.out : file.path("output.dir").value_or(file.base_dir() / "out");
  const auto require = [&](const std::string& name) {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::artifact, "missing artifact " + p.string() + "; run fit first");
    if (fs::file_size(p) == 0) throw Error(ErrorCode::artifact, "empty artifact " + p.string());
    return p;
  };

  nlohmann::json draws;
  nlohmann::json model;
  try {
    draws = nlohmann::json::parse(std::ifstream(require("draws.json")));
    model = nlohmann::json::parse(std::ifstream(require("model.json")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::artifact, std::string("unreadable fit artifact: ") + e.what());
  }
  std::size_t sweeps = 0;
  if (draws.contains("chains") && draws["chains"].is_array()) {
    for (const auto& c : draws["chains"]) sweeps += c.value("sweeps", nlohmann::json::array()).size();
  }
  if (sweeps == 0) throw Error(ErrorCode::artifact, "draws.json holds no retained draws");

  std::vector<CoefficientSummary> coefficients;
  {
    std::ifstream in(require("coefficients.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 7) throw Error(ErrorCode::artifact, "coefficients.csv: malformed row '" + line + "'");
      CoefficientSummary c;
      c.name = f[0];
      try {
        c.state = std::stoi(f[1]);
        c.mean = std::stod(f[3]);
        c.q_low = std::stod(f[4]);
        c.q_high = std::stod(f[5]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::artifact, "coefficients.csv: malformed row '" + line + "'");
      }
      c.block = f[2] == "mean" ? Block::mean : Block::transition;
      c.significant = f[6] == "true";
      coefficients.push_back(std::move(c));
    }
  }
  if (coefficients.empty()) throw Error(ErrorCode::artifact, "coefficients.csv holds no rows");
  require("smoothed.csv");

  std::ostringstream s;
  s << "# Posterior mean estimates\n\n";
  s << format_coefficient_table(coefficients) << '\n';
  for (const auto& c : coefficients) {
    if (c.name == "sigma2") s << "sigma2_" << c.state << " = " << cell(c) << "  \n";
  }
  s << "\nState occupancy: state 1 = " << model.value("state1_count", 0) << " dates, state 2 = "
    << model.value("state2_count", 0) << " dates  \n";
  s << "Retained draws: " << sweeps << "  \n";
  s << "* " << significance_note << " (level " << model.value("level", 0.05) << ")\n";

  StagedOutput out(dir);
  write_text(out.file("report.md"), s.str());
  stream << s.str();
  return out.commit();
}

}  // namespace nhpg
