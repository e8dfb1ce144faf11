#include <iostream>

#include <CLI11.hpp>

#include "nhpg/commands.hpp"
#include "nhpg/error.hpp"

namespace {

void print_error(std::string_view code, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error code=" << code << " message=" << flat << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-regime non-homogeneous hidden Markov model: fitting, tests, simulation, reports"};
  app.require_subcommand(1);

  nhpg::CommandOptions options;
  options.log = &std::cerr;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t chains = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Configuration file")->required();
    cmd->add_option("--seed", seed, "Override the configured seed");
    cmd->add_option("--out", out, "Override the output directory");
    cmd->add_option("--chains", chains, "Override the number of chains")->check(CLI::PositiveNumber);
  };
  auto* fit = app.add_subcommand("fit", "Run the sampler and write posterior summaries");
  auto* tests = app.add_subcommand("tests", "Run the unit-root, autocorrelation and normality tests");
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a scenario file");
  auto* report = app.add_subcommand("report", "Print the coefficient table of a finished fit");
  for (auto* cmd : {fit, tests, simulate, report}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(nhpg::error_code_name(nhpg::ErrorCode::invalid_argument), e.what());
    return nhpg::exit_status(nhpg::ErrorCode::invalid_argument);
  }

  options.config = config;
  for (auto* cmd : {fit, tests, simulate, report}) {
    if (cmd->count("--seed")) options.seed = seed;
    if (cmd->count("--out")) options.out = out;
    if (cmd->count("--chains")) options.chains = chains;
  }

  try {
    std::vector<std::filesystem::path> written;
    if (*fit) written = nhpg::cmd_fit(options);
    if (*tests) written = nhpg::cmd_tests(options);
    if (*simulate) written = nhpg::cmd_simulate(options);
    if (*report) written = nhpg::cmd_report(options, std::cout);
    for (const auto& p : written) std::cerr << "wrote " << p.string() << '\n';
    return 0;
  } catch (const nhpg::Error& e) {
    print_error(nhpg::error_code_name(e.code()), e.what());
    return nhpg::exit_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(nhpg::error_code_name(nhpg::ErrorCode::io), e.what());
    return nhpg::exit_status(nhpg::ErrorCode::io);
  } catch (const std::exception& e) {
    print_error("E_INTERNAL", e.what());
    return 1;
  }
}
