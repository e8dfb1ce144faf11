#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nhpg/config.hpp"
#include "nhpg/mcmc.hpp"

namespace nhpg {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> chains;
  std::ostream* log = nullptr;  // progress and warnings; null for silence
};

/// Model-ready data assembled from a run configuration: the transformed,
/// windowed series aligned to (optionally normalized) covariates.
struct FitInputs {
  DatedSeries series;
  CovariatePanel covariates;
  ModelData data;
  std::size_t dropped_leading = 0;
  std::size_t filled_cells = 0;
};

FitInputs prepare_fit_inputs(const RunConfig& config);

/// Each command returns the artifact paths it wrote. Artifacts are staged and
/// moved into the output directory only after every one was produced, so a
/// failure leaves no partial output behind.
std::vector<std::filesystem::path> cmd_fit(const CommandOptions& options);
std::vector<std::filesystem::path> cmd_tests(const CommandOptions& options);
std::vector<std::filesystem::path> cmd_simulate(const CommandOptions& options);
std::vector<std::filesystem::path> cmd_report(const CommandOptions& options, std::ostream& out);

void write_coefficients_csv(const std::filesystem::path& path, const PosteriorSummary& summary);
void write_smoothed_csv(const std::filesystem::path& path, const PosteriorSummary& summary);

/// Markdown table in the layout of a posterior-estimates table: one row per
/// design coefficient, columns B_1, B_2, beta_1, beta_2, asterisks on
/// significant entries.
std::string format_coefficient_table(const std::vector<CoefficientSummary>& coefficients);

}  // namespace nhpg
