#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hsprior/experiments.hpp"
#include "hsprior/inference.hpp"

namespace hsprior::io {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "HSPRIOR_OUTPUT_DIR";

/// `explicit_dir` if given, else $HSPRIOR_OUTPUT_DIR, else "hsprior-out".
std::filesystem::path output_directory(const std::optional<std::string>& explicit_dir);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Shortest representation that round-trips through strtod.
std::string format_double(double x);

/// One row per draw: chain, iteration, divergent, intercept, tau, sigma
/// (regression only), beta[1..D], lambda[1..D].
std::string draws_csv(const PosteriorDraws& draws);
PosteriorDraws parse_draws_csv(std::istream& in);

nlohmann::json to_json(const ParameterSummary& s);
nlohmann::json to_json(const ChainStats& s);
nlohmann::json to_json(const PosteriorShrinkage& s);

/// Posterior summaries, sampler diagnostics, m_eff profile and (optionally)
/// held-out predictive metrics. Wall time only when `timings` is set.
nlohmann::json fit_report(const FitResult& result, const PosteriorShrinkage& shrinkage,
                          const std::optional<PredictiveSummary>& heldout, bool timings);

std::string vanderpas_records_csv(const VanderpasResult& result, bool timings);
std::string vanderpas_cells_csv(const VanderpasResult& result);
std::string sweep_records_csv(const ExperimentResult& result, bool timings);
std::string sweep_rows_csv(const ExperimentResult& result, bool timings);

/// Run manifest: command, effective configuration, seed and library versions;
/// `wall_seconds` is recorded only when given.
nlohmann::json manifest(const std::string& command, const nlohmann::json& config,
                        std::uint64_t seed, std::optional<double> wall_seconds);

/// Pretty JSON followed by a newline.
std::string dump(const nlohmann::json& j);

}  // namespace hsprior::io
