#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "robustcs/bench.hpp"
#include "robustcs/estimators.hpp"
#include "robustcs/signal_model.hpp"

namespace robustcs {

/// Schema tag written into every report and manifest.
inline constexpr const char* kReportSchema = "robustcs.report/1";
inline constexpr const char* kTrialCsvSchema = "robustcs.trials/1";

// Distinct failure kinds so the CLI can map them to exit codes.
struct FileNotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough for an exact double round trip.
std::string format_double(double v);

/// Numeric CSV with one header row. Throws MalformedInputError on ragged rows
/// or non-numeric cells, FileNotFoundError if the file cannot be opened.
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Single-column numeric CSV with a header row.
Vector read_csv_vector(const std::filesystem::path& path);

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
void write_csv_vector(const std::filesystem::path& path, const Vector& v, const std::string& header = "y");

struct LoadedProblem {
    MeasurementMatrix matrix;
    Vector observations;
};

/// Loads (A, y) and checks that y has one entry per row of A. Columns are
/// left as stored unless `normalize` is set.
LoadedProblem load_problem(const std::filesystem::path& matrix_path, const std::filesystem::path& obs_path,
                           bool normalize = false);

/// Per-trial log with columns
///   trial,method,family,dof,snr_db,support_match,sq_error,iterations,sigma_hat,converged,noise_scale
/// trial is 1-based; dof is empty for non-t families.
void write_trial_csv(std::ostream& out, const BenchmarkReport& report);

/// One row per (noise point, method) with the aggregate metrics.
void write_summary_csv(std::ostream& out, const BenchmarkReport& report);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
nlohmann::json report_to_json(const BenchmarkReport& report);

/// Support as 1-based indices, coefficients, sigma and run statistics.
nlohmann::json recovery_to_json(const RecoveryResult& result, const std::string& method, std::size_t k);

}  // namespace robustcs
