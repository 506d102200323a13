#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustcs/estimators.hpp"
#include "robustcs/noise_models.hpp"
#include "robustcs/signal_model.hpp"

namespace robustcs {

/// An estimator entry in an experiment. No threshold means plain IHT.
struct MethodSpec {
    std::string name;
    std::optional<double> huber_c;

    static MethodSpec iht();
    static MethodSpec hiht(double c, std::string name);
};

/// Accepts "iht", "hiht-c1", "hiht-c2" and "hiht-<c>" for a numeric c.
std::optional<MethodSpec> parse_method(const std::string& name);

/// Runs one method on (A, y).
RecoveryResult run_method(const MethodSpec& method, const MeasurementMatrix& matrix, const Vector& observations,
                          const IterationControl& control);

struct NoisePoint {
    NoiseFamily family = NoiseFamily::Gaussian;
    std::optional<double> dof;
    double snr_db = 40.0;
};

struct ExperimentConfig {
    std::string name = "custom";
    std::string provenance;
    std::size_t n = 512;
    std::size_t p = 256;
    std::size_t k = 8;
    double amplitude = 10.0;
    std::size_t num_trials = 200;
    std::vector<NoisePoint> noise_grid;
    std::vector<MethodSpec> methods;
    std::uint64_t master_seed = 1;
    /// Draw one matrix for the whole run instead of one per trial.
    bool fixed_matrix = false;
    /// Sparsity inside is overwritten with k.
    IterationControl control;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

/// Outcome of one method on one trial at one noise point.
struct TrialRecord {
    std::size_t trial = 0;
    std::size_t point = 0;   ///< index into noise_grid
    std::size_t method = 0;  ///< index into methods
    bool support_match = false;
    double sq_error = 0.0;   ///< ||x_hat - x||^2
    std::size_t iterations = 0;
    double sigma_hat = 0.0;
    double noise_scale = 0.0;
    bool converged = false;
    StopReason stop = StopReason::MaxIterations;
    /// Count of accepted iterations that failed to strictly lower the objective.
    std::size_t monotonicity_violations = 0;
    /// Hash of the (A, y) pair the method received.
    std::uint64_t data_checksum = 0;
};

struct CellSummary {
    std::size_t point = 0;
    std::size_t method = 0;
    double noise_scale = 0.0;
    double mse_linear = 0.0;
    double mse_db = 0.0;
    double per_rate = 0.0;
    std::size_t trials_run = 0;
    double mean_iterations = 0.0;
    double converged_rate = 0.0;
    double median_sigma_ratio = 0.0;  ///< median of sigma_hat / noise_scale
    std::size_t monotonicity_violations = 0;
};

struct BenchmarkReport {
    ExperimentConfig config;
    std::vector<CellSummary> cells;    ///< point-major, then method
    std::vector<TrialRecord> trials;   ///< trial-major, then point, then method

    [[nodiscard]] const CellSummary& cell(std::size_t point, std::size_t method) const;
};

/// 10 log10 of the mean squared l2 error. -inf for perfect recovery.
double mse(const std::vector<SparseSignal>& estimates, const std::vector<SparseSignal>& truths);
double mse_db_from_linear(double linear);

/// Fraction of trials whose estimated support equals the true support.
double per(const std::vector<SparseSignal>& estimates, const std::vector<SparseSignal>& truths);

/// Seed of stream `stream` for trial `index`, derived from the master seed
/// with SplitMix64 so any trial can be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// Data of trial `trial` at noise point `point`. Matrix and signal depend on
/// the trial only; the noise stream is shared by all points of a trial, so
/// points of one family differ only by their scale.
ProblemInstance generate_trial(const ExperimentConfig& cfg, std::size_t trial, std::size_t point);

std::uint64_t checksum(const MeasurementMatrix& matrix, const Vector& observations);

BenchmarkReport run_experiment(const ExperimentConfig& cfg);

/// Recomputes the per-cell summaries from the trial records.
std::vector<CellSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials);

std::vector<ExperimentConfig> experiment_presets(std::size_t num_trials = 200);
std::optional<ExperimentConfig> find_preset(const std::string& name, std::size_t num_trials = 200);

/// Full-scale trial count, available through --full.
inline constexpr std::size_t kFullTrials = 2000;

}  // namespace robustcs
