#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "robustcs/robust_loss.hpp"
#include "robustcs/signal_model.hpp"

namespace robustcs {

/// Settings shared by Huber IHT and the plain IHT baseline.
struct IterationControl {
    std::size_t sparsity = 1;            ///< K
    double tolerance = 1e-6;             ///< delta in ||x+ - x||^2 / ||x||^2 < delta
    std::size_t max_iterations = 500;
    std::size_t max_halvings = 50;
    bool record_iterates = false;        ///< keep every accepted iterate in the result
    /// After the loop stops, iterate the scale update with x fixed until sigma
    /// settles, so sigma_hat minimizes Q(x_hat, .). The signal is unaffected.
    bool refine_scale = true;

    void validate() const;
};

struct EstimatorConfig {
    HuberParams huber{HuberParams::kC1};
    IterationControl control;
};

/// Loop state after an accepted iteration.
struct EstimatorState {
    Vector x;
    double sigma = 1.0;
    Support support;
    double stepsize = 0.0;
    double objective = 0.0;
    std::size_t iteration = 0;
};

enum class StopReason {
    Converged,          ///< relative change fell below tolerance
    MaxIterations,
    HalvingsExhausted,  ///< no stepsize in the halving budget decreased the objective
};

struct RecoveryResult {
    SparseSignal signal;
    double sigma_hat = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    StopReason stop = StopReason::MaxIterations;
    /// Set when the scale estimate hit its floor (residuals numerically zero).
    bool exact_fit = false;
    /// Objective at the start and after every accepted iteration.
    std::vector<double> objective_trace;
    /// Filled only with IterationControl::record_iterates.
    std::vector<EstimatorState> history;
    /// Scale reached by the loop itself, before any refinement.
    double sigma_loop = 0.0;
};

// ---------------------------------------------------------------------------
// Building blocks of the Huber IHT iteration. Exposed for testing.

/// Q(x, sigma) = sigma * sum rho((y - Ax)_i / sigma) + (n - K) * alpha * sigma.
double objective_q(const Vector& x, double sigma, const MeasurementMatrix& matrix,
                   const Vector& observations, const EstimatorConfig& cfg);

/// Same objective evaluated from precomputed residuals.
double objective_q_from_residuals(const Vector& residuals, double sigma, const EstimatorConfig& cfg);

/// sigma_next^2 = sigma^2 / ((n - K) beta) * sum psi(e_i / sigma)^2.
/// Throws std::invalid_argument unless sigma_prev > 0 and n > K.
double scale_update(const Vector& residuals, double sigma_prev, const EstimatorConfig& cfg);

struct PseudoResidual {
    Vector e_psi;     ///< psi(e / sigma) * sigma
    Vector gradient;  ///< A^T e_psi
};

PseudoResidual pseudo_residual_gradient(const Vector& residuals, double sigma, const MeasurementMatrix& matrix,
                                        const EstimatorConfig& cfg);

/// First-iteration stepsize
///   mu0 = e^T V A_G g_G / (g_G^T A_G^T V A_G g_G),  V = diag(v(e_i / sigma)).
/// nullopt when the quadratic form is not positive (degenerate support or
/// gradient); callers then fall back to mu = 1.
std::optional<double> stepsize_initial(const Vector& residuals, const Vector& gradient, const Support& support,
                                       const MeasurementMatrix& matrix, double sigma, const EstimatorConfig& cfg);

/// Later stepsizes  mu = g_G^T g_G / (g_G^T A_G^T W A_G g_G), W = diag(weights).
std::optional<double> stepsize_subsequent(const Vector& gradient, const Support& support,
                                          const MeasurementMatrix& matrix, const Vector& weights);

/// Fixed point of scale_update for fixed residuals, started at sigma_start.
double refine_scale(const Vector& residuals, double sigma_start, const EstimatorConfig& cfg);

/// Huber weights w(e_i / sigma), the diagonal of W.
Vector huber_weights(const Vector& residuals, double sigma, const HuberParams& huber);

// ---------------------------------------------------------------------------

/// Huber iterative hard thresholding with joint estimation of the noise scale.
RecoveryResult hiht_recover(const MeasurementMatrix& matrix, const Vector& observations, const EstimatorConfig& cfg);

/// Normalized IHT: the c -> infinity limit of hiht_recover, written with the
/// least-squares loss directly. The scale sqrt(RSS / (n - K)) is tracked only
/// for the acceptance test on RSS / (2 sigma) + (n - K) sigma / 2; stepsizes
/// and the gradient never see it.
RecoveryResult iht_reference(const MeasurementMatrix& matrix, const Vector& observations,
                             const IterationControl& control);

}  // namespace robustcs
