#include "robustcs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robustcs {

namespace {

// Quadratic forms at or below this are treated as degenerate.
constexpr double kDenominatorFloor = 1e-30;
// sigma is clamped at this fraction of the RMS of the observations.
constexpr double kRelativeSigmaFloor = 1e-12;

// A x for a vector known to vanish outside `support`.
Vector apply_on_support(const MeasurementMatrix& matrix, const Vector& x, const Support& support) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(matrix.rows()));
    for (std::size_t j : support) {
        out.noalias() += x[static_cast<Eigen::Index>(j)] * matrix.entries().col(static_cast<Eigen::Index>(j));
    }
    return out;
}

// A_G g_G.
Vector restricted_direction(const MeasurementMatrix& matrix, const Vector& gradient, const Support& support) {
    return apply_on_support(matrix, gradient, support);
}

void check_problem(const MeasurementMatrix& matrix, const Vector& observations, const IterationControl& control) {
    control.validate();
    if (static_cast<std::size_t>(observations.size()) != matrix.rows()) {
        throw std::invalid_argument("observation length does not match matrix rows");
    }
    if (control.sparsity > matrix.cols()) {
        throw std::invalid_argument("sparsity K exceeds signal dimension p");
    }
    if (matrix.rows() <= control.sparsity) {
        throw std::invalid_argument("need more observations than the sparsity level (n > K)");
    }
}

double sigma_floor(const Vector& observations) {
    const double rms = observations.size() > 0 ? observations.norm() / std::sqrt(double(observations.size())) : 0.0;
    return kRelativeSigmaFloor * (rms > 0.0 ? rms : 1.0);
}

double relative_change(const Vector& next, const Vector& prev) {
    const double denom = prev.squaredNorm();
    if (denom == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return (next - prev).squaredNorm() / denom;
}

}  // namespace

void IterationControl::validate() const {
    if (sparsity < 1) throw std::invalid_argument("sparsity K must be at least 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (max_halvings < 1) throw std::invalid_argument("max_halvings must be at least 1");
}

double objective_q_from_residuals(const Vector& residuals, double sigma, const EstimatorConfig& cfg) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("objective requires sigma > 0");
    }
    const auto& h = cfg.huber;
    double sum = 0.0;
    for (double e : residuals) {
        sum += h.rho(e / sigma);
    }
    const double dof = double(residuals.size()) - double(cfg.control.sparsity);
    return sigma * sum + dof * h.alpha() * sigma;
}

double objective_q(const Vector& x, double sigma, const MeasurementMatrix& matrix, const Vector& observations,
                   const EstimatorConfig& cfg) {
    return objective_q_from_residuals(residuals(matrix, observations, x), sigma, cfg);
}

double scale_update(const Vector& residuals, double sigma_prev, const EstimatorConfig& cfg) {
    if (!(sigma_prev > 0.0)) {
        throw std::invalid_argument("scale_update requires sigma > 0");
    }
    const auto n = static_cast<std::size_t>(residuals.size());
    const std::size_t k = cfg.control.sparsity;
    if (n <= k) {
        throw std::invalid_argument("scale_update requires n > K");
    }
    double sum = 0.0;
    for (double e : residuals) {
        const double s = cfg.huber.psi(e / sigma_prev);
        sum += s * s;
    }
    return sigma_prev * std::sqrt(sum / (double(n - k) * cfg.huber.beta()));
}

PseudoResidual pseudo_residual_gradient(const Vector& residuals, double sigma, const MeasurementMatrix& matrix,
                                        const EstimatorConfig& cfg) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("pseudo residual requires sigma > 0");
    }
    PseudoResidual out;
    out.e_psi = residuals.unaryExpr([&](double e) { return cfg.huber.psi(e / sigma) * sigma; });
    out.gradient = matrix.entries().transpose() * out.e_psi;
    return out;
}

double refine_scale(const Vector& residuals, double sigma_start, const EstimatorConfig& cfg) {
    double sigma = sigma_start;
    for (int i = 0; i < 10000; ++i) {
        const double next = scale_update(residuals, sigma, cfg);
        if (!(next > 0.0)) {
            return sigma;
        }
        const bool settled = std::abs(next - sigma) <= 1e-13 * sigma;
        sigma = next;
        if (settled) break;
    }
    return sigma;
}

Vector huber_weights(const Vector& residuals, double sigma, const HuberParams& huber) {
    return residuals.unaryExpr([&](double e) { return huber.weight(e / sigma); });
}

std::optional<double> stepsize_initial(const Vector& residuals, const Vector& gradient, const Support& support,
                                       const MeasurementMatrix& matrix, double sigma, const EstimatorConfig& cfg) {
    if (support.empty()) {
        return std::nullopt;
    }
    const Vector d = restricted_direction(matrix, gradient, support);
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double v = cfg.huber.vfun(residuals[i] / sigma);
        num += residuals[i] * v * d[i];
        den += d[i] * v * d[i];
    }
    if (!(den > kDenominatorFloor)) {
        return std::nullopt;
    }
    return num / den;
}

std::optional<double> stepsize_subsequent(const Vector& gradient, const Support& support,
                                          const MeasurementMatrix& matrix, const Vector& weights) {
    if (support.empty()) {
        return std::nullopt;
    }
    const Vector d = restricted_direction(matrix, gradient, support);
    double num = 0.0;
    for (std::size_t j : support) {
        const double gj = gradient[static_cast<Eigen::Index>(j)];
        num += gj * gj;
    }
    const double den = (d.array().square() * weights.array()).sum();
    if (!(den > kDenominatorFloor)) {
        return std::nullopt;
    }
    return num / den;
}

RecoveryResult hiht_recover(const MeasurementMatrix& matrix, const Vector& observations, const EstimatorConfig& cfg) {
    const IterationControl& ctl = cfg.control;
    check_problem(matrix, observations, ctl);
    const std::size_t k = ctl.sparsity;
    const auto& huber = cfg.huber;
    const double floor = sigma_floor(observations);

    RecoveryResult result;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(matrix.cols()));
    Support support;
    double sigma = 1.0;
    Vector e = observations;  // residuals of the current iterate
    double q = objective_q_from_residuals(e, sigma, cfg);
    result.objective_trace.push_back(q);

    const Vector y_psi = observations.unaryExpr([&](double v) { return huber.psi(v); });
    const Support initial_support = hard_threshold(matrix.entries().transpose() * y_psi, k).support();

    for (std::size_t it = 0; it < ctl.max_iterations; ++it) {
        double sigma_next = scale_update(e, sigma, cfg);
        if (sigma_next < floor) {
            sigma_next = floor;
            result.exact_fit = true;
        }
        const PseudoResidual pr = pseudo_residual_gradient(e, sigma_next, matrix, cfg);
        const Vector& g = pr.gradient;

        std::optional<double> step;
        if (it == 0) {
            step = stepsize_initial(e, g, initial_support, matrix, sigma_next, cfg);
        } else {
            step = stepsize_subsequent(g, support, matrix, huber_weights(e, sigma_next, huber));
        }
        double mu = step.value_or(1.0);

        bool accepted = false;
        SparseSignal candidate;
        Vector candidate_e;
        double candidate_q = 0.0;
        for (std::size_t h = 0; h <= ctl.max_halvings; ++h) {
            candidate = hard_threshold(x + mu * g, k);
            candidate_e = observations - apply_on_support(matrix, candidate.coefficients(), candidate.support());
            candidate_q = objective_q_from_residuals(candidate_e, sigma_next, cfg);
            if (candidate_q < q) {
                accepted = true;
                break;
            }
            mu *= 0.5;
        }
        if (!accepted) {
            // No descent left from (x, sigma); keep x with the refreshed scale.
            sigma = sigma_next;
            result.stop = StopReason::HalvingsExhausted;
            break;
        }

        const double change = relative_change(candidate.coefficients(), x);
        x = candidate.coefficients();
        support = candidate.support();
        e = std::move(candidate_e);
        sigma = sigma_next;
        q = candidate_q;
        result.objective_trace.push_back(q);
        result.iterations = it + 1;
        if (ctl.record_iterates) {
            result.history.push_back(EstimatorState{x, sigma, support, mu, q, it + 1});
        }
        if (change < ctl.tolerance) {
            result.converged = true;
            result.stop = StopReason::Converged;
            break;
        }
    }

    result.signal = SparseSignal(x);
    result.sigma_loop = sigma;
    result.sigma_hat = sigma;
    if (ctl.refine_scale && !result.exact_fit) {
        result.sigma_hat = std::max(refine_scale(e, sigma, cfg), floor);
    }
    return result;
}

RecoveryResult iht_reference(const MeasurementMatrix& matrix, const Vector& observations,
                             const IterationControl& ctl) {
    check_problem(matrix, observations, ctl);
    const std::size_t k = ctl.sparsity;
    const double dof = double(matrix.rows() - k);
    const double floor = sigma_floor(observations);
    auto objective = [dof](double rss, double sigma) { return rss / (2.0 * sigma) + 0.5 * dof * sigma; };

    RecoveryResult result;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(matrix.cols()));
    Support support;
    double sigma = 1.0;
    Vector e = observations;
    double rss = e.squaredNorm();
    double q = objective(rss, sigma);
    result.objective_trace.push_back(q);

    const Support initial_support = hard_threshold(matrix.entries().transpose() * observations, k).support();

    for (std::size_t it = 0; it < ctl.max_iterations; ++it) {
        double sigma_next = std::sqrt(rss / dof);
        if (sigma_next < floor) {
            sigma_next = floor;
            result.exact_fit = true;
        }
        const Vector g = matrix.entries().transpose() * e;

        const Support& active = it == 0 ? initial_support : support;
        const Vector d = restricted_direction(matrix, g, active);
        const double den = d.squaredNorm();
        double num = 0.0;
        if (it == 0) {
            num = e.dot(d);
        } else {
            for (std::size_t j : active) {
                num += g[static_cast<Eigen::Index>(j)] * g[static_cast<Eigen::Index>(j)];
            }
        }
        double mu = (!active.empty() && den > kDenominatorFloor) ? num / den : 1.0;

        bool accepted = false;
        SparseSignal candidate;
        Vector candidate_e;
        double candidate_rss = 0.0;
        double candidate_q = 0.0;
        for (std::size_t h = 0; h <= ctl.max_halvings; ++h) {
            candidate = hard_threshold(x + mu * g, k);
            candidate_e = observations - apply_on_support(matrix, candidate.coefficients(), candidate.support());
            candidate_rss = candidate_e.squaredNorm();
            candidate_q = objective(candidate_rss, sigma_next);
            if (candidate_q < q) {
                accepted = true;
                break;
            }
            mu *= 0.5;
        }
        if (!accepted) {
            sigma = sigma_next;
            result.stop = StopReason::HalvingsExhausted;
            break;
        }

        const double change = relative_change(candidate.coefficients(), x);
        x = candidate.coefficients();
        support = candidate.support();
        e = std::move(candidate_e);
        rss = candidate_rss;
        sigma = sigma_next;
        q = candidate_q;
        result.objective_trace.push_back(q);
        result.iterations = it + 1;
        if (ctl.record_iterates) {
            result.history.push_back(EstimatorState{x, sigma, support, mu, q, it + 1});
        }
        if (change < ctl.tolerance) {
            result.converged = true;
            result.stop = StopReason::Converged;
            break;
        }
    }

    result.signal = SparseSignal(x);
    result.sigma_loop = sigma;
    result.sigma_hat = sigma;
    if (ctl.refine_scale && !result.exact_fit) {
        result.sigma_hat = std::max(std::sqrt(rss / dof), floor);
    }
    return result;
}

}  // namespace robustcs
