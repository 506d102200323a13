#pragma once

#include <concepts>

namespace robustcs {

/// The function bundle a loss must provide to drive the M-estimation
/// machinery: loss rho, score psi = rho', chi = psi*e - rho, weight psi(e)/e
/// and v(e) = rho(e)/e^2.
template <typename L>
concept RobustLoss = requires(const L& loss, double e) {
    { loss.rho(e) } -> std::convertible_to<double>;
    { loss.psi(e) } -> std::convertible_to<double>;
    { loss.chi(e) } -> std::convertible_to<double>;
    { loss.weight(e) } -> std::convertible_to<double>;
    { loss.vfun(e) } -> std::convertible_to<double>;
    { loss.asymptotic_slope() } -> std::convertible_to<double>;
};

/// Huber loss with trimming threshold c and its cached consistency factor
/// beta(c). All functions act on standardized residuals.
class HuberParams {
public:
    /// Standard thresholds: 95% and 85% Gaussian efficiency.
    static constexpr double kC1 = 1.345;
    static constexpr double kC2 = 0.732;

    /// Throws std::invalid_argument unless c > 0.
    explicit HuberParams(double c);

    [[nodiscard]] double c() const noexcept { return c_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    /// alpha = E[chi(u)], u ~ N(0,1); equals beta / 2 for Huber.
    [[nodiscard]] double alpha() const noexcept { return 0.5 * beta_; }

    [[nodiscard]] double rho(double e) const noexcept;
    [[nodiscard]] double psi(double e) const noexcept;
    /// psi(e)^2 / 2.
    [[nodiscard]] double chi(double e) const noexcept;
    /// min(1, c/|e|), 1 at the origin.
    [[nodiscard]] double weight(double e) const noexcept;
    /// rho(e)/e^2, 1/2 at the origin.
    [[nodiscard]] double vfun(double e) const noexcept;

    /// lim rho(e)/|e|. Coincides with the threshold for Huber only.
    [[nodiscard]] double asymptotic_slope() const noexcept { return c_; }

private:
    double c_;
    double beta_;
};

static_assert(RobustLoss<HuberParams>);

// Free-function spellings of the bundle.
inline double rho(double e, const HuberParams& h) noexcept { return h.rho(e); }
inline double psi(double e, const HuberParams& h) noexcept { return h.psi(e); }
inline double chi(double e, const HuberParams& h) noexcept { return h.chi(e); }
inline double weight(double e, const HuberParams& h) noexcept { return h.weight(e); }
inline double vfun(double e, const HuberParams& h) noexcept { return h.vfun(e); }

/// beta(c) = 2{c^2(1 - F(c)) + F(c) - 1/2 - c f(c)} with F, f the standard
/// normal cdf and pdf. Equals E[psi_H(u)^2] for u ~ N(0,1).
double beta_factor(double c);

double normal_pdf(double x) noexcept;

/// Evaluated through erfc, so the upper tail keeps full relative precision.
double normal_cdf(double x) noexcept;

}  // namespace robustcs
