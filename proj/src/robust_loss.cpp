#include "robustcs/robust_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace robustcs {

HuberParams::HuberParams(double c) : c_(c), beta_(0.0) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("Huber threshold c must be positive");
    }
    beta_ = beta_factor(c);
}

double HuberParams::rho(double e) const noexcept {
    const double a = std::abs(e);
    return a <= c_ ? 0.5 * e * e : c_ * a - 0.5 * c_ * c_;
}

double HuberParams::psi(double e) const noexcept {
    return std::clamp(e, -c_, c_);
}

double HuberParams::chi(double e) const noexcept {
    const double s = psi(e);
    return 0.5 * s * s;
}

double HuberParams::weight(double e) const noexcept {
    const double a = std::abs(e);
    return a <= c_ ? 1.0 : c_ / a;
}

double HuberParams::vfun(double e) const noexcept {
    const double a = std::abs(e);
    if (a <= c_) {
        return 0.5;
    }
    return (c_ * a - 0.5 * c_ * c_) / (a * a);
}

double beta_factor(double c) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("beta_factor requires c > 0");
    }
    // 1 - F(c) taken from the upper tail directly; c^2 * tail underflows to 0 for huge c.
    const double upper = 0.5 * std::erfc(c / std::numbers::sqrt2);
    const double f = normal_pdf(c);
    return 2.0 * (c * c * upper + (0.5 - upper) - c * f);
}

double normal_pdf(double x) noexcept {
    constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace robustcs
