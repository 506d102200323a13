#include "robustcs/noise_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace robustcs {

std::string_view to_string(NoiseFamily family) noexcept {
    switch (family) {
        case NoiseFamily::Gaussian: return "gaussian";
        case NoiseFamily::Laplace: return "laplace";
        case NoiseFamily::StudentT: return "studentt";
    }
    return "unknown";
}

std::optional<NoiseFamily> parse_noise_family(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "gaussian" || lower == "normal") return NoiseFamily::Gaussian;
    if (lower == "laplace" || lower == "laplacian") return NoiseFamily::Laplace;
    if (lower == "studentt" || lower == "student-t" || lower == "t") return NoiseFamily::StudentT;
    return std::nullopt;
}

NoiseSpec::NoiseSpec(NoiseFamily family, std::optional<double> dof, double scale)
    : family_(family), dof_(dof), scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("noise scale must be positive and finite");
    }
    if ((family == NoiseFamily::StudentT) != dof.has_value()) {
        throw std::invalid_argument("degrees of freedom are required for, and only for, Student-t noise");
    }
    if (dof && !(*dof > 0.0)) {
        throw std::invalid_argument("degrees of freedom must be positive");
    }
}

NoiseSpec NoiseSpec::gaussian(double scale) { return {NoiseFamily::Gaussian, std::nullopt, scale}; }
NoiseSpec NoiseSpec::laplace(double scale) { return {NoiseFamily::Laplace, std::nullopt, scale}; }
NoiseSpec NoiseSpec::student_t(double dof, double scale) { return {NoiseFamily::StudentT, dof, scale}; }

double scale_from_snr(double snr_db, double amplitude) {
    if (!(amplitude > 0.0)) {
        throw std::invalid_argument("amplitude must be positive");
    }
    return amplitude * std::pow(10.0, -snr_db / 20.0);
}

double snr_from_scale(double scale, double amplitude) {
    return 20.0 * std::log10(amplitude / scale);
}

Vector sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng) {
    Vector out(static_cast<Eigen::Index>(n));
    const double s = spec.scale();
    switch (spec.family()) {
        case NoiseFamily::Gaussian: {
            std::normal_distribution<double> normal(0.0, s);
            for (auto& v : out) v = normal(rng);
            break;
        }
        case NoiseFamily::Laplace: {
            // Density exp(-|e|/b)/(2b) with b = E|e|: exponential magnitude, fair sign.
            std::exponential_distribution<double> magnitude(1.0 / s);
            std::bernoulli_distribution coin(0.5);
            for (auto& v : out) {
                const double m = magnitude(rng);
                v = coin(rng) ? m : -m;
            }
            break;
        }
        case NoiseFamily::StudentT: {
            const double nu = *spec.dof();
            // Med|t| = Q(0.75) for a symmetric variate.
            const double mult = s / t_quantile(0.75, nu);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::gamma_distribution<double> chi2(0.5 * nu, 2.0);
            for (auto& v : out) {
                const double z = normal(rng);
                const double w = chi2(rng);
                v = mult * z / std::sqrt(w / nu);
            }
            break;
        }
    }
    return out;
}

double t_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("t_quantile: p must lie in (0, 1)");
    }
    if (!(dof > 0.0)) {
        throw std::invalid_argument("t_quantile: dof must be positive");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // Closed forms for nu = 1 and 2.
    if (dof == 1.0) {
        // tan(pi/4) rounds below 1 in double; the quartiles are exactly +/-1.
        if (p == 0.75) return 1.0;
        if (p == 0.25) return -1.0;
        return std::tan(std::numbers::pi * (p - 0.5));
    }
    if (dof == 2.0) {
        const double a = 4.0 * p * (1.0 - p);
        return (2.0 * p - 1.0) * std::sqrt(2.0 / a);
    }
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

}  // namespace robustcs
