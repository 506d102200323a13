#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "robustcs/signal_model.hpp"

namespace robustcs {

enum class NoiseFamily { Gaussian, Laplace, StudentT };

std::string_view to_string(NoiseFamily family) noexcept;

/// Case-insensitive; accepts "gaussian"/"normal", "laplace"/"laplacian",
/// "studentt"/"student-t"/"t". Returns nullopt for anything else.
std::optional<NoiseFamily> parse_noise_family(std::string_view name);

/// Noise family plus its scale in the family's own convention:
///   Gaussian  standard deviation
///   Laplace   mean absolute deviation E|e|
///   StudentT  median absolute deviation Med|e|
class NoiseSpec {
public:
    static NoiseSpec gaussian(double scale);
    static NoiseSpec laplace(double scale);
    static NoiseSpec student_t(double dof, double scale);

    /// Validating constructor; dof must be given iff family is StudentT.
    NoiseSpec(NoiseFamily family, std::optional<double> dof, double scale);

    [[nodiscard]] NoiseFamily family() const noexcept { return family_; }
    [[nodiscard]] std::optional<double> dof() const noexcept { return dof_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

private:
    NoiseFamily family_;
    std::optional<double> dof_;
    double scale_;
};

/// sigma such that 20 log10(amplitude / sigma) = snr_db.
double scale_from_snr(double snr_db, double amplitude);
double snr_from_scale(double scale, double amplitude);

/// n i.i.d. draws whose scale functional equals spec.scale().
Vector sample_noise(const NoiseSpec& spec, std::size_t n, Rng& rng);

/// Quantile of the standard Student t distribution with `dof` degrees of freedom.
double t_quantile(double p, double dof);

}  // namespace robustcs
