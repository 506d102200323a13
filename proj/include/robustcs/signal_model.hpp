#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace robustcs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random stream handed to every generator. Each Monte-Carlo trial owns one.
using Rng = std::mt19937_64;

/// Sorted, 0-based indices of the nonzero coefficients. Reports and files
/// written for users convert to 1-based.
using Support = std::vector<std::size_t>;

/// Dense coefficient vector together with the indices of its nonzeros.
class SparseSignal {
public:
    SparseSignal() = default;

    /// Builds the support from the nonzeros of `coefficients`.
    explicit SparseSignal(Vector coefficients);

    [[nodiscard]] const Vector& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const Support& support() const noexcept { return support_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(coefficients_.size()); }
    [[nodiscard]] std::size_t nnz() const noexcept { return support_.size(); }

private:
    Vector coefficients_;
    Support support_;
};

/// n x p measurement matrix A. Column normalization is applied by the
/// generator, or on request for loaded data; the type itself does not enforce it.
class MeasurementMatrix {
public:
    MeasurementMatrix() = default;
    explicit MeasurementMatrix(Matrix entries) : entries_(std::move(entries)) {}

    [[nodiscard]] const Matrix& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }

    /// Scales each column to unit Euclidean norm. Throws on a zero column.
    void normalize_columns();

private:
    Matrix entries_;
};

/// Data of one trial: y = A x + noise.
struct ProblemInstance {
    MeasurementMatrix matrix;
    Vector observations;
    SparseSignal truth;
    Vector noise;
    double noise_scale = 0.0;
};

/// i.i.d. N(0,1) entries, columns scaled to unit norm. A column that comes out
/// exactly zero is redrawn.
MeasurementMatrix generate_measurement_matrix(std::size_t n, std::size_t p, Rng& rng);

/// K indices drawn uniformly without replacement, each set to +/-amplitude
/// with equal probability.
SparseSignal generate_sparse_signal(std::size_t p, std::size_t k, double amplitude, Rng& rng);

/// H_K: keeps the k largest-magnitude entries of v. Equal magnitudes keep
/// the lower index.
SparseSignal hard_threshold(const Vector& v, std::size_t k);

/// y - A x.
Vector residuals(const MeasurementMatrix& matrix, const Vector& observations, const Vector& x);

/// Assembles an instance with observations = A * truth + noise.
ProblemInstance make_instance(MeasurementMatrix matrix, SparseSignal truth, Vector noise, double noise_scale);

}  // namespace robustcs
