#include "robustcs/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace robustcs {

SparseSignal::SparseSignal(Vector coefficients) : coefficients_(std::move(coefficients)) {
    for (Eigen::Index j = 0; j < coefficients_.size(); ++j) {
        if (coefficients_[j] != 0.0) {
            support_.push_back(static_cast<std::size_t>(j));
        }
    }
}

void MeasurementMatrix::normalize_columns() {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
        const double norm = entries_.col(j).norm();
        if (norm == 0.0) {
            throw std::domain_error("cannot normalize zero column " + std::to_string(j + 1));
        }
        entries_.col(j) /= norm;
    }
}

MeasurementMatrix generate_measurement_matrix(std::size_t n, std::size_t p, Rng& rng) {
    if (n == 0 || p == 0) {
        throw std::invalid_argument("measurement matrix needs n >= 1 and p >= 1");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        double norm = 0.0;
        // A zero column has probability zero; loop anyway so a broken stream can't divide by zero.
        while (norm == 0.0) {
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                a(i, j) = normal(rng);
            }
            norm = a.col(j).norm();
        }
        a.col(j) /= norm;
    }
    return MeasurementMatrix(std::move(a));
}

SparseSignal generate_sparse_signal(std::size_t p, std::size_t k, double amplitude, Rng& rng) {
    if (k == 0 || k > p) {
        throw std::invalid_argument("sparsity must satisfy 1 <= K <= p");
    }
    if (!(amplitude > 0.0)) {
        throw std::invalid_argument("signal amplitude must be positive");
    }
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::bernoulli_distribution coin(0.5);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < k; ++i) {
        x[static_cast<Eigen::Index>(idx[i])] = coin(rng) ? amplitude : -amplitude;
    }
    return SparseSignal(std::move(x));
}

SparseSignal hard_threshold(const Vector& v, std::size_t k) {
    const auto len = static_cast<std::size_t>(v.size());
    if (k > len) {
        throw std::invalid_argument("hard_threshold: K exceeds vector length");
    }
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_magnitude = [&v](std::size_t a, std::size_t b) {
        const double ma = std::abs(v[static_cast<Eigen::Index>(a)]);
        const double mb = std::abs(v[static_cast<Eigen::Index>(b)]);
        return ma > mb || (ma == mb && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_magnitude);

    Vector out = Vector::Zero(v.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<Eigen::Index>(order[i]);
        out[j] = v[j];
    }
    return SparseSignal(std::move(out));
}

Vector residuals(const MeasurementMatrix& matrix, const Vector& observations, const Vector& x) {
    if (static_cast<std::size_t>(observations.size()) != matrix.rows() ||
        static_cast<std::size_t>(x.size()) != matrix.cols()) {
        throw std::invalid_argument("residuals: dimension mismatch");
    }
    return observations - matrix.entries() * x;
}

ProblemInstance make_instance(MeasurementMatrix matrix, SparseSignal truth, Vector noise, double noise_scale) {
    if (truth.size() != matrix.cols() || static_cast<std::size_t>(noise.size()) != matrix.rows()) {
        throw std::invalid_argument("make_instance: dimension mismatch");
    }
    Vector y = matrix.entries() * truth.coefficients() + noise;
    return ProblemInstance{std::move(matrix), std::move(y), std::move(truth), std::move(noise), noise_scale};
}

}  // namespace robustcs
