#ifndef AOMSDA_LINALG_HPP
#define AOMSDA_LINALG_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace aomsda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// The single random engine type used everywhere; seeded explicitly so runs replay.
using Rng = std::mt19937_64;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Elementwise logistic sigmoid.
inline Matrix sigmoid(const Matrix& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

/// Row-wise softmax with max-subtraction.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double peak = logits.row(i).maxCoeff();
        RowVector e = (logits.row(i).array() - peak).exp().matrix();
        out.row(i) = e / e.sum();
    }
    return out;
}

} // namespace aomsda

#endif // AOMSDA_LINALG_HPP
