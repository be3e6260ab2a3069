#ifndef AOMSDA_OBJECTIVES_HPP
#define AOMSDA_OBJECTIVES_HPP

#include "aomsda/model.hpp"

#include <span>

namespace aomsda {

struct LossGrad {
    double loss = 0.0;
    GradientSet grad;
};

/// Mean over samples of ||x - decode(encode(x_corrupted))||^2.
LossGrad recon_loss_grad(const Network& net, const Matrix& clean, const Matrix& corrupted);

/// Mean cross entropy against one-hot targets; log clamped at 1e-12.
LossGrad ce_loss_grad(const Network& net, const Matrix& x, const Matrix& one_hot);

/// One-hot encoding of 0-based class indices.
Matrix one_hot(std::span<const int> labels, Eigen::Index classes);

/// Gaussian-style kernel W_ij = exp(-||x_i - x_j|| / (2 sigma)) over batch rows.
struct SimilarityMatrix {
    Matrix w;
    double sigma = 1.0;
};

struct LaplacianMatrix {
    Matrix l;
};

SimilarityMatrix similarity_matrix(const Matrix& x, double sigma);

/// Median pairwise Euclidean distance, falling back to 1 when it is zero
/// or the batch has a single row.
double median_bandwidth(const Matrix& x);

/// L = D - W with D the diagonal of row sums.
LaplacianMatrix laplacian(const SimilarityMatrix& w);

/// 2 * trace(P^T L P) for prediction rows P.
double laplacian_smoothness(const Matrix& predictions, const LaplacianMatrix& lap);

/**
 * Laplacian smoothness penalty on the softmax outputs of a target batch.
 *
 * loss = 2 * sum_c P_c^T L P_c, which equals the ordered-pair sum
 * sum_{i != j} ||p_i - p_j||^2 W_ij. Gradients reach enc_w, enc_b, out_w
 * and out_b. Fewer than two rows gives zero loss and zero gradient.
 */
LossGrad smoothness_loss_grad(const Network& net, const Matrix& x, double sigma);

/// Central moment discrepancy between the rows of `a` and `b` up to order
/// `order`, normalized by the activation interval [lower, upper].
double cmd(const Matrix& a, const Matrix& b, int order, double lower = 0.0, double upper = 1.0);

struct CmdRegularizer {
    double loss = 0.0;
    double cmd_value = 0.0;
    GradientSet grad;
};

/**
 * coefficient * ||W||_2 over the concatenated weight matrices (biases
 * excluded). The coefficient is treated as a constant, so the gradient is
 * coefficient * W / ||W||_2, or zero when every weight is zero.
 */
LossGrad weight_norm_penalty(const Network& net, double coefficient);

/// alpha * CMD(encode(source), encode(target)) * ||W||_2 with the CMD factor
/// detached from the gradient.
CmdRegularizer cmd_reg_loss_grad(const Network& net, const Matrix& source, const Matrix& target,
                                 double alpha, int order);

} // namespace aomsda

#endif // AOMSDA_OBJECTIVES_HPP
