#include "aomsda/objectives.hpp"

#include "aomsda/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace aomsda {

namespace {

constexpr double kLogFloor = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(what) + ": shape mismatch");
}

Matrix hidden_activations(const Network& net, const Matrix& x) { return encode(net, x); }

Matrix output_logits(const Network& net, const Matrix& h) {
    Matrix z = h * net.out_w;
    z.rowwise() += net.out_b.transpose();
    return z;
}

// Backpropagates a gradient w.r.t. the softmax logits into the head and encoder.
void backprop_head(const Network& net, const Matrix& x, const Matrix& h, const Matrix& d_logits,
                   GradientSet& g) {
    g.out_w = h.transpose() * d_logits;
    g.out_b = d_logits.colwise().sum().transpose();
    const Matrix d_h = d_logits * net.out_w.transpose();
    const Matrix d_pre = d_h.array() * h.array() * (1.0 - h.array());
    g.enc_w = x.transpose() * d_pre;
    g.enc_b = d_pre.colwise().sum().transpose();
}

} // namespace

LossGrad recon_loss_grad(const Network& net, const Matrix& clean, const Matrix& corrupted) {
    net.check_shapes();
    require_same_shape(clean, corrupted, "recon_loss_grad");
    if (clean.cols() != net.inputs())
        throw DimensionError("recon_loss_grad: input width does not match the network");

    LossGrad out{0.0, GradientSet::zeros_like(net)};
    const auto n = clean.rows();
    if (n == 0)
        return out;

    const Matrix h = hidden_activations(net, corrupted);
    const Matrix recon = decode(net, h);
    const Matrix resid = recon - clean;
    const double inv_n = 1.0 / static_cast<double>(n);
    out.loss = resid.squaredNorm() * inv_n;

    const Matrix d_out = (2.0 * inv_n) * resid.array() * recon.array() * (1.0 - recon.array());
    out.grad.dec_w = h.transpose() * d_out;
    out.grad.dec_b = d_out.colwise().sum().transpose();
    const Matrix d_h = d_out * net.dec_w.transpose();
    const Matrix d_pre = d_h.array() * h.array() * (1.0 - h.array());
    out.grad.enc_w = corrupted.transpose() * d_pre;
    out.grad.enc_b = d_pre.colwise().sum().transpose();
    return out;
}

Matrix one_hot(std::span<const int> labels, Eigen::Index classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes)
            throw ValidationError("label " + std::to_string(labels[i]) + " outside [0, " +
                                  std::to_string(classes) + ")");
        y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return y;
}

LossGrad ce_loss_grad(const Network& net, const Matrix& x, const Matrix& one_hot_y) {
    net.check_shapes();
    if (x.cols() != net.inputs() || one_hot_y.cols() != net.classes() ||
        x.rows() != one_hot_y.rows())
        throw DimensionError("ce_loss_grad: shape mismatch");
    for (Eigen::Index i = 0; i < one_hot_y.rows(); ++i) {
        int ones = 0;
        for (Eigen::Index c = 0; c < one_hot_y.cols(); ++c) {
            const double v = one_hot_y(i, c);
            if (v == 1.0)
                ++ones;
            else if (v != 0.0)
                throw ValidationError("target row " + std::to_string(i) + " is not one-hot");
        }
        if (ones != 1)
            throw ValidationError("target row " + std::to_string(i) + " is not one-hot");
    }

    LossGrad out{0.0, GradientSet::zeros_like(net)};
    const auto n = x.rows();
    if (n == 0)
        return out;

    const Matrix h = hidden_activations(net, x);
    const Matrix p = softmax_rows(output_logits(net, h));
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < p.cols(); ++c)
            if (one_hot_y(i, c) == 1.0)
                total -= std::log(std::max(p(i, c), kLogFloor));
    out.loss = total * inv_n;

    const Matrix d_logits = (p - one_hot_y) * inv_n;
    backprop_head(net, x, h, d_logits, out.grad);
    return out;
}

SimilarityMatrix similarity_matrix(const Matrix& x, double sigma) {
    if (!(sigma > 0.0))
        throw ValidationError("kernel bandwidth must be positive");
    const auto n = x.rows();
    SimilarityMatrix s{Matrix::Ones(n, n), sigma};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (x.row(i) - x.row(j)).norm();
            const double w = std::exp(-dist / (2.0 * sigma));
            s.w(i, j) = w;
            s.w(j, i) = w;
        }
    }
    return s;
}

double median_bandwidth(const Matrix& x) {
    const auto n = x.rows();
    if (n < 2)
        return 1.0;
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back((x.row(i) - x.row(j)).norm());
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double median = *mid;
    if (d.size() % 2 == 0)
        median = 0.5 * (median + *std::max_element(d.begin(), mid));
    return median > 0.0 ? median : 1.0;
}

LaplacianMatrix laplacian(const SimilarityMatrix& w) {
    LaplacianMatrix out{-w.w};
    out.l.diagonal() += w.w.rowwise().sum();
    return out;
}

double laplacian_smoothness(const Matrix& predictions, const LaplacianMatrix& lap) {
    if (lap.l.rows() != predictions.rows() || lap.l.cols() != predictions.rows())
        throw DimensionError("laplacian_smoothness: Laplacian size does not match batch");
    return 2.0 * (predictions.transpose() * lap.l * predictions).trace();
}

LossGrad smoothness_loss_grad(const Network& net, const Matrix& x, double sigma) {
    net.check_shapes();
    if (x.cols() != net.inputs())
        throw DimensionError("smoothness_loss_grad: input width does not match the network");
    LossGrad out{0.0, GradientSet::zeros_like(net)};
    if (x.rows() < 2)
        return out;

    const LaplacianMatrix lap = laplacian(similarity_matrix(x, sigma));
    const Matrix h = hidden_activations(net, x);
    const Matrix p = softmax_rows(output_logits(net, h));
    const Matrix lp = lap.l * p;
    out.loss = laplacian_smoothness(p, lap);

    // dLoss/dP = 4 L P; pushed through the row-wise softmax Jacobian.
    const Matrix g_p = 4.0 * lp;
    Matrix d_logits(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double dot = g_p.row(i).dot(p.row(i));
        d_logits.row(i) = p.row(i).array() * (g_p.row(i).array() - dot);
    }
    backprop_head(net, x, h, d_logits, out.grad);
    return out;
}

double cmd(const Matrix& a, const Matrix& b, int order, double lower, double upper) {
    if (a.rows() == 0 || b.rows() == 0)
        throw ValidationError("cmd: empty sample set");
    if (a.cols() != b.cols())
        throw DimensionError("cmd: column counts differ");
    if (order < 1)
        throw ValidationError("cmd: order must be >= 1");
    if (!(upper > lower))
        throw ValidationError("cmd: upper bound must exceed lower bound");

    const double span = std::abs(upper - lower);
    const RowVector mean_a = a.colwise().mean();
    const RowVector mean_b = b.colwise().mean();
    double total = (mean_a - mean_b).norm() / span;

    const Matrix centred_a = a.rowwise() - mean_a;
    const Matrix centred_b = b.rowwise() - mean_b;
    Matrix pow_a = centred_a;
    Matrix pow_b = centred_b;
    for (int k = 2; k <= order; ++k) {
        pow_a = pow_a.cwiseProduct(centred_a);
        pow_b = pow_b.cwiseProduct(centred_b);
        const RowVector diff = pow_a.colwise().mean() - pow_b.colwise().mean();
        total += diff.norm() / std::pow(span, k);
    }
    return total;
}

LossGrad weight_norm_penalty(const Network& net, double coefficient) {
    LossGrad out{0.0, GradientSet::zeros_like(net)};
    const double norm = std::sqrt(net.enc_w.squaredNorm() + net.dec_w.squaredNorm() +
                                  net.out_w.squaredNorm());
    out.loss = coefficient * norm;
    if (norm == 0.0 || coefficient == 0.0)
        return out;
    const double scale = coefficient / norm;
    out.grad.enc_w = scale * net.enc_w;
    out.grad.dec_w = scale * net.dec_w;
    out.grad.out_w = scale * net.out_w;
    return out;
}

CmdRegularizer cmd_reg_loss_grad(const Network& net, const Matrix& source, const Matrix& target,
                                 double alpha, int order) {
    net.check_shapes();
    if (!(alpha >= 0.0))
        throw ValidationError("alpha must be nonnegative");
    const double value = cmd(encode(net, source), encode(net, target), order, 0.0, 1.0);
    LossGrad penalty = weight_norm_penalty(net, alpha * value);
    return {penalty.loss, value, std::move(penalty.grad)};
}

} // namespace aomsda
