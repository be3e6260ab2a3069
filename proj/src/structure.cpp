#include "aomsda/structure.hpp"

#include "aomsda/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace aomsda {

void RunningStat::push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

double RunningStat::stddev() const {
    if (count_ == 0)
        return 0.0;
    return std::sqrt(std::max(0.0, m2_ / static_cast<double>(count_)));
}

DensityEstimate::DensityEstimate(Eigen::Index features)
    : mean_(Vector::Zero(features)), m2_(Vector::Zero(features)) {}

void DensityEstimate::update(const Matrix& x) {
    if (count_ == 0 && mean_.size() == 0) {
        mean_ = Vector::Zero(x.cols());
        m2_ = Vector::Zero(x.cols());
    }
    if (x.cols() != mean_.size())
        throw DimensionError("density update: expected " + std::to_string(mean_.size()) +
                             " features, got " + std::to_string(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        ++count_;
        const Vector row = x.row(i).transpose();
        const Vector delta = row - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_.array() += delta.array() * (row - mean_).array();
    }
}

Vector DensityEstimate::stddev() const {
    if (count_ == 0)
        return Vector::Zero(mean_.size());
    return (m2_.array() / static_cast<double>(count_)).max(0.0).sqrt().matrix();
}

ExpectedOutput expected_output(const Network& net, const DensityEstimate& density) {
    net.check_shapes();
    if (density.count() == 0)
        throw ValidationError("expected_output needs a density fitted on at least one sample");
    if (density.features() != net.inputs())
        throw DimensionError("density width does not match the network");

    const Vector var = density.stddev().array().square().matrix();
    const Vector pre = net.enc_w.transpose() * density.mean() + net.enc_b;
    const Vector spread = net.enc_w.array().square().matrix().transpose() * var;
    const double k = std::numbers::pi / 8.0;

    ExpectedOutput out;
    out.hidden = (pre.array() / (1.0 + k * spread.array()).sqrt()).matrix();
    out.hidden = out.hidden.unaryExpr([](double z) { return sigmoid(z); });
    const RowVector logits = out.hidden.transpose() * net.out_w + net.out_b.transpose();
    out.output = softmax_rows(logits).transpose();
    return out;
}

NsComponents ns_components(const ExpectedOutput& expected, const Network& net, int label) {
    const auto m = net.classes();
    if (label < 0 || label >= m)
        throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(m) + ")");
    Vector target = Vector::Zero(m);
    target(label) = 1.0;

    NsComponents ns;
    ns.bias_sq = (expected.output - target).squaredNorm();

    const Vector h_sq = expected.hidden.array().square().matrix();
    const RowVector logits_sq = h_sq.transpose() * net.out_w + net.out_b.transpose();
    const Vector second_moment = softmax_rows(logits_sq).transpose();
    ns.var = (second_moment.array() - expected.output.array().square()).sum();
    return ns;
}

NsComponents ns_components(const Network& net, const DensityEstimate& density, int label) {
    return ns_components(expected_output(net, density), net, label);
}

namespace {

// Strictly above, ignoring differences at rounding level: with a single prior
// sample the two sides agree in exact arithmetic and must not fire.
bool exceeds(double lhs, double rhs) {
    return lhs > rhs + 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
}

} // namespace

bool grow_condition(double mean, double std, double min_mean, double min_std, double pi) {
    return exceeds(mean + std, min_mean + pi * min_std);
}

bool prune_condition(double mean, double std, double min_mean, double min_std, double chi) {
    return exceeds(mean + std, min_mean + 2.0 * chi * min_std);
}

SpcOutcome spc_step(const SpcState& spc, double bias_sq, double var, double raw_bias,
                    double raw_var) {
    SpcOutcome out{spc, false, false};
    SpcState& s = out.state;
    s.bias.push(bias_sq);
    s.var.push(var);
    const double mb = s.bias.mean();
    const double sb = s.bias.stddev();
    const double mv = s.var.mean();
    const double sv = s.var.stddev();

    if (s.bias.count() == 1) {
        s.min_mean_bias = mb;
        s.min_std_bias = sb;
        s.min_mean_var = mv;
        s.min_std_var = sv;
        return out;
    }

    if (mb + sb < s.min_mean_bias + s.min_std_bias) {
        s.min_mean_bias = mb;
        s.min_std_bias = sb;
    }
    if (mv + sv < s.min_mean_var + s.min_std_var) {
        s.min_mean_var = mv;
        s.min_std_var = sv;
    }

    out.grow = grow_condition(mb, sb, s.min_mean_bias, s.min_std_bias, grow_confidence(raw_bias));
    if (out.grow) {
        s.min_mean_bias = mb;
        s.min_std_bias = sb;
        ++s.grow_count;
        return out;
    }
    out.prune =
        prune_condition(mv, sv, s.min_mean_var, s.min_std_var, prune_confidence(raw_var));
    if (out.prune) {
        s.min_mean_var = mv;
        s.min_std_var = sv;
        ++s.prune_count;
    }
    return out;
}

Eigen::Index least_significant_node(const Network& net, const DensityEstimate& density) {
    if (net.hidden() < 2)
        throw RefusalError("least_significant_node needs at least two hidden nodes");
    const Vector h = expected_output(net, density).hidden;
    Eigen::Index best = 0;
    double best_score = 0.0;
    for (Eigen::Index r = 0; r < net.hidden(); ++r) {
        const double score = std::abs(h(r)) * net.out_w.row(r).cwiseAbs().sum();
        if (r == 0 || score < best_score) {
            best = r;
            best_score = score;
        }
    }
    return best;
}

} // namespace aomsda
