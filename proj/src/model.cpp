#include "aomsda/model.hpp"

#include "aomsda/errors.hpp"

#include <cstring>
#include <string>

namespace aomsda {

namespace {

template <typename Block>
void fill_xavier(Block&& block, double limit, Rng& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index c = 0; c < block.cols(); ++c)
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            block(r, c) = dist(rng);
}

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_cols(const Matrix& x, Eigen::Index cols, const char* what) {
    if (x.cols() != cols)
        throw DimensionError(std::string(what) + ": expected " + std::to_string(cols) +
                             " columns, got " + shape(x));
}

} // namespace

void Network::check_shapes() const {
    const auto u = inputs();
    const auto r = hidden();
    const auto m = classes();
    const bool ok = u >= 1 && r >= 1 && m >= 1 && enc_b.size() == r && dec_w.rows() == r &&
                    dec_w.cols() == u && dec_b.size() == u && out_w.rows() == r &&
                    out_b.size() == m;
    if (!ok)
        throw DimensionError("inconsistent network shapes: enc_w " + shape(enc_w) + ", dec_w " +
                             shape(dec_w) + ", out_w " + shape(out_w));
}

bool Network::all_finite() const {
    return enc_w.allFinite() && enc_b.allFinite() && dec_w.allFinite() && dec_b.allFinite() &&
           out_w.allFinite() && out_b.allFinite();
}

bool bit_identical(const Network& a, const Network& b) {
    auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() &&
               (x.size() == 0 || std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0);
    };
    return same(a.enc_w, b.enc_w) && same(a.enc_b, b.enc_b) && same(a.dec_w, b.dec_w) &&
           same(a.dec_b, b.dec_b) && same(a.out_w, b.out_w) && same(a.out_b, b.out_b);
}

GradientSet GradientSet::zeros_like(const Network& net) {
    return {Matrix::Zero(net.enc_w.rows(), net.enc_w.cols()),
            Vector::Zero(net.enc_b.size()),
            Matrix::Zero(net.dec_w.rows(), net.dec_w.cols()),
            Vector::Zero(net.dec_b.size()),
            Matrix::Zero(net.out_w.rows(), net.out_w.cols()),
            Vector::Zero(net.out_b.size())};
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
    enc_w += other.enc_w;
    enc_b += other.enc_b;
    dec_w += other.dec_w;
    dec_b += other.dec_b;
    out_w += other.out_w;
    out_b += other.out_b;
    return *this;
}

GradientSet& GradientSet::operator*=(double s) {
    enc_w *= s;
    enc_b *= s;
    dec_w *= s;
    dec_b *= s;
    out_w *= s;
    out_b *= s;
    return *this;
}

bool GradientSet::matches(const Network& net) const {
    auto same = [](const auto& a, const auto& b) {
        return a.rows() == b.rows() && a.cols() == b.cols();
    };
    return same(enc_w, net.enc_w) && same(enc_b, net.enc_b) && same(dec_w, net.dec_w) &&
           same(dec_b, net.dec_b) && same(out_w, net.out_w) && same(out_b, net.out_b);
}

void ModelConfig::validate() const {
    if (!(learning_rate >= 0.0))
        throw ValidationError("learning rate must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw ValidationError("momentum must lie in [0, 1)");
    if (!(alpha >= 0.0))
        throw ValidationError("alpha must be nonnegative");
    if (!(noise_fraction >= 0.0 && noise_fraction < 1.0))
        throw ValidationError("noise fraction must lie in [0, 1)");
    if (cmd_order < 1)
        throw ValidationError("CMD order must be at least 1");
    if (bandwidth_mode == BandwidthMode::kFixed && !(fixed_bandwidth > 0.0))
        throw ValidationError("fixed kernel bandwidth must be positive");
    if (initial_nodes < 1)
        throw ValidationError("initial node count must be at least 1");
}

Network init_network(Eigen::Index inputs, Eigen::Index nodes, Eigen::Index classes, Rng& rng) {
    if (inputs < 1 || nodes < 1 || classes < 1)
        throw DimensionError("network dimensions must all be >= 1");
    Network net;
    net.enc_w.resize(inputs, nodes);
    fill_xavier(net.enc_w, xavier_limit(inputs, nodes), rng);
    net.enc_b = Vector::Zero(nodes);
    net.dec_w.resize(nodes, inputs);
    fill_xavier(net.dec_w, xavier_limit(nodes, inputs), rng);
    net.dec_b = Vector::Zero(inputs);
    net.out_w.resize(nodes, classes);
    fill_xavier(net.out_w, xavier_limit(nodes, classes), rng);
    net.out_b = Vector::Zero(classes);
    return net;
}

Matrix encode(const Network& net, const Matrix& x) {
    require_cols(x, net.inputs(), "encode");
    Matrix z = x * net.enc_w;
    z.rowwise() += net.enc_b.transpose();
    return sigmoid(z);
}

Matrix decode(const Network& net, const Matrix& h) {
    require_cols(h, net.hidden(), "decode");
    Matrix z = h * net.dec_w;
    z.rowwise() += net.dec_b.transpose();
    return sigmoid(z);
}

Matrix predict(const Network& net, const Matrix& x) {
    Matrix logits = encode(net, x) * net.out_w;
    logits.rowwise() += net.out_b.transpose();
    return softmax_rows(logits);
}

Matrix corrupt(const Matrix& x, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0))
        throw ValidationError("masking fraction must lie in [0, 1)");
    Matrix out = x;
    if (p == 0.0)
        return out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            if (unit(rng) < p)
                out(r, c) = 0.0;
    return out;
}

Network grow_node(const Network& net, Rng& rng) {
    net.check_shapes();
    const auto u = net.inputs();
    const auto r = net.hidden() + 1;
    const auto m = net.classes();
    Network grown = net;
    grown.enc_w.conservativeResize(u, r);
    fill_xavier(grown.enc_w.col(r - 1), xavier_limit(u, r), rng);
    grown.enc_b.conservativeResize(r);
    grown.enc_b(r - 1) = 0.0;
    grown.dec_w.conservativeResize(r, u);
    fill_xavier(grown.dec_w.row(r - 1), xavier_limit(r, u), rng);
    grown.out_w.conservativeResize(r, m);
    fill_xavier(grown.out_w.row(r - 1), xavier_limit(r, m), rng);
    return grown;
}

Network prune_node(const Network& net, Eigen::Index node) {
    net.check_shapes();
    const auto r = net.hidden();
    if (node < 0 || node >= r)
        throw IndexError("node index " + std::to_string(node) + " out of range for " +
                         std::to_string(r) + " hidden nodes");
    if (r == 1)
        throw RefusalError("cannot prune the only hidden node");

    auto drop_row = [node](const Matrix& m) {
        Matrix out(m.rows() - 1, m.cols());
        out.topRows(node) = m.topRows(node);
        out.bottomRows(m.rows() - node - 1) = m.bottomRows(m.rows() - node - 1);
        return out;
    };

    Network pruned;
    pruned.enc_w = drop_row(net.enc_w.transpose()).transpose();
    pruned.enc_b.resize(r - 1);
    pruned.enc_b.head(node) = net.enc_b.head(node);
    pruned.enc_b.tail(r - node - 1) = net.enc_b.tail(r - node - 1);
    pruned.dec_w = drop_row(net.dec_w);
    pruned.dec_b = net.dec_b;
    pruned.out_w = drop_row(net.out_w);
    pruned.out_b = net.out_b;
    return pruned;
}

void apply_gradients(Network& net, const GradientSet& g, double rate) {
    if (!g.matches(net))
        throw DimensionError("gradient shapes do not match the network");
    net.enc_w -= rate * g.enc_w;
    net.enc_b -= rate * g.enc_b;
    net.dec_w -= rate * g.dec_w;
    net.dec_b -= rate * g.dec_b;
    net.out_w -= rate * g.out_w;
    net.out_b -= rate * g.out_b;
}

} // namespace aomsda
