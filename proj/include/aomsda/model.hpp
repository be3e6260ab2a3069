#ifndef AOMSDA_MODEL_HPP
#define AOMSDA_MODEL_HPP

#include "aomsda/linalg.hpp"

#include <optional>

namespace aomsda {

/**
 * Single-hidden-layer denoising autoencoder with a softmax head.
 *
 * The encoder (enc_w, enc_b) is shared by the reconstruction path
 * (dec_w, dec_b) and the classification path (out_w, out_b). Shapes:
 *   enc_w  u x R     enc_b  R
 *   dec_w  R x u     dec_b  u
 *   out_w  R x m     out_b  m
 * Hidden nodes are columns of enc_w and rows of dec_w / out_w.
 */
struct Network {
    Matrix enc_w;
    Vector enc_b;
    Matrix dec_w;
    Vector dec_b;
    Matrix out_w;
    Vector out_b;

    Eigen::Index inputs() const { return enc_w.rows(); }
    Eigen::Index hidden() const { return enc_w.cols(); }
    Eigen::Index classes() const { return out_w.cols(); }

    /// Throws DimensionError when the six arrays disagree on (u, R, m).
    void check_shapes() const;
    bool all_finite() const;
};

/// Exact equality of shapes and every stored double.
bool bit_identical(const Network& a, const Network& b);

/// Shape-matched gradient (or any other per-parameter quantity) for a Network.
struct GradientSet {
    Matrix enc_w;
    Vector enc_b;
    Matrix dec_w;
    Vector dec_b;
    Matrix out_w;
    Vector out_b;

    static GradientSet zeros_like(const Network& net);

    GradientSet& operator+=(const GradientSet& other);
    GradientSet& operator*=(double s);
    bool matches(const Network& net) const;
};

enum class BandwidthMode { kMedian, kFixed };

struct ModelConfig {
    double learning_rate = 0.01;
    /// Heavy-ball coefficient of the optimizer; 0 gives plain SGD.
    double momentum = 0.95;
    double alpha = 1.0;
    double noise_fraction = 0.1;
    int cmd_order = 5;
    BandwidthMode bandwidth_mode = BandwidthMode::kMedian;
    double fixed_bandwidth = 1.0;
    std::uint64_t rng_seed = 1;
    int initial_nodes = 1;

    /// Throws ValidationError on out-of-range fields.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Xavier-uniform weights, zero biases.
Network init_network(Eigen::Index inputs, Eigen::Index nodes, Eigen::Index classes, Rng& rng);

Matrix encode(const Network& net, const Matrix& x);
Matrix decode(const Network& net, const Matrix& h);
Matrix predict(const Network& net, const Matrix& x);

/// Masking noise: each entry zeroed independently with probability p.
Matrix corrupt(const Matrix& x, double p, Rng& rng);

/// Appends one Xavier-initialized hidden node; existing entries stay untouched.
Network grow_node(const Network& net, Rng& rng);

/// Removes hidden node `node` (0-based). Refuses to remove the last node.
Network prune_node(const Network& net, Eigen::Index node);

/// theta <- theta - rate * g, in place.
void apply_gradients(Network& net, const GradientSet& g, double rate);

/// Half-width of the Xavier-uniform interval for a fan pair.
inline double xavier_limit(Eigen::Index fan_in, Eigen::Index fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

} // namespace aomsda

#endif // AOMSDA_MODEL_HPP
