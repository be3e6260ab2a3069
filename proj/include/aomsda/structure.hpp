#ifndef AOMSDA_STRUCTURE_HPP
#define AOMSDA_STRUCTURE_HPP

#include "aomsda/model.hpp"

#include <cstdint>

namespace aomsda {

/// Welford accumulator for a scalar stream; population (divide-by-n) variance.
class RunningStat {
  public:
    void push(double x);
    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double stddev() const;

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Running per-feature Gaussian fit N(mu, sigma^2) of every input row seen.
class DensityEstimate {
  public:
    DensityEstimate() = default;
    explicit DensityEstimate(Eigen::Index features);

    /// Folds every row of `x` into the estimate.
    void update(const Matrix& x);

    const Vector& mean() const { return mean_; }
    Vector stddev() const;
    std::uint64_t count() const { return count_; }
    Eigen::Index features() const { return mean_.size(); }

  private:
    Vector mean_;
    Vector m2_;
    std::uint64_t count_ = 0;
};

struct ExpectedOutput {
    Vector hidden; ///< E[h], length R
    Vector output; ///< E[y_hat], length m
};

/// Closed-form expectation of the network output under the density via the
/// probit approximation of the sigmoid, applied per hidden node.
ExpectedOutput expected_output(const Network& net, const DensityEstimate& density);

struct NsComponents {
    double bias_sq = 0.0;
    double var = 0.0;
};

/// Bias^2 and variance terms of the network significance for one label.
NsComponents ns_components(const Network& net, const DensityEstimate& density, int label);
NsComponents ns_components(const ExpectedOutput& expected, const Network& net, int label);

/// Confidence multipliers of the control chart, both in (0.7, 2.0].
inline double grow_confidence(double raw_bias) {
    return 1.3 * std::exp(-raw_bias * raw_bias) + 0.7;
}
inline double prune_confidence(double raw_var) { return 1.3 * std::exp(-raw_var) + 0.7; }

/// mean + std > min_mean + pi * min_std (beyond rounding noise)
bool grow_condition(double mean, double std, double min_mean, double min_std, double pi);
/// mean + std > min_mean + 2 * chi * min_std
bool prune_condition(double mean, double std, double min_mean, double min_std, double chi);

struct SpcState {
    RunningStat bias;
    RunningStat var;
    double min_mean_bias = 0.0;
    double min_std_bias = 0.0;
    double min_mean_var = 0.0;
    double min_std_var = 0.0;
    std::uint64_t grow_count = 0;
    std::uint64_t prune_count = 0;
};

struct SpcOutcome {
    SpcState state;
    bool grow = false;
    bool prune = false;
};

/**
 * Advances the control chart by one sample.
 *
 * The running statistics track bias_sq and var. The minima follow the
 * lowest mean+std pair seen so far; a grow signal resets the bias minima and
 * a prune signal resets the variance minima to the current values. The first
 * sample only seeds the minima. Grow takes priority: both never fire together.
 */
SpcOutcome spc_step(const SpcState& spc, double bias_sq, double var, double raw_bias,
                    double raw_var);

/// Node with the smallest |E[h_r]| * sum_o |out_w(r, o)|; lowest index on ties.
Eigen::Index least_significant_node(const Network& net, const DensityEstimate& density);

} // namespace aomsda

#endif // AOMSDA_STRUCTURE_HPP
