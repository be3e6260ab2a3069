#ifndef AOMSDA_ENGINE_HPP
#define AOMSDA_ENGINE_HPP

#include "aomsda/model.hpp"
#include "aomsda/streams.hpp"
#include "aomsda/structure.hpp"

#include <span>
#include <vector>

namespace aomsda {

/// Switches for the ablation configurations; all on is the full learner.
struct AblationFlags {
    bool enable_reweight = true;
    bool enable_structure = true;
    bool enable_cmd = true;

    bool operator==(const AblationFlags&) const = default;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    /// Set when the class was never predicted (precision) or never present (recall).
    std::vector<bool> precision_degenerate;
    std::vector<bool> recall_degenerate;
};

/// Argmax accuracy plus per-class precision and recall. Empty denominators
/// report 0 and raise the matching degenerate flag.
EvalReport evaluate(const Network& net, const Matrix& x, std::span<const int> y_true);

/// The only code path allowed to read target labels.
struct TargetScorer {
    static EvalReport score(const Network& net, const UnlabeledBatch& target);
    /// Ground truth for reporting and audits; every call is counted by the batch.
    static const std::vector<int>& labels(const UnlabeledBatch& target);
};

struct TraceRecord {
    std::size_t round = 0;
    double acc_target = 0.0;
    std::vector<double> acc_sources;
    Eigen::Index hidden_nodes = 0;
    int grow_events = 0;
    int prune_events = 0;
    std::vector<double> cmd;
    double train_ms = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
};

struct RunSummary {
    double mean_target_accuracy = 0.0;
    std::vector<double> mean_source_accuracy;
    std::vector<double> mean_precision;
    std::vector<double> mean_recall;
    Eigen::Index final_hidden_nodes = 0;
    int total_grow_events = 0;
    int total_prune_events = 0;
    double total_train_ms = 0.0;
    std::size_t rounds_averaged = 0;
};

struct RunResult {
    std::vector<TraceRecord> records;
    RunSummary summary;
    Network final_network;
};

/// Instrumentation hooks; the engine never depends on what they do.
class RunObserver {
  public:
    virtual ~RunObserver() = default;
    /// Called with the exact parameters used to score round `round`.
    virtual void on_test(std::size_t /*round*/, const Network& /*net*/) {}
    /// Called after every training phase of round `round`.
    virtual void on_round_end(std::size_t /*round*/, const Network& /*net*/) {}
};

struct RunOptions {
    /// Leave the cold-start round out of the summary averages.
    bool exclude_first_round = false;
    /// When false train_ms is recorded as 0 so traces replay byte for byte.
    bool record_timing = true;
    RunObserver* observer = nullptr;
};

/// Averages over `records`, skipping the first one when asked.
RunSummary summarize(std::span<const TraceRecord> records, bool exclude_first_round);

/**
 * Online learner state: network, pooled source density, control chart and
 * random engine. Each method is one phase of a round; run() drives them in
 * test-then-train order.
 */
class Learner {
  public:
    Learner(const ModelConfig& config, const AblationFlags& flags, Eigen::Index inputs,
            int classes);

    const Network& network() const { return net_; }
    const DensityEstimate& density() const { return density_; }
    const SpcState& spc() const { return spc_; }

    void update_density(const StreamSet& set);

    struct RoundScores {
        std::vector<double> acc_sources;
        EvalReport target;
    };
    RoundScores test(const StreamSet& set) const;

    struct RoundTraining {
        int grow_events = 0;
        int prune_events = 0;
        std::vector<double> cmd;
    };
    /// Every training phase of one round, in order.
    RoundTraining train(const StreamSet& set);

    void generative_step(const Matrix& x, const char* phase);
    /// Per-sample structural evolution and cross-entropy steps over one source batch.
    void discriminative_pass(const LabeledBatch& batch, RoundTraining& stats);
    void reweight_step(const Matrix& target_x);
    double cmd_step(const Matrix& source_x, const Matrix& target_x);

    void set_round(std::size_t round) { round_ = round; }

  private:
    /// One optimizer step; heavy-ball momentum when configured.
    void step(const GradientSet& grad);
    void check_loss(double loss, const char* phase) const;

    ModelConfig config_;
    AblationFlags flags_;
    Rng rng_;
    Network net_;
    GradientSet velocity_;
    DensityEstimate density_;
    SpcState spc_;
    int classes_;
    std::size_t round_ = 0;
};

/// Prequential test-then-train over every round.
RunResult run(const ModelConfig& config, const AblationFlags& flags,
              std::span<const StreamSet> rounds, const RunOptions& options = {});

} // namespace aomsda

#endif // AOMSDA_ENGINE_HPP
