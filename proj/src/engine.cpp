#include "aomsda/engine.hpp"

#include "aomsda/errors.hpp"
#include "aomsda/objectives.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace aomsda {

namespace {

// Velocity bookkeeping that mirrors grow_node / prune_node; new nodes start at rest.
GradientSet with_new_node(const GradientSet& v) {
    GradientSet out = v;
    const auto r = v.enc_w.cols() + 1;
    out.enc_w.conservativeResize(Eigen::NoChange, r);
    out.enc_w.col(r - 1).setZero();
    out.enc_b.conservativeResize(r);
    out.enc_b(r - 1) = 0.0;
    out.dec_w.conservativeResize(r, Eigen::NoChange);
    out.dec_w.row(r - 1).setZero();
    out.out_w.conservativeResize(r, Eigen::NoChange);
    out.out_w.row(r - 1).setZero();
    return out;
}

Matrix drop_row(const Matrix& m, Eigen::Index row) {
    Matrix out(m.rows() - 1, m.cols());
    out.topRows(row) = m.topRows(row);
    out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
    return out;
}

GradientSet without_node(const GradientSet& v, Eigen::Index node) {
    GradientSet out = v;
    out.enc_w = drop_row(v.enc_w.transpose(), node).transpose();
    out.enc_b = drop_row(v.enc_b, node);
    out.dec_w = drop_row(v.dec_w, node);
    out.out_w = drop_row(v.out_w, node);
    return out;
}

} // namespace

EvalReport evaluate(const Network& net, const Matrix& x, std::span<const int> y_true) {
    if (static_cast<Eigen::Index>(y_true.size()) != x.rows())
        throw DimensionError("evaluate: label count does not match row count");
    const auto m = net.classes();
    for (int label : y_true)
        if (label < 0 || label >= m)
            throw ValidationError("evaluate: label " + std::to_string(label) + " out of range");

    EvalReport report;
    report.precision.assign(static_cast<std::size_t>(m), 0.0);
    report.recall.assign(static_cast<std::size_t>(m), 0.0);
    report.precision_degenerate.assign(static_cast<std::size_t>(m), false);
    report.recall_degenerate.assign(static_cast<std::size_t>(m), false);
    if (x.rows() == 0)
        return report;

    const Matrix p = predict(net, x);
    std::vector<long> tp(static_cast<std::size_t>(m), 0);
    std::vector<long> predicted(static_cast<std::size_t>(m), 0);
    std::vector<long> actual(static_cast<std::size_t>(m), 0);
    long correct = 0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        Eigen::Index guess = 0;
        p.row(i).maxCoeff(&guess);
        const auto truth = static_cast<std::size_t>(y_true[static_cast<std::size_t>(i)]);
        ++predicted[static_cast<std::size_t>(guess)];
        ++actual[truth];
        if (static_cast<std::size_t>(guess) == truth) {
            ++correct;
            ++tp[truth];
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(p.rows());
    for (std::size_t c = 0; c < static_cast<std::size_t>(m); ++c) {
        if (predicted[c] > 0)
            report.precision[c] = static_cast<double>(tp[c]) / static_cast<double>(predicted[c]);
        else
            report.precision_degenerate[c] = true;
        if (actual[c] > 0)
            report.recall[c] = static_cast<double>(tp[c]) / static_cast<double>(actual[c]);
        else
            report.recall_degenerate[c] = true;
    }
    return report;
}

const std::vector<int>& TargetScorer::labels(const UnlabeledBatch& target) {
    return target.labels(EvaluationAccess{});
}

EvalReport TargetScorer::score(const Network& net, const UnlabeledBatch& target) {
    return evaluate(net, target.x(), target.labels(EvaluationAccess{}));
}

RunSummary summarize(std::span<const TraceRecord> records, bool exclude_first_round) {
    RunSummary s;
    if (records.empty())
        return s;
    s.final_hidden_nodes = records.back().hidden_nodes;
    for (const auto& r : records) {
        s.total_grow_events += r.grow_events;
        s.total_prune_events += r.prune_events;
        s.total_train_ms += r.train_ms;
    }

    const auto used = exclude_first_round && records.size() > 1 ? records.subspan(1) : records;
    s.rounds_averaged = used.size();
    const auto n_src = used.front().acc_sources.size();
    const auto m = used.front().precision.size();
    s.mean_source_accuracy.assign(n_src, 0.0);
    s.mean_precision.assign(m, 0.0);
    s.mean_recall.assign(m, 0.0);
    for (const auto& r : used) {
        s.mean_target_accuracy += r.acc_target;
        for (std::size_t j = 0; j < n_src; ++j)
            s.mean_source_accuracy[j] += r.acc_sources[j];
        for (std::size_t c = 0; c < m; ++c) {
            s.mean_precision[c] += r.precision[c];
            s.mean_recall[c] += r.recall[c];
        }
    }
    const double k = static_cast<double>(used.size());
    s.mean_target_accuracy /= k;
    for (auto& v : s.mean_source_accuracy)
        v /= k;
    for (auto& v : s.mean_precision)
        v /= k;
    for (auto& v : s.mean_recall)
        v /= k;
    return s;
}

Learner::Learner(const ModelConfig& config, const AblationFlags& flags, Eigen::Index inputs,
                 int classes)
    : config_(config), flags_(flags), rng_(config.rng_seed), density_(inputs), classes_(classes) {
    config_.validate();
    if (classes < 2)
        throw ValidationError("need at least two classes");
    net_ = init_network(inputs, config_.initial_nodes, classes, rng_);
    velocity_ = GradientSet::zeros_like(net_);
}

void Learner::step(const GradientSet& grad) {
    if (config_.momentum == 0.0) {
        apply_gradients(net_, grad, config_.learning_rate);
        return;
    }
    velocity_ *= config_.momentum;
    velocity_ += grad;
    apply_gradients(net_, velocity_, config_.learning_rate);
}

void Learner::check_loss(double loss, const char* phase) const {
    if (!std::isfinite(loss))
        throw NumericalError(phase, round_,
                             std::string("non-finite loss in ") + phase + " phase of round " +
                                 std::to_string(round_));
}

void Learner::update_density(const StreamSet& set) {
    for (const auto& src : set.sources)
        density_.update(src.x);
}

Learner::RoundScores Learner::test(const StreamSet& set) const {
    RoundScores scores;
    for (const auto& src : set.sources)
        scores.acc_sources.push_back(evaluate(net_, src.x, src.y).accuracy);
    scores.target = TargetScorer::score(net_, set.target);
    return scores;
}

void Learner::generative_step(const Matrix& x, const char* phase) {
    if (x.rows() == 0)
        return;
    const Matrix noisy = corrupt(x, config_.noise_fraction, rng_);
    const LossGrad lg = recon_loss_grad(net_, x, noisy);
    check_loss(lg.loss, phase);
    step(lg.grad);
}

void Learner::discriminative_pass(const LabeledBatch& batch, RoundTraining& stats) {
    Matrix row(1, net_.inputs());
    Matrix target(1, classes_);
    for (Eigen::Index i = 0; i < batch.x.rows(); ++i) {
        const int label = batch.y[static_cast<std::size_t>(i)];
        if (flags_.enable_structure) {
            const ExpectedOutput expected = expected_output(net_, density_);
            const NsComponents ns = ns_components(expected, net_, label);
            Vector err = expected.output;
            err(label) -= 1.0;
            const double raw_bias = std::sqrt(err.array().square().matrix().norm());
            check_loss(ns.bias_sq + ns.var, "structural evolution");
            const SpcOutcome step = spc_step(spc_, ns.bias_sq, ns.var,
                                             raw_bias, ns.var);
            spc_ = step.state;
            if (step.grow) {
                net_ = grow_node(net_, rng_);
                velocity_ = with_new_node(velocity_);
                ++stats.grow_events;
            } else if (step.prune && net_.hidden() >= 2) {
                const auto node = least_significant_node(net_, density_);
                net_ = prune_node(net_, node);
                velocity_ = without_node(velocity_, node);
                ++stats.prune_events;
            }
        }

        row = batch.x.row(i);
        target.setZero();
        target(0, label) = 1.0;
        const LossGrad lg = ce_loss_grad(net_, row, target);
        check_loss(lg.loss, "source discriminative");
        step(lg.grad);
    }
}

void Learner::reweight_step(const Matrix& target_x) {
    const auto n = target_x.rows();
    if (n < 2)
        return;
    const double sigma = config_.bandwidth_mode == BandwidthMode::kFixed
                             ? config_.fixed_bandwidth
                             : median_bandwidth(target_x);
    LossGrad lg = smoothness_loss_grad(net_, target_x, sigma);
    // Averaged over ordered pairs so the step size does not scale with N_t^2.
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
    check_loss(lg.loss / pairs, "target node re-weighting");
    lg.grad *= 1.0 / pairs;
    step(lg.grad);
}

double Learner::cmd_step(const Matrix& source_x, const Matrix& target_x) {
    if (source_x.rows() == 0 || target_x.rows() == 0)
        return 0.0;
    const CmdRegularizer reg =
        cmd_reg_loss_grad(net_, source_x, target_x, config_.alpha, config_.cmd_order);
    check_loss(reg.loss, "CMD regularization");
    step(reg.grad);
    return reg.cmd_value;
}

Learner::RoundTraining Learner::train(const StreamSet& set) {
    RoundTraining stats;
    stats.cmd.assign(set.sources.size(), 0.0);
    for (const auto& src : set.sources) {
        generative_step(src.x, "source generative");
        discriminative_pass(src, stats);
    }
    generative_step(set.target.x(), "target generative");
    if (flags_.enable_reweight)
        reweight_step(set.target.x());
    if (flags_.enable_cmd)
        for (std::size_t j = 0; j < set.sources.size(); ++j)
            stats.cmd[j] = cmd_step(set.sources[j].x, set.target.x());
    if (!net_.all_finite())
        throw NumericalError("round end", round_,
                             "non-finite parameters after round " + std::to_string(round_));
    return stats;
}

RunResult run(const ModelConfig& config, const AblationFlags& flags,
              std::span<const StreamSet> rounds, const RunOptions& options) {
    if (rounds.empty())
        throw ValidationError("run needs at least one round");
    const auto& first = rounds.front();
    if (first.sources.empty())
        throw ValidationError("run needs at least one source stream");
    const Eigen::Index inputs = first.target.x().cols();
    const int classes = first.classes;
    for (std::size_t r = 0; r < rounds.size(); ++r) {
        const auto& set = rounds[r];
        bool ok = set.classes == classes && set.target.x().cols() == inputs &&
                  set.sources.size() == first.sources.size();
        for (const auto& src : set.sources)
            ok = ok && src.x.cols() == inputs &&
                 static_cast<Eigen::Index>(src.y.size()) == src.x.rows();
        if (!ok)
            throw ValidationError("round " + std::to_string(r + 1) +
                                  " disagrees with round 1 on dimensions, classes or sources");
    }

    Learner learner(config, flags, inputs, classes);
    RunResult result;
    result.records.reserve(rounds.size());
    for (std::size_t r = 0; r < rounds.size(); ++r) {
        const StreamSet& set = rounds[r];
        const std::size_t round = set.round != 0 ? set.round : r + 1;
        learner.set_round(round);
        learner.update_density(set);

        if (options.observer)
            options.observer->on_test(round, learner.network());
        const auto scores = learner.test(set);

        const auto start = std::chrono::steady_clock::now();
        const auto training = learner.train(set);
        const auto stop = std::chrono::steady_clock::now();
        if (options.observer)
            options.observer->on_round_end(round, learner.network());

        TraceRecord rec;
        rec.round = round;
        rec.acc_target = scores.target.accuracy;
        rec.acc_sources = scores.acc_sources;
        rec.hidden_nodes = learner.network().hidden();
        rec.grow_events = training.grow_events;
        rec.prune_events = training.prune_events;
        rec.cmd = training.cmd;
        rec.train_ms = options.record_timing
                           ? std::chrono::duration<double, std::milli>(stop - start).count()
                           : 0.0;
        rec.precision = scores.target.precision;
        rec.recall = scores.target.recall;
        result.records.push_back(std::move(rec));
    }
    result.summary = summarize(result.records, options.exclude_first_round);
    result.final_network = learner.network();
    return result;
}

} // namespace aomsda
