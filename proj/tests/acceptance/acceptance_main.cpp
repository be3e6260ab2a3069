// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "aomsda/cli.hpp"
#include "aomsda/engine.hpp"
#include "aomsda/errors.hpp"
#include "aomsda/objectives.hpp"
#include "aomsda/structure.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace aomsda;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kSeeds = 5;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

RunSpec desk_sea(int sources) {
    RunSpec s;
    s.generator = "sea";
    s.samples = 20000;
    s.rounds = 10;
    s.n_sources = sources;
    return s;
}

struct SeedSweep {
    std::vector<double> accuracy;
    std::vector<double> seconds;
    double mean() const {
        double t = 0.0;
        for (double a : accuracy) t += a;
        return t / static_cast<double>(accuracy.size());
    }
};

SeedSweep sweep(const RunSpec& spec) {
    SeedSweep out;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto start = Clock::now();
        const RunResult r = run_seed(spec, seed);
        out.seconds.push_back(seconds_since(start));
        out.accuracy.push_back(r.summary.mean_target_accuracy);
    }
    return out;
}

std::string list(const std::vector<double>& v, const char* pattern) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(pattern, x);
    return s;
}

Verdict desk_scale(const SeedSweep& three) {
    Verdict v;
    const double slowest = *std::max_element(three.seconds.begin(), three.seconds.end());
    v.require(three.mean() >= 0.85, "mean accuracy below 0.85");
    v.require(slowest <= 120.0, "a seed took longer than 120 s");
    v.detail = "mean " + fmt("%.4f", three.mean()) + " per-seed [" +
               list(three.accuracy, "%.4f") + "] slowest " + fmt("%.2f", slowest) + " s" +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict multi_source(const SeedSweep& three, const SeedSweep& one) {
    Verdict v;
    v.require(three.mean() >= one.mean(), "3 sources did not match 1 source");
    v.detail = "3 sources " + fmt("%.4f", three.mean()) + " vs 1 source " + fmt("%.4f", one.mean()) +
               " (1-source per-seed [" + list(one.accuracy, "%.4f") + "])" +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict gradient_suite() {
    Verdict v;
    const auto start = Clock::now();
    Rng rng(2024);
    std::uniform_int_distribution<int> small(1, 5), classes(2, 5), batch(2, 8);
    const int trials = 25;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Eigen::Index u = small(rng), r = small(rng), m = classes(rng), n = batch(rng);
        const Network net = oracle::random_network(u, r, m, rng);
        const Matrix x = oracle::random_matrix(n, u, rng);
        const Matrix noisy = corrupt(x, 0.2, rng);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& l : labels) l = std::uniform_int_distribution<int>(0, static_cast<int>(m) - 1)(rng);
        const Matrix y = one_hot(labels, m);
        const double sigma = median_bandwidth(x);
        const Matrix xt = oracle::random_matrix(n, u, rng);

        const double e_rec = oracle::gradient_error(net, recon_loss_grad(net, x, noisy).grad,
            [&](const Network& p) { return recon_loss_grad(p, x, noisy).loss; });
        const double e_ce = oracle::gradient_error(net, ce_loss_grad(net, x, y).grad,
            [&](const Network& p) { return ce_loss_grad(p, x, y).loss; });
        const double e_sm = oracle::gradient_error(net, smoothness_loss_grad(net, x, sigma).grad,
            [&](const Network& p) {
                return oracle::pairwise_smoothness(oracle::forward(p, x), x, sigma);
            });
        const CmdRegularizer reg = cmd_reg_loss_grad(net, x, xt, 1.0, 5);
        const double e_reg = oracle::gradient_error(net, reg.grad, [&](const Network& p) {
            double sq = 0.0;
            for (const auto* w : {&p.enc_w, &p.dec_w, &p.out_w}) sq += w->squaredNorm();
            return reg.cmd_value * std::sqrt(sq);
        });
        worst = std::max({worst, e_rec, e_ce, e_sm, e_reg});
    }
    const double elapsed = seconds_since(start);
    v.require(worst <= 1e-4, "relative error above 1e-4");
    v.require(elapsed <= 10.0, "suite slower than 10 s");
    v.detail = std::to_string(trials) + " instances x 4 losses, worst relative error " +
               fmt("%.2e", worst) + ", " + fmt("%.2f", elapsed) + " s" +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict oracle_suite() {
    Verdict v;
    Rng rng(77);

    double trace_gap = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 2 + t % 9;
        const Network net = oracle::random_network(1 + t % 5, 1 + t % 4, 2 + t % 3, rng);
        const Matrix x = oracle::random_matrix(n, net.inputs(), rng);
        const double sigma = median_bandwidth(x);
        trace_gap = std::max(trace_gap, std::abs(smoothness_loss_grad(net, x, sigma).loss -
                             oracle::pairwise_smoothness(oracle::forward(net, x), x, sigma)));
    }
    v.require(trace_gap <= 1e-8, "(a) trace form differs from pairwise sum");

    double stat_gap = 0.0;
    for (int t = 0; t < 30; ++t) {
        const Matrix x = oracle::random_matrix(50 + t, 1 + t % 4, rng) * (1.0 + t);
        DensityEstimate d(x.cols());
        for (Eigen::Index at = 0; at < x.rows(); at += 1 + t % 6)
            d.update(x.middleRows(at, std::min<Eigen::Index>(1 + t % 6, x.rows() - at)));
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double mean = 0.0, sq = 0.0;
            for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j);
            mean /= static_cast<double>(x.rows());
            for (Eigen::Index i = 0; i < x.rows(); ++i) sq += (x(i, j) - mean) * (x(i, j) - mean);
            const double sd = std::sqrt(sq / static_cast<double>(x.rows()));
            stat_gap = std::max({stat_gap, std::abs(d.mean()(j) - mean), std::abs(d.stddev()(j) - sd)});
        }
    }
    v.require(stat_gap <= 1e-8, "(b) streaming statistics differ from batch");

    bool cmd_ok = true;
    for (int t = 0; t < 30; ++t) {
        const Matrix a = oracle::random_matrix(3 + t % 5, 1 + t % 4, rng);
        const Matrix b = oracle::random_matrix(2 + t % 7, a.cols(), rng);
        cmd_ok = cmd_ok && cmd(a, a, 5) == 0.0 && std::abs(cmd(a, b, 5) - cmd(b, a, 5)) <= 1e-12;
    }
    Matrix a(2, 1), b(2, 1);
    a << 0.2, 0.4;
    b << 0.3, 0.5;
    cmd_ok = cmd_ok && std::abs(cmd(a, b, 2) - 0.1) <= 1e-12;
    a << 0.0, 1.0;
    b << 0.5, 0.5;
    cmd_ok = cmd_ok && std::abs(cmd(a, b, 2) - 0.25) <= 1e-12;
    v.require(cmd_ok, "(c) CMD identity, symmetry or hand values");

    int mismatches = 0;
    for (int t = 0; t < 40; ++t) {
        const Network net = oracle::random_network(1 + t % 4, 2 + t % 5, 2 + t % 3, rng);
        DensityEstimate d(net.inputs());
        d.update(oracle::random_matrix(10, net.inputs(), rng));
        Eigen::Index best = -1;
        double best_score = 0.0;
        for (Eigen::Index r = 0; r < net.hidden(); ++r) {
            double pre = net.enc_b(r), spread = 0.0;
            for (Eigen::Index j = 0; j < net.inputs(); ++j) {
                pre += net.enc_w(j, r) * d.mean()(j);
                spread += std::pow(net.enc_w(j, r) * d.stddev()(j), 2);
            }
            const double h = oracle::sigmoid(pre / std::sqrt(1.0 + std::numbers::pi / 8.0 * spread));
            const double score = std::abs(h) * net.out_w.row(r).cwiseAbs().sum();
            if (best < 0 || score < best_score) {
                best = r;
                best_score = score;
            }
        }
        mismatches += least_significant_node(net, d) != best;
    }
    v.require(mismatches == 0, "(d) least significant node disagrees with exhaustive search");
    v.detail = "trace gap " + fmt("%.1e", trace_gap) + ", stats gap " + fmt("%.1e", stat_gap) +
               ", cmd " + (cmd_ok ? "ok" : "bad") + ", node search mismatches " +
               std::to_string(mismatches) + (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict probit_suite() {
    Verdict v;
    Rng rng(303);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Network net = oracle::random_network(1 + t % 4, 1 + t % 5, 2 + t % 2, rng);
        Matrix x(2, net.inputs());
        Vector mu(net.inputs()), sd(net.inputs());
        for (Eigen::Index j = 0; j < net.inputs(); ++j) {
            mu(j) = unit(rng);
            sd(j) = unit(rng);
            x(0, j) = mu(j) - sd(j);
            x(1, j) = mu(j) + sd(j);
        }
        DensityEstimate d(net.inputs());
        d.update(x);
        const Vector mc = oracle::monte_carlo_hidden(net, mu, sd, 100000, rng);
        worst = std::max(worst, (expected_output(net, d).hidden - mc).cwiseAbs().maxCoeff());
    }
    v.require(worst <= 0.05, "probit expectation off by more than 0.05");
    v.detail = "20 networks, worst |E[h] - MC| " + fmt("%.4f", worst) +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict spc_suite() {
    Verdict v;
    v.require(std::abs(grow_confidence(0.0) - 2.0) <= 1e-9, "pi(0) != 2");
    v.require(std::abs(prune_confidence(1e6) - 0.7) <= 1e-9, "chi(inf) != 0.7");
    std::vector<int> grows;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto rounds = fixture::sea_flip_rounds(20000, 10, 3, 6, seed);
        ModelConfig config;
        config.rng_seed = seed;
        const RunResult r = run(config, {}, rounds, fixture::replay_options());
        int g = 0;
        for (std::size_t k = 5; k < 8; ++k) g += r.records[k].grow_events;
        grows.push_back(g);
        v.require(g >= 1, "seed " + std::to_string(seed) + " did not grow after the flip");
    }
    std::string counts;
    for (int g : grows) counts += (counts.empty() ? "" : " ") + std::to_string(g);
    v.detail = "pi(0)=" + fmt("%.9f", grow_confidence(0.0)) + " chi(1e6)=" +
               fmt("%.9f", prune_confidence(1e6)) + ", grows in 3 rounds after flip [" + counts +
               "]" + (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

class Audit : public RunObserver {
  public:
    void on_test(std::size_t round, const Network& net) override {
        if (round > 1) causal = causal && bit_identical(net, last_);
        tested_with.push_back(net);
    }
    void on_round_end(std::size_t, const Network& net) override { last_ = net; }
    bool causal = true;
    std::vector<Network> tested_with;

  private:
    Network last_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict protocol_suite(const fs::path& scratch) {
    Verdict v;
    const RunSpec spec = desk_sea(3);
    const auto rounds = make_stream_rounds(load_dataset(spec, 1), spec.rounds, spec.n_sources);

    Audit audit;
    RunOptions options = fixture::replay_options();
    options.observer = &audit;
    const RunResult r = run(ModelConfig{}, {}, rounds, options);
    bool single_read = true;
    for (const auto& set : rounds) single_read = single_read && set.target.label_reads() == 1;
    bool rescored = true;
    for (std::size_t k = 0; k < rounds.size(); ++k)
        rescored = rescored && TargetScorer::score(audit.tested_with[k], rounds[k].target).accuracy ==
                                   r.records[k].acc_target;
    v.require(audit.causal && rescored, "round k was not scored with round k-1 parameters");

    std::vector<StreamSet> blind;
    for (const auto& set : rounds) {
        std::vector<int> flipped = TargetScorer::labels(set.target);
        for (auto& l : flipped) l = 1 - l;
        blind.push_back({set.sources, UnlabeledBatch(set.target.x(), flipped), set.round, set.classes});
    }
    const RunResult b = run(ModelConfig{}, {}, blind, fixture::replay_options());
    v.require(single_read, "target labels read outside scoring");
    v.require(bit_identical(r.final_network, b.final_network), "target labels changed training");

    RunSpec replay = spec;
    replay.record_timing = false;
    const fs::path d1 = write_outputs(run_seed(replay, 1), replay, 1, scratch / "replay_a");
    const fs::path d2 = write_outputs(run_seed(replay, 1), replay, 1, scratch / "replay_b");
    const bool identical = slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv") &&
                           !slurp(d1 / "trace.csv").empty();
    v.require(identical, "trace.csv differs between replays");
    v.detail = std::string("causality ") + (audit.causal && rescored ? "ok" : "broken") +
               ", quarantine " + (single_read && bit_identical(r.final_network, b.final_network) ? "ok" : "broken") +
               ", replay " + (identical ? "byte-identical" : "differs") +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

Verdict ablation_harness(const fs::path& scratch) {
    Verdict v;
    struct Config {
        const char* name;
        AblationFlags flags;
    };
    const Config configs[] = {{"Original", {true, true, true}},
                              {"A", {false, true, true}},
                              {"B", {true, false, true}},
                              {"C", {true, true, false}}};
    std::set<std::string> reference_keys;
    std::string table;
    for (const auto& c : configs) {
        RunSpec spec = desk_sea(3);
        spec.ablation = c.flags;
        double total = 0.0;
        long nodes = 0;
        for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
            const RunResult r = run_seed(spec, seed);
            const fs::path dir = write_outputs(r, spec, seed, scratch / "ablation" / c.name);
            const auto doc = nlohmann::json::parse(slurp(dir / "summary.json"));
            std::set<std::string> keys;
            for (const auto& [k, _] : doc.items()) keys.insert(k);
            if (reference_keys.empty()) reference_keys = keys;
            v.require(keys == reference_keys, std::string(c.name) + " summary has different fields");
            total += doc["mean_target_accuracy"].get<double>();
            nodes += doc["final_hidden_nodes"].get<long>();
        }
        table += std::string(table.empty() ? "" : ", ") + c.name + " " + fmt("%.4f", total / kSeeds) +
                 " (" + fmt("%.1f", static_cast<double>(nodes) / kSeeds) + " nodes)";
    }
    v.detail = "mean target accuracy over 5 seeds: " + table +
               (v.detail.empty() ? "" : " -- " + v.detail);
    return v;
}

template <typename F>
Verdict guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    const fs::path scratch = fs::temp_directory_path() / "aomsda_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    SeedSweep three, one;
    const Verdict sweeps = guarded([&] {
        three = sweep(desk_sea(3));
        one = sweep(desk_sea(1));
        return Verdict{};
    });

    const std::pair<const char*, Verdict> results[] = {
        {"desk-scale SEA accuracy and runtime",
         sweeps.pass ? desk_scale(three) : sweeps},
        {"multi-source benefit", sweeps.pass ? multi_source(three, one) : sweeps},
        {"gradient suite", guarded(gradient_suite)},
        {"oracle suite", guarded(oracle_suite)},
        {"probit suite", guarded(probit_suite)},
        {"control chart endpoints and drift response", guarded(spc_suite)},
        {"protocol suite", guarded([&] { return protocol_suite(scratch); })},
        {"ablation harness", guarded([&] { return ablation_harness(scratch); })},
    };

    int failures = 0;
    int index = 1;
    for (const auto& [name, verdict] : results) {
        std::printf("%s [%d] %s: %s\n", verdict.pass ? "PASS" : "FAIL", index++, name,
                    verdict.detail.c_str());
        failures += !verdict.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(results)) - failures,
                std::size(results));
    return failures == 0 ? 0 : 1;
}
