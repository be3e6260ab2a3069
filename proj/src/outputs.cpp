#include "aomsda/cli.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace aomsda {

namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("failed while writing " + path.string());
}

} // namespace

std::string trace_csv(const RunResult& result, int n_sources) {
    std::ostringstream out;
    out << "round,acc_target";
    for (int j = 1; j <= n_sources; ++j)
        out << ",acc_src_" << j;
    out << ",hidden_nodes,grow_events,prune_events";
    for (int j = 1; j <= n_sources; ++j)
        out << ",cmd_" << j;
    out << ",train_ms\n";
    for (const auto& r : result.records) {
        out << r.round << ',' << num(r.acc_target);
        for (double a : r.acc_sources)
            out << ',' << num(a);
        out << ',' << r.hidden_nodes << ',' << r.grow_events << ',' << r.prune_events;
        for (double c : r.cmd)
            out << ',' << num(c);
        out << ',' << num(r.train_ms) << '\n';
    }
    return out.str();
}

nlohmann::json summary_json(const RunResult& result, const RunSpec& spec, std::uint64_t seed) {
    const RunSummary& s = result.summary;
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["rounds"] = result.records.size();
    doc["rounds_averaged"] = s.rounds_averaged;
    doc["mean_target_accuracy"] = s.mean_target_accuracy;
    doc["mean_source_accuracy"] = s.mean_source_accuracy;
    doc["mean_target_precision"] = s.mean_precision;
    doc["mean_target_recall"] = s.mean_recall;
    doc["final_hidden_nodes"] = s.final_hidden_nodes;
    doc["total_grow_events"] = s.total_grow_events;
    doc["total_prune_events"] = s.total_prune_events;
    doc["total_train_ms"] = s.total_train_ms;
    nlohmann::json per_round = nlohmann::json::array();
    for (const auto& r : result.records)
        per_round.push_back({{"round", r.round}, {"precision", r.precision}, {"recall", r.recall}});
    doc["per_round_target"] = per_round;
    doc["run_spec"] = to_json(spec);
    return doc;
}

std::filesystem::path write_outputs(const RunResult& result, const RunSpec& spec,
                                    std::uint64_t seed, const std::filesystem::path& outdir) {
    const auto dir = outdir / ("seed_" + std::to_string(seed));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "trace.csv", trace_csv(result, spec.n_sources));
    write_file(dir / "summary.json", summary_json(result, spec, seed).dump(2) + "\n");
    return dir;
}

} // namespace aomsda
