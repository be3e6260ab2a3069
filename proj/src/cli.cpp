#include "aomsda/cli.hpp"

#include "CLI11.hpp"

#include <future>
#include <iostream>
#include <fstream>

namespace aomsda {

namespace {

using nlohmann::json;

class HelpRequested : public UsageError {
  public:
    using UsageError::UsageError;
};

template <typename T>
void take(const json& doc, const char* key, T& field) {
    if (auto it = doc.find(key); it != doc.end())
        field = it->get<T>();
}

} // namespace

void RunSpec::validate() const {
    if (!data_path.empty() && !generator.empty())
        throw UsageError("--data and --gen are mutually exclusive");
    if (data_path.empty() && generator.empty())
        throw UsageError("a dataset is required: pass --data <csv> or --gen <sea|hyperplane>");
    if (!generator.empty() && generator != "sea" && generator != "hyperplane")
        throw UsageError("unknown generator '" + generator + "'");
    if (n_sources < 1)
        throw UsageError("--sources must be >= 1");
    if (rounds < 1)
        throw UsageError("--rounds must be >= 1");
    if (seeds.empty())
        throw UsageError("at least one seed is required");
    if (samples < 1)
        throw UsageError("--samples must be >= 1");
    if (!(label_noise >= 0.0 && label_noise < 1.0))
        throw UsageError("--label-noise must lie in [0, 1)");
    if (hyperplane_dims < 2)
        throw UsageError("--dims must be >= 2");
    try {
        model.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
}

nlohmann::json to_json(const RunSpec& spec) {
    json doc;
    doc["data_path"] = spec.data_path;
    doc["label_col"] = spec.label_col;
    doc["has_header"] = spec.has_header;
    doc["generator"] = spec.generator;
    doc["samples"] = spec.samples;
    doc["label_noise"] = spec.label_noise;
    doc["hyperplane_dims"] = spec.hyperplane_dims;
    doc["n_sources"] = spec.n_sources;
    doc["rounds"] = spec.rounds;
    doc["learning_rate"] = spec.model.learning_rate;
    doc["momentum"] = spec.model.momentum;
    doc["alpha"] = spec.model.alpha;
    doc["noise_fraction"] = spec.model.noise_fraction;
    doc["cmd_order"] = spec.model.cmd_order;
    doc["initial_nodes"] = spec.model.initial_nodes;
    doc["kernel_bandwidth"] = spec.model.bandwidth_mode == BandwidthMode::kFixed
                                  ? json(spec.model.fixed_bandwidth)
                                  : json(nullptr);
    doc["enable_reweight"] = spec.ablation.enable_reweight;
    doc["enable_structure"] = spec.ablation.enable_structure;
    doc["enable_cmd"] = spec.ablation.enable_cmd;
    doc["seeds"] = spec.seeds;
    doc["out_dir"] = spec.out_dir;
    doc["exclude_first_round"] = spec.exclude_first_round;
    doc["record_timing"] = spec.record_timing;
    doc["emit_data"] = spec.emit_data;
    return doc;
}

RunSpec run_spec_from_json(const nlohmann::json& doc, RunSpec base) {
    if (!doc.is_object())
        throw UsageError("configuration must be a JSON object");
    static const char* const known[] = {
        "data_path",      "label_col",        "has_header",     "generator",
        "samples",        "label_noise",      "hyperplane_dims", "n_sources",
        "rounds",         "learning_rate",    "momentum",    "alpha",          "noise_fraction",
        "cmd_order",      "initial_nodes",    "kernel_bandwidth", "enable_reweight",
        "enable_structure", "enable_cmd",     "seeds",          "out_dir",
        "exclude_first_round", "record_timing", "emit_data"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw UsageError("unknown configuration key '" + key + "'");
    }
    try {
        RunSpec& s = base;
        take(doc, "data_path", s.data_path);
        take(doc, "label_col", s.label_col);
        take(doc, "has_header", s.has_header);
        take(doc, "generator", s.generator);
        take(doc, "samples", s.samples);
        take(doc, "label_noise", s.label_noise);
        take(doc, "hyperplane_dims", s.hyperplane_dims);
        take(doc, "n_sources", s.n_sources);
        take(doc, "rounds", s.rounds);
        take(doc, "learning_rate", s.model.learning_rate);
        take(doc, "momentum", s.model.momentum);
        take(doc, "alpha", s.model.alpha);
        take(doc, "noise_fraction", s.model.noise_fraction);
        take(doc, "cmd_order", s.model.cmd_order);
        take(doc, "initial_nodes", s.model.initial_nodes);
        if (auto it = doc.find("kernel_bandwidth"); it != doc.end()) {
            if (it->is_null()) {
                s.model.bandwidth_mode = BandwidthMode::kMedian;
            } else {
                s.model.bandwidth_mode = BandwidthMode::kFixed;
                s.model.fixed_bandwidth = it->get<double>();
            }
        }
        take(doc, "enable_reweight", s.ablation.enable_reweight);
        take(doc, "enable_structure", s.ablation.enable_structure);
        take(doc, "enable_cmd", s.ablation.enable_cmd);
        take(doc, "seeds", s.seeds);
        take(doc, "out_dir", s.out_dir);
        take(doc, "exclude_first_round", s.exclude_first_round);
        take(doc, "record_timing", s.record_timing);
        take(doc, "emit_data", s.emit_data);
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad configuration value: ") + e.what());
    }
    return base;
}

RunSpec parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Online multi-source domain adaptation on data streams", "aomsda"};
    RunSpec flags;
    std::string config_path;
    double bandwidth = 0.0;
    bool no_reweight = false, no_structure = false, no_cmd = false, no_timing = false;

    std::vector<std::pair<CLI::Option*, std::function<void(RunSpec&)>>> overrides;
    auto opt = [&](CLI::Option* o, std::function<void(RunSpec&)> apply) {
        overrides.emplace_back(o, std::move(apply));
    };
    opt(app.add_option("--data", flags.data_path, "CSV file with one row per sample"),
        [&](RunSpec& s) { s.data_path = flags.data_path; });
    opt(app.add_option("--label-col", flags.label_col,
                       "Label column index, negative counts from the end"),
        [&](RunSpec& s) { s.label_col = flags.label_col; });
    opt(app.add_flag("--header", flags.has_header, "CSV has a header row"),
        [&](RunSpec& s) { s.has_header = flags.has_header; });
    opt(app.add_option("--gen", flags.generator, "Synthetic generator: sea or hyperplane"),
        [&](RunSpec& s) { s.generator = flags.generator; });
    opt(app.add_option("--samples", flags.samples, "Generated sample count"),
        [&](RunSpec& s) { s.samples = flags.samples; });
    opt(app.add_option("--label-noise", flags.label_noise, "Generated label flip fraction"),
        [&](RunSpec& s) { s.label_noise = flags.label_noise; });
    opt(app.add_option("--dims", flags.hyperplane_dims, "Hyperplane dimensionality"),
        [&](RunSpec& s) { s.hyperplane_dims = flags.hyperplane_dims; });
    opt(app.add_option("--sources", flags.n_sources, "Number of source streams"),
        [&](RunSpec& s) { s.n_sources = flags.n_sources; });
    opt(app.add_option("--rounds", flags.rounds, "Number of evaluation rounds"),
        [&](RunSpec& s) { s.rounds = flags.rounds; });
    opt(app.add_option("--alpha", flags.model.alpha, "CMD regularization constant"),
        [&](RunSpec& s) { s.model.alpha = flags.model.alpha; });
    opt(app.add_option("--lr", flags.model.learning_rate, "SGD learning rate"),
        [&](RunSpec& s) { s.model.learning_rate = flags.model.learning_rate; });
    opt(app.add_option("--momentum", flags.model.momentum, "SGD momentum (0 = plain SGD)"),
        [&](RunSpec& s) { s.model.momentum = flags.model.momentum; });
    opt(app.add_option("--cmd-order", flags.model.cmd_order, "Highest CMD moment order"),
        [&](RunSpec& s) { s.model.cmd_order = flags.model.cmd_order; });
    opt(app.add_option("--noise", flags.model.noise_fraction, "Masking-noise fraction"),
        [&](RunSpec& s) { s.model.noise_fraction = flags.model.noise_fraction; });
    opt(app.add_option("--initial-nodes", flags.model.initial_nodes, "Initial hidden nodes"),
        [&](RunSpec& s) { s.model.initial_nodes = flags.model.initial_nodes; });
    opt(app.add_option("--bandwidth", bandwidth,
                       "Fixed smoothness kernel bandwidth (default: median heuristic)"),
        [&](RunSpec& s) {
            s.model.bandwidth_mode = BandwidthMode::kFixed;
            s.model.fixed_bandwidth = bandwidth;
        });
    opt(app.add_option("--seed", flags.seeds, "Seed list, comma separated")->delimiter(','),
        [&](RunSpec& s) { s.seeds = flags.seeds; });
    opt(app.add_flag("--no-reweight", no_reweight, "Disable node re-weighting"),
        [&](RunSpec& s) { s.ablation.enable_reweight = !no_reweight; });
    opt(app.add_flag("--no-structure", no_structure, "Disable structural learning"),
        [&](RunSpec& s) { s.ablation.enable_structure = !no_structure; });
    opt(app.add_flag("--no-cmd", no_cmd, "Disable CMD regularization"),
        [&](RunSpec& s) { s.ablation.enable_cmd = !no_cmd; });
    opt(app.add_option("--out", flags.out_dir, "Output directory"),
        [&](RunSpec& s) { s.out_dir = flags.out_dir; });
    opt(app.add_flag("--exclude-first-round", flags.exclude_first_round,
                     "Leave the cold-start round out of summary averages"),
        [&](RunSpec& s) { s.exclude_first_round = flags.exclude_first_round; });
    opt(app.add_flag("--no-timing", no_timing, "Record train_ms as 0 for byte-stable traces"),
        [&](RunSpec& s) { s.record_timing = !no_timing; });
    opt(app.add_flag("--emit-data", flags.emit_data, "Also write the raw dataset as data.csv"),
        [&](RunSpec& s) { s.emit_data = flags.emit_data; });
    app.add_option("--config", config_path, "JSON file with RunSpec keys; flags win");

    std::vector<std::string> argv_store{"aomsda"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunSpec spec;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw UsageError("cannot open config file " + config_path);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError("config file " + config_path + ": " + e.what());
        }
        spec = run_spec_from_json(doc, spec);
    }
    for (const auto& [option, apply] : overrides)
        if (option->count() > 0)
            apply(spec);
    spec.validate();
    return spec;
}

Dataset load_dataset(const RunSpec& spec, std::uint64_t seed) {
    if (!spec.data_path.empty())
        return load_csv(spec.data_path, spec.label_col, spec.has_header);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0xda7au};
    Rng rng(seq);
    if (spec.generator == "sea")
        return gen_sea(spec.samples, default_sea_schedule(spec.samples), spec.label_noise, rng);
    return gen_hyperplane(spec.samples, spec.hyperplane_dims, spec.samples / 3,
                          2 * spec.samples / 3, spec.label_noise, rng);
}

RunResult run_seed(const RunSpec& spec, std::uint64_t seed) {
    const auto rounds = make_stream_rounds(load_dataset(spec, seed), spec.rounds, spec.n_sources);
    ModelConfig config = spec.model;
    config.rng_seed = seed;
    RunOptions options;
    options.exclude_first_round = spec.exclude_first_round;
    options.record_timing = spec.record_timing;
    return run(config, spec.ablation, rounds, options);
}

int cli_main(const std::vector<std::string>& args) {
    RunSpec spec;
    try {
        spec = parse_args(args);
    } catch (const HelpRequested& help) {
        std::cout << help.what();
        return kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nrun with --help for options\n";
        return kExitUsage;
    }

    try {
        std::vector<std::future<RunResult>> jobs;
        for (const auto seed : spec.seeds)
            jobs.push_back(std::async(std::launch::async, [&spec, seed] {
                return run_seed(spec, seed);
            }));
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto seed = spec.seeds[i];
            const RunResult result = jobs[i].get();
            const auto dir = write_outputs(result, spec, seed, spec.out_dir);
            if (spec.emit_data)
                write_csv(load_dataset(spec, seed), dir / "data.csv");
            std::cout << "seed " << seed << ": mean target accuracy "
                      << result.summary.mean_target_accuracy << ", hidden nodes "
                      << result.summary.final_hidden_nodes << " -> " << dir.string() << '\n';
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort (" << e.phase() << ", round " << e.round()
                  << "): " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace aomsda
