#ifndef AOMSDA_CLI_HPP
#define AOMSDA_CLI_HPP

#include "aomsda/engine.hpp"
#include "aomsda/errors.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace aomsda {

/// Bad command line or configuration file.
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Everything needed to reproduce one experiment.
struct RunSpec {
    std::string data_path;
    int label_col = -1;
    bool has_header = false;
    std::string generator; ///< "sea", "hyperplane" or empty when reading CSV
    long samples = 20000;
    double label_noise = 0.0;
    int hyperplane_dims = 4;
    int n_sources = 3;
    int rounds = 10;
    ModelConfig model;
    AblationFlags ablation;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "out";
    bool exclude_first_round = false;
    bool record_timing = true;
    bool emit_data = false;

    /// Throws UsageError when the fields cannot describe a run.
    void validate() const;

    bool operator==(const RunSpec&) const = default;
};

nlohmann::json to_json(const RunSpec& spec);

/// Overlays the keys present in `doc` onto `base`. Unknown keys are a usage error.
RunSpec run_spec_from_json(const nlohmann::json& doc, RunSpec base = {});

/// Defaults, then --config file, then flags. `args` excludes the program name.
RunSpec parse_args(const std::vector<std::string>& args);

/// The dataset a spec describes for one seed, before normalization.
Dataset load_dataset(const RunSpec& spec, std::uint64_t seed);

/// Runs one seed end to end.
RunResult run_seed(const RunSpec& spec, std::uint64_t seed);

/// Fixed-header trace table, one row per round.
std::string trace_csv(const RunResult& result, int n_sources);
nlohmann::json summary_json(const RunResult& result, const RunSpec& spec, std::uint64_t seed);

/// Writes trace.csv and summary.json under `outdir`/seed_<seed>/.
std::filesystem::path write_outputs(const RunResult& result, const RunSpec& spec,
                                    std::uint64_t seed, const std::filesystem::path& outdir);

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4 };

int cli_main(const std::vector<std::string>& args);

} // namespace aomsda

#endif // AOMSDA_CLI_HPP
