#ifndef AOMSDA_STREAMS_HPP
#define AOMSDA_STREAMS_HPP

#include "aomsda/linalg.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aomsda {

/// Samples in temporal order with 0-based dense class indices.
struct Dataset {
    Matrix x;
    std::vector<int> y;
    /// Original label spelling per class index, used when writing CSV.
    std::vector<std::string> class_names;

    Eigen::Index size() const { return x.rows(); }
    Eigen::Index features() const { return x.cols(); }
    int classes() const { return static_cast<int>(class_names.size()); }

    /// Rows [begin, begin + count) as a new dataset sharing class names.
    Dataset slice(Eigen::Index begin, Eigen::Index count) const;
};

struct LabeledBatch {
    Matrix x;
    std::vector<int> y;
};

struct TargetScorer;

/// Passkey that only the evaluation path can mint.
class EvaluationAccess {
    EvaluationAccess() = default;
    friend struct TargetScorer;
};

/// Target-stream batch. Labels are held back for scoring and can only be
/// read with an EvaluationAccess key; every read is counted.
class UnlabeledBatch {
  public:
    UnlabeledBatch() = default;
    UnlabeledBatch(Matrix x, std::vector<int> hidden_labels);

    const Matrix& x() const { return x_; }
    Eigen::Index size() const { return x_.rows(); }

    const std::vector<int>& labels(EvaluationAccess) const;
    std::size_t label_reads() const { return label_reads_; }

  private:
    Matrix x_;
    std::vector<int> hidden_;
    mutable std::size_t label_reads_ = 0;
};

/// One evaluation round: N_s labelled source batches and one target batch.
struct StreamSet {
    std::vector<LabeledBatch> sources;
    UnlabeledBatch target;
    std::size_t round = 0;
    int classes = 0;
};

/// Reads a comma-separated file. `label_column` may be negative to count
/// from the end (-1 is the last column). Labels become dense class indices
/// in order of first appearance.
Dataset load_csv(const std::filesystem::path& path, int label_column, bool has_header);

/// Writes features then the label column, with a header row.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Global per-feature min-max scaling to [0, 1]; constant features become 0.5.
Dataset normalize(const Dataset& data);

/// Log-density of each row under a diagonal Gaussian fitted to the rows
/// (population std, constant exponent terms dropped). Zero-variance features
/// are skipped.
Vector density_scores(const Matrix& x);

/// Sorts rows by density (descending, stable) and cuts them into
/// n_sources + 1 equal chunks; the lowest-density chunk, plus any
/// remainder, becomes the target stream.
StreamSet gaussian_split(const Dataset& batch, int n_sources, std::size_t round = 0);

/// Contiguous equal split preserving order; the last round absorbs the remainder.
std::vector<Dataset> batchify(const Dataset& data, int rounds);

/// normalize + batchify + gaussian_split.
std::vector<StreamSet> make_stream_rounds(const Dataset& data, int rounds, int n_sources);

struct SeaSegment {
    Eigen::Index start = 0;
    double theta = 4.0;
};

/// Four equal segments with thresholds 4, 7, 4, 7.
std::vector<SeaSegment> default_sea_schedule(Eigen::Index n);

/// Class 0 when f1 + f2 >= theta, class 1 otherwise.
inline int sea_label(double f1, double f2, double theta) { return f1 + f2 >= theta ? 0 : 1; }

/// SEA concepts: three features uniform on [0, 10], threshold switching per
/// schedule, and a fraction of labels flipped.
Dataset gen_sea(Eigen::Index n, std::span<const SeaSegment> schedule, double label_noise,
                Rng& rng);

/// Rotating hyperplane with a linear transition between two weight vectors.
struct HyperplaneConcept {
    Vector start_weights;
    Vector end_weights;
    Eigen::Index window_start = 0;
    Eigen::Index window_end = 0;

    /// Weight vector in force at sample `index`.
    Vector weights_at(Eigen::Index index) const;
    /// Class 0 when w.x > w0 with w0 = sum(w) / 2, class 1 otherwise.
    int label(const Eigen::Ref<const RowVector>& x, Eigen::Index index) const;
};

HyperplaneConcept random_hyperplane(int dims, Eigen::Index window_start, Eigen::Index window_end,
                                    Rng& rng);

Dataset gen_hyperplane(Eigen::Index n, int dims, Eigen::Index window_start,
                       Eigen::Index window_end, double label_noise, Rng& rng,
                       HyperplaneConcept* concept_out = nullptr);

} // namespace aomsda

#endif // AOMSDA_STREAMS_HPP
