#include "aomsda/streams.hpp"

#include "aomsda/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace aomsda {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> numbered_classes(int count) {
    std::vector<std::string> names;
    for (int c = 1; c <= count; ++c)
        names.push_back(std::to_string(c));
    return names;
}

} // namespace

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index count) const {
    Dataset out;
    out.x = x.middleRows(begin, count);
    out.y.assign(y.begin() + begin, y.begin() + begin + count);
    out.class_names = class_names;
    return out;
}

UnlabeledBatch::UnlabeledBatch(Matrix x, std::vector<int> hidden_labels)
    : x_(std::move(x)), hidden_(std::move(hidden_labels)) {
    if (!hidden_.empty() && static_cast<Eigen::Index>(hidden_.size()) != x_.rows())
        throw DimensionError("target batch: label count does not match row count");
}

const std::vector<int>& UnlabeledBatch::labels(EvaluationAccess) const {
    ++label_reads_;
    return hidden_;
}

Dataset load_csv(const std::filesystem::path& path, int label_column, bool has_header) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::map<std::string, int, std::less<>> class_index;
    std::vector<std::string> class_names;
    std::size_t width = 0;
    std::size_t label_at = 0;

    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split_commas(line);
        if (width == 0) {
            width = cells.size();
            if (width < 2)
                throw ParseError("row " + std::to_string(line_no) +
                                 ": need at least one feature and a label");
            const long idx = label_column < 0 ? static_cast<long>(width) + label_column
                                              : static_cast<long>(label_column);
            if (idx < 0 || idx >= static_cast<long>(width))
                throw ParseError("label column " + std::to_string(label_column) +
                                 " not present in rows of width " + std::to_string(width));
            label_at = static_cast<std::size_t>(idx);
        }
        if (cells.size() != width)
            throw ParseError("row " + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " cells, found " +
                             std::to_string(cells.size()));

        std::vector<double> features;
        features.reserve(width - 1);
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_at)
                continue;
            double v = 0.0;
            const auto cell = cells[c];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
                !std::isfinite(v))
                throw ParseError("row " + std::to_string(line_no) + ", column " +
                                 std::to_string(c + 1) + ": non-numeric value '" +
                                 std::string(cell) + "'");
            features.push_back(v);
        }
        const auto label = cells[label_at];
        auto it = class_index.find(label);
        if (it == class_index.end()) {
            it = class_index.emplace(std::string(label), static_cast<int>(class_names.size()))
                     .first;
            class_names.emplace_back(label);
        }
        labels.push_back(it->second);
        rows.push_back(std::move(features));
    }
    if (rows.empty())
        throw ParseError(path.string() + ": no data rows");

    Dataset data;
    data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c + 1 < width; ++c)
            data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    data.y = std::move(labels);
    data.class_names = std::move(class_names);
    return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    for (Eigen::Index c = 0; c < data.features(); ++c)
        out << 'f' << (c + 1) << ',';
    out << "label\n";
    for (Eigen::Index r = 0; r < data.size(); ++r) {
        for (Eigen::Index c = 0; c < data.features(); ++c)
            out << format_double(data.x(r, c)) << ',';
        out << data.class_names.at(static_cast<std::size_t>(data.y[static_cast<std::size_t>(r)]))
            << '\n';
    }
    if (!out)
        throw IoError("failed while writing " + path.string());
}

Dataset normalize(const Dataset& data) {
    if (data.size() == 0)
        throw ValidationError("normalize: empty dataset");
    Dataset out = data;
    for (Eigen::Index c = 0; c < data.features(); ++c) {
        const double lo = data.x.col(c).minCoeff();
        const double hi = data.x.col(c).maxCoeff();
        if (hi > lo)
            out.x.col(c) = ((data.x.col(c).array() - lo) / (hi - lo)).matrix();
        else
            out.x.col(c).setConstant(0.5);
    }
    return out;
}

Vector density_scores(const Matrix& x) {
    const RowVector mean = x.colwise().mean();
    const Matrix centred = x.rowwise() - mean;
    const RowVector var = centred.array().square().colwise().mean();
    Vector score = Vector::Zero(x.rows());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (var(c) <= 0.0)
            continue;
        score.array() -= centred.col(c).array().square() / (2.0 * var(c));
    }
    return score;
}

StreamSet gaussian_split(const Dataset& batch, int n_sources, std::size_t round) {
    if (n_sources < 1)
        throw ValidationError("need at least one source stream");
    const auto n = batch.size();
    if (n < n_sources + 1)
        throw ValidationError("batch of " + std::to_string(n) + " samples is too small for " +
                              std::to_string(n_sources) + " sources and a target");

    const Vector score = density_scores(batch.x);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return score(a) > score(b); });

    const Eigen::Index chunk = n / (n_sources + 1);
    // Each stream keeps its members in arrival order.
    for (int s = 0; s <= n_sources; ++s) {
        const auto begin = order.begin() + s * chunk;
        const auto end = s == n_sources ? order.end() : begin + chunk;
        std::sort(begin, end);
    }
    auto gather = [&](Eigen::Index begin, Eigen::Index count, Matrix& x, std::vector<int>& y) {
        x.resize(count, batch.features());
        y.resize(static_cast<std::size_t>(count));
        for (Eigen::Index i = 0; i < count; ++i) {
            const auto src = order[static_cast<std::size_t>(begin + i)];
            x.row(i) = batch.x.row(src);
            y[static_cast<std::size_t>(i)] = batch.y[static_cast<std::size_t>(src)];
        }
    };

    StreamSet set;
    set.round = round;
    set.classes = batch.classes();
    set.sources.resize(static_cast<std::size_t>(n_sources));
    for (int s = 0; s < n_sources; ++s)
        gather(s * chunk, chunk, set.sources[static_cast<std::size_t>(s)].x,
               set.sources[static_cast<std::size_t>(s)].y);
    Matrix tx;
    std::vector<int> ty;
    gather(n_sources * chunk, n - n_sources * chunk, tx, ty);
    set.target = UnlabeledBatch(std::move(tx), std::move(ty));
    return set;
}

std::vector<Dataset> batchify(const Dataset& data, int rounds) {
    if (rounds < 1)
        throw ValidationError("rounds must be >= 1");
    if (rounds > data.size())
        throw ValidationError("cannot cut " + std::to_string(data.size()) + " samples into " +
                              std::to_string(rounds) + " rounds");
    const Eigen::Index per = data.size() / rounds;
    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(rounds));
    for (int r = 0; r < rounds; ++r) {
        const Eigen::Index begin = r * per;
        const Eigen::Index count = r + 1 == rounds ? data.size() - begin : per;
        out.push_back(data.slice(begin, count));
    }
    return out;
}

std::vector<StreamSet> make_stream_rounds(const Dataset& data, int rounds, int n_sources) {
    const auto batches = batchify(normalize(data), rounds);
    std::vector<StreamSet> out;
    out.reserve(batches.size());
    for (std::size_t r = 0; r < batches.size(); ++r)
        out.push_back(gaussian_split(batches[r], n_sources, r + 1));
    return out;
}

std::vector<SeaSegment> default_sea_schedule(Eigen::Index n) {
    const Eigen::Index quarter = n / 4;
    return {{0, 4.0}, {quarter, 7.0}, {2 * quarter, 4.0}, {3 * quarter, 7.0}};
}

Dataset gen_sea(Eigen::Index n, std::span<const SeaSegment> schedule, double label_noise,
                Rng& rng) {
    if (n < 1)
        throw ValidationError("SEA needs at least one sample");
    if (schedule.empty() || schedule.front().start != 0)
        throw ValidationError("SEA schedule must start at index 0");
    std::uniform_real_distribution<double> feature(0.0, 10.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Dataset data;
    data.x.resize(n, 3);
    data.y.resize(static_cast<std::size_t>(n));
    data.class_names = numbered_classes(2);
    std::size_t segment = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        while (segment + 1 < schedule.size() && schedule[segment + 1].start <= i)
            ++segment;
        for (Eigen::Index c = 0; c < 3; ++c)
            data.x(i, c) = feature(rng);
        int label = sea_label(data.x(i, 0), data.x(i, 1), schedule[segment].theta);
        if (unit(rng) < label_noise)
            label = 1 - label;
        data.y[static_cast<std::size_t>(i)] = label;
    }
    return data;
}

Vector HyperplaneConcept::weights_at(Eigen::Index index) const {
    if (index < window_start)
        return start_weights;
    if (index >= window_end)
        return end_weights;
    const double t = static_cast<double>(index - window_start) /
                     static_cast<double>(window_end - window_start);
    return (1.0 - t) * start_weights + t * end_weights;
}

int HyperplaneConcept::label(const Eigen::Ref<const RowVector>& x, Eigen::Index index) const {
    const Vector w = weights_at(index);
    return x.dot(w) > 0.5 * w.sum() ? 0 : 1;
}

HyperplaneConcept random_hyperplane(int dims, Eigen::Index window_start, Eigen::Index window_end,
                                    Rng& rng) {
    if (dims < 2)
        throw ValidationError("hyperplane needs at least two dimensions");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    HyperplaneConcept concept_;
    concept_.start_weights.resize(dims);
    concept_.end_weights.resize(dims);
    for (int j = 0; j < dims; ++j)
        concept_.start_weights(j) = unit(rng);
    for (int j = 0; j < dims; ++j)
        concept_.end_weights(j) = unit(rng);
    concept_.window_start = window_start;
    concept_.window_end = window_end;
    return concept_;
}

Dataset gen_hyperplane(Eigen::Index n, int dims, Eigen::Index window_start,
                       Eigen::Index window_end, double label_noise, Rng& rng,
                       HyperplaneConcept* concept_out) {
    if (n < 1)
        throw ValidationError("hyperplane needs at least one sample");
    const HyperplaneConcept concept_ = random_hyperplane(dims, window_start, window_end, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Dataset data;
    data.x.resize(n, dims);
    data.y.resize(static_cast<std::size_t>(n));
    data.class_names = numbered_classes(2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < dims; ++c)
            data.x(i, c) = unit(rng);
        int label = concept_.label(data.x.row(i), i);
        if (unit(rng) < label_noise)
            label = 1 - label;
        data.y[static_cast<std::size_t>(i)] = label;
    }
    if (concept_out)
        *concept_out = concept_;
    return data;
}

} // namespace aomsda
