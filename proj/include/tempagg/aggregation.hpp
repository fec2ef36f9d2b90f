#pragma once
// Temporal aggregation: the per-period base-model series, majority voting
// with smaller-index tie-breaking, and vote-matrix persistence.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempagg/classifier.hpp"
#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"

namespace tempagg {

struct AggregationConfig {
    std::int32_t n = 1;  // base coverage: training periods per base classifier
    std::int32_t k = 1;  // aggregation size: base classifiers per vote

    void validate() const {
        if (n < 1 || k < 1) throw std::invalid_argument("n and k must be >= 1");
    }
};

// Base classifiers f_j, each trained on the n periods ending at j. The series
// is append-only: extending never retrains an existing model.
class BaseModelSeries {
public:
    BaseModelSeries(AggregationConfig cfg, double alpha, FeatureConfig features,
                    PeriodIndex store_first,
                    std::optional<PeriodIndex> first_model = std::nullopt)
        : cfg_(cfg), alpha_(alpha), features_(features) {
        cfg.validate();
        PeriodIndex earliest = store_first + (cfg.n - 1);
        first_model_ = first_model.value_or(earliest);
        if (first_model_ < earliest)
            throw std::invalid_argument(
                "series cannot start before the first fully covered period " +
                std::to_string(earliest.v));
    }

    const AggregationConfig& config() const { return cfg_; }
    double alpha() const { return alpha_; }
    const FeatureConfig& features() const { return features_; }
    PeriodIndex first_model_period() const { return first_model_; }

    bool contains(PeriodIndex j) const {
        return first_model_ <= j && j - first_model_ < static_cast<std::int32_t>(models_.size());
    }

    const BaseModel& model(PeriodIndex j) const {
        if (!contains(j))
            throw std::out_of_range("no base model for period " + std::to_string(j.v));
        return models_[static_cast<std::size_t>(j - first_model_)];
    }

    std::size_t size() const { return models_.size(); }

    friend void extend_series(BaseModelSeries& series, const PeriodStore& store,
                              PeriodIndex up_to);

private:
    AggregationConfig cfg_;
    double alpha_;
    FeatureConfig features_;
    PeriodIndex first_model_;
    std::vector<BaseModel> models_;  // models_[m] = f_{first_model_ + m}
};

// Trains the missing models f_j for j <= up_to; already-present models are
// reused untouched.
inline void extend_series(BaseModelSeries& series, const PeriodStore& store,
                          PeriodIndex up_to) {
    if (store.last_period() < up_to)
        throw std::out_of_range("cannot extend series beyond the store");
    std::int32_t n = series.cfg_.n;
    for (PeriodIndex j = series.first_model_ + static_cast<std::int32_t>(series.models_.size());
         j <= up_to; j = j + 1) {
        PeriodIndex lo = j - (n - 1);
        if (store.count_range(lo, j) == 0)
            throw std::runtime_error("empty training window for period " +
                                     std::to_string(j.v));
        series.models_.push_back(train_on_range(store, lo, j, series.alpha_,
                                                series.features_));
    }
}

// Predictions of f_{I-k+1} .. f_I on one input, oldest first. Missing history
// is a hard error, never a clamp.
inline VoteVector votes(const BaseModelSeries& series, PeriodIndex current,
                        std::int32_t k, std::string_view text) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    PeriodIndex oldest = current - (k - 1);
    if (!series.contains(oldest) || !series.contains(current))
        throw std::out_of_range("aggregation window underflow: need models [" +
                                std::to_string(oldest.v) + ", " +
                                std::to_string(current.v) + "]");
    FeatureVec fv = featurize_text(text, series.features());
    VoteVector vv;
    vv.current_period = current;
    vv.votes.reserve(static_cast<std::size_t>(k));
    for (PeriodIndex j = oldest; j <= current; j = j + 1)
        vv.votes.push_back(series.model(j).predict_counts(fv));
    return vv;
}

// Majority vote; ties resolved toward the smaller label index. Depends only
// on the multiset of votes.
inline std::int32_t aggregate(const VoteVector& vv, const LabelSpace& labels) {
    if (vv.votes.empty()) throw std::invalid_argument("empty vote vector");
    std::vector<std::int32_t> counts(static_cast<std::size_t>(labels.size()), 0);
    for (auto v : vv.votes) {
        if (v < 0 || v >= labels.size())
            throw std::out_of_range("vote label out of range");
        ++counts[static_cast<std::size_t>(v)];
    }
    std::int32_t best = 0;
    for (std::int32_t y = 1; y < labels.size(); ++y)
        if (counts[static_cast<std::size_t>(y)] > counts[static_cast<std::size_t>(best)])
            best = y;
    return best;
}

// ---- vote-matrix persistence ----

// One aggregation query made against a test sample, with enough context to
// recompute certification without touching any model.
struct VoteRecord {
    PeriodIndex test_period;
    std::int64_t sample_ordinal = 0;
    std::int32_t true_label = 0;
    PeriodIndex current_period;  // I
    std::int32_t k = 0;
    std::int32_t n = 0;
    std::vector<std::int32_t> votes;  // oldest -> newest, length k

    VoteVector vote_vector() const { return VoteVector{votes, current_period}; }
};

inline constexpr std::string_view kVoteMatrixHeader =
    "test_period\tsample_ordinal\ttrue_label\tI\tk\tn\tvotes";

inline void append_vote_row(std::ostream& out, const VoteRecord& r) {
    out << r.test_period.v << '\t' << r.sample_ordinal << '\t' << r.true_label
        << '\t' << r.current_period.v << '\t' << r.k << '\t' << r.n << '\t';
    for (std::size_t i = 0; i < r.votes.size(); ++i) {
        if (i) out << ',';
        out << r.votes[i];
    }
    out << '\n';
}

inline void write_vote_matrix(std::ostream& out,
                              const std::vector<VoteRecord>& records) {
    out << kVoteMatrixHeader << "\n";
    for (const auto& r : records) append_vote_row(out, r);
}

inline void write_vote_matrix(const std::string& path,
                              const std::vector<VoteRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open vote matrix for writing: " + path);
    write_vote_matrix(out, records);
    if (!out) throw std::runtime_error("failed writing vote matrix: " + path);
}

inline std::vector<VoteRecord> read_vote_matrix(std::istream& in) {
    std::vector<VoteRecord> records;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != kVoteMatrixHeader)
                throw std::runtime_error("vote matrix row 1: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 7)
            throw std::runtime_error("vote matrix row " + std::to_string(line_no) +
                                     ": expected 7 fields, got " +
                                     std::to_string(fields.size()));
        auto at = [&](std::size_t i) { return std::string(fields[i]); };
        VoteRecord r;
        r.test_period = PeriodIndex{static_cast<std::int32_t>(parse_i64(fields[0], "test_period"))};
        r.sample_ordinal = parse_i64(fields[1], "sample_ordinal");
        r.true_label = static_cast<std::int32_t>(parse_i64(fields[2], "true_label"));
        r.current_period = PeriodIndex{static_cast<std::int32_t>(parse_i64(fields[3], "I"))};
        r.k = static_cast<std::int32_t>(parse_i64(fields[4], "k"));
        r.n = static_cast<std::int32_t>(parse_i64(fields[5], "n"));
        for (auto v : split(fields[6], ','))
            r.votes.push_back(static_cast<std::int32_t>(parse_i64(v, "votes")));
        if (static_cast<std::int32_t>(r.votes.size()) != r.k)
            throw std::runtime_error("vote matrix row " + std::to_string(line_no) +
                                     ": vote count does not match k (" + at(4) + ")");
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<VoteRecord> read_vote_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vote matrix: " + path);
    return read_vote_matrix(in);
}

}  // namespace tempagg
