#pragma once
// Deterministic text classifier used as the base learner: hashed bag-of-words
// features feeding a smoothed count-based generative model. Training and
// prediction are pure functions of their inputs; all internal statistics are
// integer counts, so the model is independent of sample order at the bit
// level.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"

namespace tempagg {

struct FeatureConfig {
    // Power of two; token hashes are reduced modulo this dimension.
    std::uint32_t hash_dim = 1u << 18;

    bool valid() const {
        return hash_dim >= 2 && (hash_dim & (hash_dim - 1)) == 0;
    }
};

// Lowercase, split on every non-alphanumeric byte, drop empty tokens.
// Byte-level: only ASCII a-z0-9 survive, anything else separates.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

// Sparse hashed count vector, sorted by feature index. The sorted form is
// canonical: permuting the tokens yields an identical vector.
using FeatureVec = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

inline std::uint32_t hash_token(std::string_view token, const FeatureConfig& cfg) {
    return static_cast<std::uint32_t>(fnv1a64(token) & (cfg.hash_dim - 1));
}

inline FeatureVec featurize(const std::vector<std::string>& tokens,
                            const FeatureConfig& cfg) {
    if (!cfg.valid()) throw std::invalid_argument("hash_dim must be a power of two >= 2");
    std::vector<std::uint32_t> idx;
    idx.reserve(tokens.size());
    for (const auto& t : tokens) idx.push_back(hash_token(t, cfg));
    std::sort(idx.begin(), idx.end());
    FeatureVec fv;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && idx[j] == idx[i]) ++j;
        fv.emplace_back(idx[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return fv;
}

inline FeatureVec featurize_text(std::string_view text, const FeatureConfig& cfg) {
    return featurize(tokenize(text), cfg);
}

// Per-class training statistics. Only labels seen in the training window are
// present; absent labels get no prior mass and are never predicted.
struct ClassStats {
    std::int32_t label = 0;
    std::int64_t sample_count = 0;
    std::int64_t token_total = 0;
    // sorted by feature index
    std::vector<std::pair<std::uint32_t, std::uint32_t>> feature_counts;
};

class BaseModel {
public:
    BaseModel() = default;

    BaseModel(FeatureConfig cfg, double alpha, PeriodIndex span_first,
              PeriodIndex span_last, std::int64_t total_samples,
              std::vector<ClassStats> classes)
        : config_(cfg),
          alpha_(alpha),
          span_first_(span_first),
          span_last_(span_last),
          total_samples_(total_samples),
          classes_(std::move(classes)) {
        rebuild_derived();
    }

    const FeatureConfig& config() const { return config_; }
    double alpha() const { return alpha_; }
    std::pair<PeriodIndex, PeriodIndex> train_span() const {
        return {span_first_, span_last_};
    }
    std::int64_t total_samples() const { return total_samples_; }

    std::vector<std::int32_t> present_labels() const {
        std::vector<std::int32_t> out;
        out.reserve(classes_.size());
        for (const auto& c : classes_) out.push_back(c.label);
        return out;
    }

    double class_log_prior(std::int32_t label) const {
        return log_priors_[class_slot(label)];
    }

    // log P(feature | label) with additive-alpha smoothing over hash_dim cells.
    double feature_log_likelihood(std::int32_t label, std::uint32_t feature) const {
        std::size_t slot = class_slot(label);
        if (feature >= config_.hash_dim)
            throw std::out_of_range("feature index out of range");
        const auto& fc = classes_[slot].feature_counts;
        auto it = std::lower_bound(
            fc.begin(), fc.end(), feature,
            [](const auto& pr, std::uint32_t f) { return pr.first < f; });
        std::uint32_t count = (it != fc.end() && it->first == feature) ? it->second : 0;
        return std::log(static_cast<double>(count) + alpha_) - log_denoms_[slot];
    }

    std::int32_t predict_counts(const FeatureVec& fv) const {
        if (classes_.empty()) throw std::logic_error("predict on empty model");
        std::int32_t best = classes_[0].label;
        double best_score = score_class(0, fv);
        for (std::size_t s = 1; s < classes_.size(); ++s) {
            double sc = score_class(s, fv);
            if (sc > best_score) {  // ties keep the smaller label index
                best_score = sc;
                best = classes_[s].label;
            }
        }
        return best;
    }

    std::int32_t predict(std::string_view text) const {
        return predict_counts(featurize_text(text, config_));
    }

    const std::vector<ClassStats>& classes() const { return classes_; }

    // Canonical byte form. Counts are integers and alpha is stored bit-exact,
    // so serialize/deserialize round-trips losslessly.
    std::vector<std::uint8_t> serialize() const {
        std::vector<std::uint8_t> out;
        out.insert(out.end(), {'T', 'A', 'B', 'M'});
        put_u32(out, 1);  // format version
        put_u32(out, config_.hash_dim);
        put_f64(out, alpha_);
        put_i32(out, span_first_.v);
        put_i32(out, span_last_.v);
        put_i64(out, total_samples_);
        put_u32(out, static_cast<std::uint32_t>(classes_.size()));
        for (const auto& c : classes_) {
            put_i32(out, c.label);
            put_i64(out, c.sample_count);
            put_i64(out, c.token_total);
            put_u32(out, static_cast<std::uint32_t>(c.feature_counts.size()));
            for (const auto& [f, n] : c.feature_counts) {
                put_u32(out, f);
                put_u32(out, n);
            }
        }
        return out;
    }

    static BaseModel deserialize(const std::uint8_t* data, std::size_t len) {
        ByteReader r(data, len);
        r.need(4);
        if (std::memcmp(r.p, "TABM", 4) != 0)
            throw std::runtime_error("not a model file (bad magic)");
        r.pos += 4;
        std::uint32_t version = r.u32();
        if (version != 1)
            throw std::runtime_error("unsupported model version " + std::to_string(version));
        FeatureConfig cfg{r.u32()};
        double alpha = r.f64();
        PeriodIndex first{r.i32()}, last{r.i32()};
        std::int64_t total = r.i64();
        std::uint32_t n_classes = r.u32();
        std::vector<ClassStats> classes(n_classes);
        for (auto& c : classes) {
            c.label = r.i32();
            c.sample_count = r.i64();
            c.token_total = r.i64();
            std::uint32_t nf = r.u32();
            c.feature_counts.resize(nf);
            for (auto& [f, n] : c.feature_counts) {
                f = r.u32();
                n = r.u32();
            }
        }
        return BaseModel(cfg, alpha, first, last, total, std::move(classes));
    }

    std::uint64_t fingerprint() const {
        auto bytes = serialize();
        return fnv1a64(bytes.data(), bytes.size());
    }

private:
    std::size_t class_slot(std::int32_t label) const {
        auto it = std::lower_bound(classes_.begin(), classes_.end(), label,
                                   [](const ClassStats& c, std::int32_t l) {
                                       return c.label < l;
                                   });
        if (it == classes_.end() || it->label != label)
            throw std::out_of_range("label " + std::to_string(label) +
                                    " not present in model");
        return static_cast<std::size_t>(it - classes_.begin());
    }

    double score_class(std::size_t slot, const FeatureVec& fv) const {
        const auto& fc = classes_[slot].feature_counts;
        double score = log_priors_[slot];
        double log_denom = log_denoms_[slot];
        for (const auto& [feature, cnt] : fv) {
            auto it = std::lower_bound(
                fc.begin(), fc.end(), feature,
                [](const auto& pr, std::uint32_t f) { return pr.first < f; });
            std::uint32_t seen = (it != fc.end() && it->first == feature) ? it->second : 0;
            score += static_cast<double>(cnt) *
                     (std::log(static_cast<double>(seen) + alpha_) - log_denom);
        }
        return score;
    }

    void rebuild_derived() {
        log_priors_.resize(classes_.size());
        log_denoms_.resize(classes_.size());
        for (std::size_t s = 0; s < classes_.size(); ++s) {
            log_priors_[s] = std::log(static_cast<double>(classes_[s].sample_count) /
                                      static_cast<double>(total_samples_));
            log_denoms_[s] = std::log(static_cast<double>(classes_[s].token_total) +
                                      alpha_ * static_cast<double>(config_.hash_dim));
        }
    }

    FeatureConfig config_;
    double alpha_ = 1.0;
    PeriodIndex span_first_;
    PeriodIndex span_last_;
    std::int64_t total_samples_ = 0;
    std::vector<ClassStats> classes_;  // sorted by label
    std::vector<double> log_priors_;
    std::vector<double> log_denoms_;
};

namespace detail {

// Shared accumulation core: integer counts only, so the result is invariant
// under any permutation of the input samples.
class TrainAccumulator {
public:
    explicit TrainAccumulator(const FeatureConfig& cfg) : cfg_(cfg) {
        if (!cfg.valid()) throw std::invalid_argument("hash_dim must be a power of two >= 2");
    }

    void add(const Sample& s) {
        auto& cls = per_class_[s.label];
        cls.samples += 1;
        for (const auto& tok : tokenize(s.text)) {
            cls.counts[hash_token(tok, cfg_)] += 1;
            cls.tokens += 1;
        }
        total_ += 1;
    }

    BaseModel finish(double alpha, PeriodIndex span_first, PeriodIndex span_last) const {
        if (total_ == 0) throw std::runtime_error("empty training window");
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
        std::vector<ClassStats> classes;
        classes.reserve(per_class_.size());
        for (const auto& [label, acc] : per_class_) {
            ClassStats c;
            c.label = label;
            c.sample_count = acc.samples;
            c.token_total = acc.tokens;
            c.feature_counts.assign(acc.counts.begin(), acc.counts.end());
            std::sort(c.feature_counts.begin(), c.feature_counts.end());
            classes.push_back(std::move(c));
        }
        return BaseModel(cfg_, alpha, span_first, span_last, total_, std::move(classes));
    }

private:
    struct ClassAcc {
        std::int64_t samples = 0;
        std::int64_t tokens = 0;
        std::unordered_map<std::uint32_t, std::uint32_t> counts;
    };

    FeatureConfig cfg_;
    std::map<std::int32_t, ClassAcc> per_class_;  // ordered by label
    std::int64_t total_ = 0;
};

}  // namespace detail

// Train on an explicit window span (the span need not equal the observed
// period extremes when edge buckets are empty).
inline BaseModel train(std::span<const Sample> samples, double alpha,
                       const FeatureConfig& cfg, PeriodIndex span_first,
                       PeriodIndex span_last) {
    detail::TrainAccumulator acc(cfg);
    for (const auto& s : samples) acc.add(s);
    return acc.finish(alpha, span_first, span_last);
}

// Span derived from the samples themselves.
inline BaseModel train(std::span<const Sample> samples, double alpha = 1.0,
                       const FeatureConfig& cfg = {}) {
    if (samples.empty()) throw std::runtime_error("empty training window");
    PeriodIndex lo = samples[0].period, hi = samples[0].period;
    for (const auto& s : samples) {
        lo = std::min(lo, s.period);
        hi = std::max(hi, s.period);
    }
    return train(samples, alpha, cfg, lo, hi);
}

inline BaseModel train_on_range(const PeriodStore& store, PeriodIndex s,
                                PeriodIndex t, double alpha,
                                const FeatureConfig& cfg) {
    detail::TrainAccumulator acc(cfg);
    store.for_each_in_range(s, t, [&](const Sample& smp) { acc.add(smp); });
    return acc.finish(alpha, s, t);
}

inline void save_model(const BaseModel& model, const std::string& path) {
    auto bytes = model.serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

inline BaseModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return BaseModel::deserialize(bytes.data(), bytes.size());
}

}  // namespace tempagg
