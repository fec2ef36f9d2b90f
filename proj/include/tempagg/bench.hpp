#pragma once
// Benchmark protocol for continuously collected data: every period i in the
// test range is scored by models that saw only data up to I = i-1. Robust
// fraction at budget tau = (samples both correctly classified and certified
// with radius >= tau) / (all pooled test samples). A misclassified sample is
// never robust, so RF(0) equals clean accuracy.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempagg/aggregation.hpp"
#include "tempagg/certify.hpp"
#include "tempagg/classifier.hpp"
#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"

namespace tempagg {

struct BenchConfig {
    PeriodIndex n_start{36};                     // first test period
    std::vector<std::int32_t> ns = {1, 3, 6, 9, 12};
    std::vector<std::int32_t> ks = {6, 12, 18, 24};
    std::int32_t tau_max = 24;
    double alpha = 1.0;
    FeatureConfig features{};
    std::int32_t threads = 1;
    std::optional<PeriodIndex> last_test_period;  // default: last store period

    // No aggregation window may reach before the store: the oldest model for
    // test period i is i-1-k+1 = i-k, trained on periods back to i-k-n+1.
    void validate(const PeriodStore& store) const {
        if (ns.empty() || ks.empty())
            throw std::invalid_argument("bench grid must be non-empty");
        for (auto n : ns)
            if (n < 1) throw std::invalid_argument("n must be >= 1");
        for (auto k : ks)
            if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (tau_max < 0) throw std::invalid_argument("tau-max must be >= 0");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
        std::int32_t max_n = *std::max_element(ns.begin(), ns.end());
        std::int32_t max_k = *std::max_element(ks.begin(), ks.end());
        if (n_start - store.first_period() < max_n + max_k - 1)
            throw std::invalid_argument(
                "aggregation window underflow: first test period " +
                std::to_string(n_start.v) + " needs history back to period " +
                std::to_string(n_start.v - max_n - max_k + 1) +
                " but the store starts at " + std::to_string(store.first_period().v));
        PeriodIndex last = last_test_period.value_or(store.last_period());
        if (last > store.last_period() || n_start > last)
            throw std::invalid_argument("test range [" + std::to_string(n_start.v) +
                                        ", " + std::to_string(last.v) +
                                        "] not covered by the store");
    }
};

struct PeriodStats {
    PeriodIndex period{0};
    std::int64_t samples = 0;
    std::int64_t correct = 0;
    std::vector<std::int64_t> hist_earliness;  // radius histogram, correct samples
    std::vector<std::int64_t> hist_duration;
};

struct ComboResult {
    AggregationConfig agg;
    std::int64_t total = 0;
    std::int64_t correct = 0;
    std::vector<std::int64_t> hist_earliness;  // size k+1
    std::vector<std::int64_t> hist_duration;
    std::vector<PeriodStats> periods;

    double clean_accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }

    // RF(tau) from a radius histogram: correct samples with radius >= tau.
    static double fraction_at(const std::vector<std::int64_t>& hist,
                              std::int64_t denom, std::int32_t tau) {
        if (denom == 0) return 0.0;
        std::int64_t c = 0;
        for (std::size_t r = static_cast<std::size_t>(std::max(tau, 0));
             r < hist.size(); ++r)
            c += hist[r];
        return static_cast<double>(c) / static_cast<double>(denom);
    }

    std::vector<double> curve(RobustnessNotion notion, std::int32_t tau_max) const {
        const auto& hist = notion == RobustnessNotion::earliness ? hist_earliness
                                                                 : hist_duration;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(tau_max) + 1);
        for (std::int32_t tau = 0; tau <= tau_max; ++tau)
            out.push_back(fraction_at(hist, total, tau));
        return out;
    }
};

struct RobustFractionReport {
    PeriodIndex n_start{0};
    PeriodIndex last_test_period{0};
    std::int32_t tau_max = 0;
    std::vector<ComboResult> combos;  // sorted by (n, k)

    std::int64_t pooled_test_count() const {
        return combos.empty() ? 0 : combos.front().total;
    }

    const ComboResult& combo(std::int32_t n, std::int32_t k) const {
        for (const auto& c : combos)
            if (c.agg.n == n && c.agg.k == k) return c;
        throw std::out_of_range("no result for n=" + std::to_string(n) +
                                " k=" + std::to_string(k));
    }
};

// Mean height of a robust-fraction curve over its tau grid.
inline double curve_auc(const std::vector<double>& curve) {
    if (curve.empty()) return 0.0;
    double s = 0.0;
    for (double v : curve) s += v;
    return s / static_cast<double>(curve.size());
}

// Per-sample hook, called in deterministic (n, k, period, ordinal) order.
using BenchSink =
    std::function<void(const AggregationConfig&, const VoteRecord&, const RadiiRow&)>;

namespace detail {

struct SamplePerK {
    std::int32_t predicted = 0;
    std::int32_t earliness = 0;
    std::int32_t duration = 0;
};

}  // namespace detail

inline RobustFractionReport run_bench_grid(const PeriodStore& store,
                                           const LabelSpace& labels,
                                           BenchConfig cfg,
                                           const BenchSink& sink = {}) {
    std::sort(cfg.ns.begin(), cfg.ns.end());
    cfg.ns.erase(std::unique(cfg.ns.begin(), cfg.ns.end()), cfg.ns.end());
    std::sort(cfg.ks.begin(), cfg.ks.end());
    cfg.ks.erase(std::unique(cfg.ks.begin(), cfg.ks.end()), cfg.ks.end());
    cfg.validate(store);
    PeriodIndex last = cfg.last_test_period.value_or(store.last_period());
    std::int32_t k_max = cfg.ks.back();

    RobustFractionReport report;
    report.n_start = cfg.n_start;
    report.last_test_period = last;
    report.tau_max = cfg.tau_max;

    for (auto n : cfg.ns) {
        // One model series per n, shared by every k: the series is k-agnostic.
        std::vector<ComboResult> combos(cfg.ks.size());
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
            combos[ki].agg = AggregationConfig{n, cfg.ks[ki]};
            combos[ki].hist_earliness.assign(static_cast<std::size_t>(cfg.ks[ki]) + 1, 0);
            combos[ki].hist_duration.assign(static_cast<std::size_t>(cfg.ks[ki]) + 1, 0);
        }
        BaseModelSeries series(AggregationConfig{n, k_max}, cfg.alpha, cfg.features,
                               store.first_period(), cfg.n_start - k_max);
        for (PeriodIndex i = cfg.n_start; i <= last; i = i + 1) {
            PeriodIndex I = i - 1;
            extend_series(series, store, I);
            const auto& bucket = store.bucket(i);

            struct Row {
                std::vector<std::int32_t> votes;
                std::vector<detail::SamplePerK> per_k;
            };
            std::vector<Row> rows(bucket.size());
            parallel_for(bucket.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
                for (std::size_t s = b; s < e; ++s) {
                    Row& row = rows[s];
                    FeatureVec fv = featurize_text(bucket[s].text, cfg.features);
                    row.votes.reserve(static_cast<std::size_t>(k_max));
                    for (PeriodIndex j = I - (k_max - 1); j <= I; j = j + 1)
                        row.votes.push_back(series.model(j).predict_counts(fv));
                    row.per_k.resize(cfg.ks.size());
                    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
                        std::int32_t k = cfg.ks[ki];
                        VoteVector vv;
                        vv.current_period = I;
                        vv.votes.assign(row.votes.end() - k, row.votes.end());
                        CertifiedRadii cr = certify(vv, labels, n);
                        row.per_k[ki] = {cr.predicted, cr.earliness_radius,
                                         cr.duration_radius};
                    }
                }
            });

            for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
                std::int32_t k = cfg.ks[ki];
                ComboResult& combo = combos[ki];
                PeriodStats ps;
                ps.period = i;
                ps.samples = static_cast<std::int64_t>(bucket.size());
                ps.hist_earliness.assign(static_cast<std::size_t>(k) + 1, 0);
                ps.hist_duration.assign(static_cast<std::size_t>(k) + 1, 0);
                for (std::size_t s = 0; s < bucket.size(); ++s) {
                    const auto& pk = rows[s].per_k[ki];
                    if (pk.duration > pk.earliness)
                        throw std::logic_error("duration radius exceeds earliness radius");
                    bool correct = pk.predicted == bucket[s].label;
                    if (correct) {
                        ++ps.correct;
                        ++ps.hist_earliness[static_cast<std::size_t>(pk.earliness)];
                        ++ps.hist_duration[static_cast<std::size_t>(pk.duration)];
                    }
                    if (sink) {
                        VoteRecord vr;
                        vr.test_period = i;
                        vr.sample_ordinal = static_cast<std::int64_t>(s);
                        vr.true_label = bucket[s].label;
                        vr.current_period = I;
                        vr.k = k;
                        vr.n = n;
                        vr.votes.assign(rows[s].votes.end() - k, rows[s].votes.end());
                        RadiiRow rr{i,
                                    static_cast<std::int64_t>(s),
                                    pk.predicted,
                                    correct,
                                    pk.earliness,
                                    pk.duration};
                        sink(combo.agg, vr, rr);
                    }
                }
                combo.total += ps.samples;
                combo.correct += ps.correct;
                for (std::size_t r = 0; r < ps.hist_earliness.size(); ++r) {
                    combo.hist_earliness[r] += ps.hist_earliness[r];
                    combo.hist_duration[r] += ps.hist_duration[r];
                }
                combo.periods.push_back(std::move(ps));
            }
        }
        for (auto& c : combos) report.combos.push_back(std::move(c));
    }
    std::sort(report.combos.begin(), report.combos.end(),
              [](const ComboResult& a, const ComboResult& b) {
                  return a.agg.n != b.agg.n ? a.agg.n < b.agg.n : a.agg.k < b.agg.k;
              });
    return report;
}

inline RobustFractionReport run_bench(const PeriodStore& store, const LabelSpace& labels,
                                      BenchConfig cfg, AggregationConfig agg,
                                      const BenchSink& sink = {}) {
    agg.validate();
    cfg.ns = {agg.n};
    cfg.ks = {agg.k};
    return run_bench_grid(store, labels, cfg, sink);
}

// ---- baseline: one fresh model per test period, no aggregation ----

struct BaselineResult {
    std::int32_t n = 1;
    std::int64_t total = 0;
    std::int64_t correct = 0;
    std::vector<std::int64_t> label_total;
    std::vector<std::int64_t> label_correct;

    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

inline BaselineResult baseline_accuracy(const PeriodStore& store,
                                        const LabelSpace& labels, std::int32_t n,
                                        PeriodIndex n_start, double alpha = 1.0,
                                        FeatureConfig features = {},
                                        std::optional<PeriodIndex> last_test = std::nullopt,
                                        std::int32_t threads = 1) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    PeriodIndex last = last_test.value_or(store.last_period());
    if (n_start - store.first_period() < n)
        throw std::invalid_argument("training window underflow: test period " +
                                    std::to_string(n_start.v) + " needs " +
                                    std::to_string(n) + " prior periods");
    if (last > store.last_period() || n_start > last)
        throw std::invalid_argument("test range [" + std::to_string(n_start.v) + ", " +
                                    std::to_string(last.v) +
                                    "] not covered by the store");
    BaselineResult res;
    res.n = n;
    res.label_total.assign(static_cast<std::size_t>(labels.size()), 0);
    res.label_correct.assign(static_cast<std::size_t>(labels.size()), 0);
    for (PeriodIndex i = n_start; i <= last; i = i + 1) {
        BaseModel model = train_on_range(store, i - n, i - 1, alpha, features);
        const auto& bucket = store.bucket(i);
        std::vector<std::uint8_t> ok(bucket.size(), 0);
        parallel_for(bucket.size(), threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t s = b; s < e; ++s)
                ok[s] = model.predict(bucket[s].text) == bucket[s].label ? 1 : 0;
        });
        for (std::size_t s = 0; s < bucket.size(); ++s) {
            ++res.total;
            ++res.label_total[static_cast<std::size_t>(bucket[s].label)];
            if (ok[s]) {
                ++res.correct;
                ++res.label_correct[static_cast<std::size_t>(bucket[s].label)];
            }
        }
    }
    return res;
}

// ---- report files ----

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline double mean_radius(const std::vector<std::int64_t>& hist, std::int64_t total) {
    // misclassified samples count as radius zero
    if (total == 0) return 0.0;
    std::int64_t s = 0;
    for (std::size_t r = 0; r < hist.size(); ++r)
        s += static_cast<std::int64_t>(r) * hist[r];
    return static_cast<double>(s) / static_cast<double>(total);
}

}  // namespace detail

// Writes summary.tsv, one curve file per (n, k, notion), and periods.tsv
// (per-period fractions, diagnostics only). Deterministic: sorted rows,
// fixed formatting. Returns the written paths.
inline std::vector<std::string> emit_report(const RobustFractionReport& report,
                                            const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open report file: " + path);
        written.push_back(path);
        return out;
    };

    {
        auto out = open("summary.tsv");
        out << "n\tk\tsamples\tcorrect\tclean_accuracy\tmean_earliness_radius\t"
               "mean_duration_radius\n";
        for (const auto& c : report.combos)
            out << c.agg.n << '\t' << c.agg.k << '\t' << c.total << '\t' << c.correct
                << '\t' << detail::fixed6(c.clean_accuracy()) << '\t'
                << detail::fixed6(detail::mean_radius(c.hist_earliness, c.total)) << '\t'
                << detail::fixed6(detail::mean_radius(c.hist_duration, c.total)) << '\n';
    }

    for (const auto& c : report.combos) {
        for (auto notion : {RobustnessNotion::earliness, RobustnessNotion::duration}) {
            const char* nname =
                notion == RobustnessNotion::earliness ? "earliness" : "duration";
            auto out = open("curve_n" + std::to_string(c.agg.n) + "_k" +
                            std::to_string(c.agg.k) + "_" + nname + ".tsv");
            out << "tau\trobust_fraction\n";
            auto curve = c.curve(notion, report.tau_max);
            for (std::int32_t tau = 0; tau <= report.tau_max; ++tau)
                out << tau << '\t'
                    << detail::fixed6(curve[static_cast<std::size_t>(tau)]) << '\n';
        }
    }

    {
        auto out = open("periods.tsv");
        out << "n\tk\ttest_period\tnotion\ttau\tsamples\trobust_count\t"
               "robust_fraction\n";
        for (const auto& c : report.combos)
            for (const auto& ps : c.periods)
                for (auto notion :
                     {RobustnessNotion::earliness, RobustnessNotion::duration}) {
                    const auto& hist = notion == RobustnessNotion::earliness
                                           ? ps.hist_earliness
                                           : ps.hist_duration;
                    const char* nname = notion == RobustnessNotion::earliness
                                            ? "earliness"
                                            : "duration";
                    for (std::int32_t tau = 0; tau <= report.tau_max; ++tau) {
                        std::int64_t cnt = 0;
                        for (std::size_t r = static_cast<std::size_t>(tau);
                             r < hist.size(); ++r)
                            cnt += hist[r];
                        double frac = ps.samples == 0
                                          ? 0.0
                                          : static_cast<double>(cnt) /
                                                static_cast<double>(ps.samples);
                        out << c.agg.n << '\t' << c.agg.k << '\t' << ps.period.v
                            << '\t' << nname << '\t' << tau << '\t' << ps.samples
                            << '\t' << cnt << '\t' << detail::fixed6(frac) << '\n';
                    }
                }
    }
    return written;
}

inline void write_baseline_table(std::ostream& out,
                                 const std::vector<BaselineResult>& results,
                                 const LabelSpace& labels) {
    out << "category\tsamples";
    for (const auto& r : results) out << "\tn=" << r.n;
    out << '\n';
    for (std::int32_t lab = 0; lab < labels.size(); ++lab) {
        auto li = static_cast<std::size_t>(lab);
        out << labels.name_of(lab) << '\t'
            << (results.empty() ? 0 : results.front().label_total[li]);
        for (const auto& r : results) {
            if (r.label_total[li] == 0) {
                out << "\t-";
            } else {
                out << '\t'
                    << detail::fixed6(static_cast<double>(r.label_correct[li]) /
                                      static_cast<double>(r.label_total[li]));
            }
        }
        out << '\n';
    }
    out << "overall\t" << (results.empty() ? 0 : results.front().total);
    for (const auto& r : results) out << '\t' << detail::fixed6(r.accuracy());
    out << '\n';
}

inline void write_baseline_table(const std::string& path,
                                 const std::vector<BaselineResult>& results,
                                 const LabelSpace& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open baseline table for writing: " + path);
    write_baseline_table(out, results, labels);
    if (!out) throw std::runtime_error("failed writing baseline table: " + path);
}

}  // namespace tempagg
