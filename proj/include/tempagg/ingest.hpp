#pragma once
// Dataset ingestion: parse the news-headline JSONL corpus into a PeriodStore
// and generate synthetic drifting streams for property tests and benchmarks.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"

namespace tempagg {

struct IngestReport {
    std::int64_t total_records_read = 0;
    std::int64_t records_kept = 0;
    std::int64_t records_out_of_range = 0;
    std::int32_t n_periods = 0;
    std::int32_t n_labels = 0;
    std::vector<std::int64_t> per_period_counts;  // index 0 = first period

    // Flat key/value text document.
    std::string render() const {
        std::ostringstream out;
        out << "total_records_read\t" << total_records_read << "\n";
        out << "records_kept\t" << records_kept << "\n";
        out << "records_out_of_range\t" << records_out_of_range << "\n";
        out << "n_periods\t" << n_periods << "\n";
        out << "n_labels\t" << n_labels << "\n";
        for (std::size_t i = 0; i < per_period_counts.size(); ++i)
            out << "per_period_count." << i << "\t" << per_period_counts[i] << "\n";
        return out.str();
    }
};

struct ParsedDataset {
    PeriodStore store;
    LabelSpace labels;
    IngestReport report;
};

// Line-delimited JSON records with string fields "headline", "category" and
// "date" (YYYY-MM-DD). Records outside [date_min, date_max] are counted and
// dropped; a malformed record aborts with its line number. The label space is
// built from kept records only.
inline ParsedDataset parse_news_category(const std::string& path,
                                         const Date& date_min,
                                         const Date& date_max,
                                         const YearMonth& epoch) {
    if (date_max < date_min) throw std::invalid_argument("date_max precedes date_min");
    if (YearMonth{date_min.year, date_min.month} < epoch)
        throw std::runtime_error("date precedes epoch: " + format_date(date_min));

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);

    struct RawRecord {
        std::string headline;
        std::string category;
        PeriodIndex period;
    };

    IngestReport report;
    std::vector<RawRecord> kept;
    std::vector<std::string> categories;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++report.total_records_read;

        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": invalid JSON record: " + e.what());
        }
        std::string headline, category, date_str;
        try {
            headline = rec.at("headline").get<std::string>();
            category = rec.at("category").get<std::string>();
            date_str = rec.at("date").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": missing or non-string field: " + e.what());
        }
        Date date;
        try {
            date = parse_date(date_str);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (date < date_min || date_max < date) {
            ++report.records_out_of_range;
            continue;
        }
        kept.push_back({std::move(headline), std::move(category),
                        period_of_date(date, epoch)});
        categories.push_back(kept.back().category);
    }

    LabelSpace labels = LabelSpace::from_names(std::move(categories));

    PeriodIndex first = period_of_date(date_min, epoch);
    PeriodIndex last = period_of_date(date_max, epoch);
    std::vector<Sample> samples;
    samples.reserve(kept.size());
    for (auto& r : kept)
        samples.push_back(Sample{std::move(r.headline), labels.index_of(r.category),
                                 r.period});
    PeriodStore store(first, last, std::move(samples));

    report.records_kept = static_cast<std::int64_t>(store.total_count());
    report.n_periods = store.n_periods();
    report.n_labels = labels.size();
    report.per_period_counts.resize(static_cast<std::size_t>(store.n_periods()));
    for (std::int32_t j = first.v; j <= last.v; ++j)
        report.per_period_counts[static_cast<std::size_t>(j - first.v)] =
            static_cast<std::int64_t>(store.bucket(PeriodIndex{j}).size());

    return ParsedDataset{std::move(store), std::move(labels), std::move(report)};
}

// Synthetic drifting stream. Every label carries an active vocabulary that
// drifts by drift_rate per period; texts are fixed-length token draws from
// the label's active set. Byte-reproducible for a fixed seed.
struct SynthConfig {
    std::int32_t n_periods = 12;
    std::int32_t samples_per_period = 50;
    std::int32_t n_labels = 4;
    std::int32_t vocab_size = 2000;
    double drift_rate = 0.0;  // fraction of each label's vocabulary replaced per period
    std::uint64_t seed = 1;

    void validate() const {
        if (n_periods < 1 || samples_per_period < 1 || n_labels < 1 || vocab_size < 1)
            throw std::invalid_argument("synth config counts must be >= 1");
        if (drift_rate < 0.0 || drift_rate > 1.0)
            throw std::invalid_argument("drift_rate must be in [0, 1]");
        if (n_labels > 999)
            throw std::invalid_argument("synth label count exceeds name width");
    }
};

inline constexpr int kSynthTokensPerSample = 8;

struct SynthStream {
    PeriodStore store;
    LabelSpace labels;
};

inline SynthStream synth_stream(const SynthConfig& cfg) {
    cfg.validate();
    SplitMix64 rng(cfg.seed);

    // Zero-padded names sort lexicographically in numeric order, so label i
    // keeps index i.
    std::vector<std::string> names;
    for (std::int32_t i = 0; i < cfg.n_labels; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "c%03d", i);
        names.emplace_back(buf);
    }
    LabelSpace labels = LabelSpace::from_names(names);

    // Active vocabulary per label: distinct token ids out of [0, vocab_size).
    std::int32_t active = std::max<std::int32_t>(
        2, std::min(cfg.vocab_size, cfg.vocab_size / (2 * cfg.n_labels) + 2));
    auto fresh_token = [&](const std::vector<std::int32_t>& have) {
        while (true) {
            auto t = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(cfg.vocab_size)));
            bool dup = false;
            for (auto h : have)
                if (h == t) { dup = true; break; }
            if (!dup || static_cast<std::int32_t>(have.size()) >= cfg.vocab_size) return t;
        }
    };
    std::vector<std::vector<std::int32_t>> vocab(static_cast<std::size_t>(cfg.n_labels));
    for (auto& v : vocab) {
        for (std::int32_t i = 0; i < active; ++i) v.push_back(fresh_token(v));
    }

    std::int32_t replace_per_period =
        static_cast<std::int32_t>(std::min<double>(active, cfg.drift_rate * active + 0.5));

    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(cfg.n_periods) *
                    static_cast<std::size_t>(cfg.samples_per_period));
    for (std::int32_t p = 0; p < cfg.n_periods; ++p) {
        if (p > 0 && replace_per_period > 0) {
            for (auto& v : vocab) {
                for (std::int32_t r = 0; r < replace_per_period; ++r) {
                    auto at = rng.below(v.size());
                    v[at] = fresh_token(v);
                }
            }
        }
        for (std::int32_t s = 0; s < cfg.samples_per_period; ++s) {
            auto y = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(cfg.n_labels)));
            const auto& v = vocab[static_cast<std::size_t>(y)];
            std::string text;
            for (int t = 0; t < kSynthTokensPerSample; ++t) {
                if (t > 0) text.push_back(' ');
                text += "t" + std::to_string(v[rng.below(v.size())]);
            }
            samples.push_back(Sample{std::move(text), y, PeriodIndex{p}});
        }
    }

    PeriodStore store(PeriodIndex{0}, PeriodIndex{cfg.n_periods - 1}, std::move(samples));
    return SynthStream{std::move(store), std::move(labels)};
}

// Render a store back to the ingestable JSONL form. Day-of-month spreads
// samples inside their period but never changes the period mapping.
inline void write_news_jsonl(const PeriodStore& store, const LabelSpace& labels,
                             const YearMonth& epoch, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (std::int32_t j = store.first_period().v; j <= store.last_period().v; ++j) {
        const auto& bucket = store.bucket(PeriodIndex{j});
        for (std::size_t ord = 0; ord < bucket.size(); ++ord) {
            const auto& s = bucket[ord];
            int month0 = (epoch.month - 1) + j;
            Date d{epoch.year + month0 / 12, month0 % 12 + 1, 1};
            d.day = 1 + static_cast<int>(ord % static_cast<std::size_t>(
                                                   days_in_month(d.year, d.month)));
            nlohmann::json rec;
            rec["headline"] = s.text;
            rec["category"] = labels.name_of(s.label);
            rec["date"] = format_date(d);
            out << rec.dump() << "\n";
        }
    }
    if (!out) throw std::runtime_error("failed writing: " + path);
}

}  // namespace tempagg
