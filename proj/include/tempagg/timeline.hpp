#pragma once
// Core domain types for timestamped data: calendar dates, collection periods,
// the label space, samples, the period-bucketed store and vote vectors.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tempagg {

// One data-collection period (one month in the news benchmark), counted from
// a configurable epoch month. Ordering equals chronological ordering.
struct PeriodIndex {
    std::int32_t v = 0;

    friend auto operator<=>(const PeriodIndex&, const PeriodIndex&) = default;
};

inline PeriodIndex operator+(PeriodIndex p, std::int32_t d) { return {p.v + d}; }
inline PeriodIndex operator-(PeriodIndex p, std::int32_t d) { return {p.v - d}; }
inline std::int32_t operator-(PeriodIndex a, PeriodIndex b) { return a.v - b.v; }

struct YearMonth {
    int year = 0;
    int month = 0;  // 1..12

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..days_in_month

    friend auto operator<=>(const Date&, const Date&) = default;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[month - 1];
}

namespace detail {
inline bool parse_fixed_digits(std::string_view s, std::size_t at, int width, int& out) {
    int v = 0;
    for (int i = 0; i < width; ++i) {
        char c = (at + i < s.size()) ? s[at + i] : '\0';
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}
}  // namespace detail

// Strict YYYY-MM-DD, with real month lengths (leap years included).
inline Date parse_date(std::string_view s) {
    Date d;
    bool ok = s.size() == 10 && s[4] == '-' && s[7] == '-' &&
              detail::parse_fixed_digits(s, 0, 4, d.year) &&
              detail::parse_fixed_digits(s, 5, 2, d.month) &&
              detail::parse_fixed_digits(s, 8, 2, d.day);
    if (!ok || d.month < 1 || d.month > 12 || d.day < 1 ||
        d.day > days_in_month(d.year, d.month))
        throw std::runtime_error("unparseable date: '" + std::string(s) +
                                 "' (expected YYYY-MM-DD)");
    return d;
}

// Strict YYYY-MM.
inline YearMonth parse_year_month(std::string_view s) {
    YearMonth ym;
    bool ok = s.size() == 7 && s[4] == '-' &&
              detail::parse_fixed_digits(s, 0, 4, ym.year) &&
              detail::parse_fixed_digits(s, 5, 2, ym.month);
    if (!ok || ym.month < 1 || ym.month > 12)
        throw std::runtime_error("unparseable month: '" + std::string(s) +
                                 "' (expected YYYY-MM)");
    return ym;
}

inline std::string format_date(const Date& d) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return std::string(buf);
}

// Month offset of `date` from the epoch month. The day only participates in
// the precondition check: any day inside the epoch month maps to period 0.
inline PeriodIndex period_of_date(const Date& date, const YearMonth& epoch) {
    if (YearMonth{date.year, date.month} < epoch)
        throw std::runtime_error("date precedes epoch: " + format_date(date));
    return PeriodIndex{(date.year - epoch.year) * 12 + (date.month - epoch.month)};
}

// The set of class names. A label's index is its rank under byte-wise
// lexicographic ordering of the name, so indices are stable across runs and
// independent of input order; the aggregation tie-break resolves against them.
class LabelSpace {
public:
    LabelSpace() = default;

    static LabelSpace from_names(std::vector<std::string> names) {
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        LabelSpace ls;
        ls.names_ = std::move(names);
        return ls;
    }

    std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

    const std::string& name_of(std::int32_t index) const {
        if (index < 0 || index >= size())
            throw std::out_of_range("label index out of range");
        return names_[static_cast<std::size_t>(index)];
    }

    std::int32_t index_of(std::string_view name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name)
            throw std::out_of_range("unknown label: '" + std::string(name) + "'");
        return static_cast<std::int32_t>(it - names_.begin());
    }

    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;  // sorted, unique
};

struct Sample {
    std::string text;
    std::int32_t label = 0;
    PeriodIndex period;
};

// Samples bucketed into the contiguous period range [first, last]. Periods
// with no samples are empty buckets, never gaps. Immutable once built.
class PeriodStore {
public:
    PeriodStore(PeriodIndex first, PeriodIndex last, std::vector<Sample> samples)
        : first_(first), last_(last) {
        if (first.v < 0) throw std::invalid_argument("first period must be >= 0");
        if (last < first) throw std::invalid_argument("empty period range");
        buckets_.resize(static_cast<std::size_t>(last - first + 1));
        for (auto& s : samples) {
            if (s.period < first_ || last_ < s.period)
                throw std::out_of_range("sample period outside store range");
            buckets_[static_cast<std::size_t>(s.period - first_)].push_back(std::move(s));
        }
    }

    PeriodIndex first_period() const { return first_; }
    PeriodIndex last_period() const { return last_; }
    std::int32_t n_periods() const { return last_ - first_ + 1; }

    const std::vector<Sample>& bucket(PeriodIndex p) const {
        check_range(p, p);
        return buckets_[static_cast<std::size_t>(p - first_)];
    }

    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& b : buckets_) n += b.size();
        return n;
    }

    // D_{s,t}: concatenation of buckets s..t in period order, ingestion order
    // within each bucket.
    std::vector<Sample> union_range(PeriodIndex s, PeriodIndex t) const {
        check_range(s, t);
        std::vector<Sample> out;
        for (std::int32_t j = s.v; j <= t.v; ++j)
            for (const auto& smp : bucket(PeriodIndex{j})) out.push_back(smp);
        return out;
    }

    std::size_t count_range(PeriodIndex s, PeriodIndex t) const {
        check_range(s, t);
        std::size_t n = 0;
        for (std::int32_t j = s.v; j <= t.v; ++j) n += bucket(PeriodIndex{j}).size();
        return n;
    }

    // Non-copying traversal of D_{s,t} for training paths.
    template <class Fn>
    void for_each_in_range(PeriodIndex s, PeriodIndex t, Fn&& fn) const {
        check_range(s, t);
        for (std::int32_t j = s.v; j <= t.v; ++j)
            for (const auto& smp : bucket(PeriodIndex{j})) fn(smp);
    }

private:
    void check_range(PeriodIndex s, PeriodIndex t) const {
        if (s < first_ || last_ < t || t < s)
            throw std::out_of_range("period range error: [" + std::to_string(s.v) +
                                    ", " + std::to_string(t.v) + "] not within [" +
                                    std::to_string(first_.v) + ", " +
                                    std::to_string(last_.v) + "]");
    }

    PeriodIndex first_;
    PeriodIndex last_;
    std::vector<std::vector<Sample>> buckets_;
};

// The k base-classifier predictions entering one aggregation, ordered oldest
// to newest; current_period is the index of the newest base classifier.
struct VoteVector {
    std::vector<std::int32_t> votes;
    PeriodIndex current_period;

    std::int32_t k() const { return static_cast<std::int32_t>(votes.size()); }
};

}  // namespace tempagg
