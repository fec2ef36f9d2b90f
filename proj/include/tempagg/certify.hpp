#pragma once
// Certified robustness radii for temporally aggregated predictions.
//
// Two attack budgets are certified for a vote vector over window [I-k+1, I]:
//  - earliness tau: poison may touch only periods [I-tau+1, I], hence only
//    the newest min(tau, k) base models. Certified iff for every rival y'
//    the oldest k - min(tau,k) votes alone keep y ahead even when all
//    rewritable votes go to y'.
//  - duration tau: poison spans at most tau consecutive periods, hence at
//    most tau+n-1 consecutive base models. Certified iff for every rival y'
//    and every block start s in the window, votes outside the block keep y
//    ahead by min(tau+n-1, k).
// Both checks honor the aggregation tie-break (smaller label index wins) via
// a +1 margin whenever y has the larger index.
//
// Feasible tau sets are downward closed for both notions, so a linear scan
// from tau = 1 upward yields the exact radius of each certificate.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempagg/aggregation.hpp"
#include "tempagg/timeline.hpp"

namespace tempagg {

enum class RobustnessNotion { earliness, duration };

struct CertifiedRadii {
    std::int32_t predicted = 0;
    std::int32_t earliness_radius = 0;
    std::int32_t duration_radius = 0;
    std::int32_t n = 1;
    std::int32_t k = 1;
};

namespace detail {

// Rival labels are reduced to a small candidate set with identical worst
// cases: every label that received a vote, plus one zero-count stand-in for
// absent labels below y (tie bonus binds) and one for absent labels above y.
struct CertCandidate {
    std::int32_t cum_index;  // into CertProfile::cum_other, -1 = zero votes
    std::int32_t tie_bonus;  // 1 iff y > y'
};

struct CertProfile {
    std::int32_t y = 0;
    std::int32_t k = 0;
    bool trivial = false;  // single-label space: nothing to flip to
    std::vector<std::int32_t> cum_y;
    std::vector<std::vector<std::int32_t>> cum_other;
    std::vector<CertCandidate> candidates;
};

inline CertProfile make_profile(const VoteVector& vv, const LabelSpace& labels) {
    CertProfile p;
    p.k = static_cast<std::int32_t>(vv.votes.size());
    p.y = aggregate(vv, labels);
    p.trivial = labels.size() <= 1;
    if (p.trivial) return p;

    auto cum_of = [&](std::int32_t lab) {
        std::vector<std::int32_t> c(static_cast<std::size_t>(p.k) + 1, 0);
        for (std::int32_t i = 0; i < p.k; ++i)
            c[static_cast<std::size_t>(i) + 1] =
                c[static_cast<std::size_t>(i)] + (vv.votes[static_cast<std::size_t>(i)] == lab ? 1 : 0);
        return c;
    };
    p.cum_y = cum_of(p.y);

    std::vector<std::int32_t> distinct = vv.votes;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::int32_t present_below = 0;
    std::int32_t present_above = 0;
    for (auto lab : distinct) {
        if (lab == p.y) continue;
        p.cum_other.push_back(cum_of(lab));
        p.candidates.push_back(
            {static_cast<std::int32_t>(p.cum_other.size()) - 1, p.y > lab ? 1 : 0});
        if (lab < p.y) ++present_below; else ++present_above;
    }
    if (present_below < p.y) p.candidates.push_back({-1, 1});
    if (present_above < labels.size() - 1 - p.y) p.candidates.push_back({-1, 0});
    return p;
}

inline std::int32_t candidate_count(const CertProfile& p, const CertCandidate& c,
                                    std::int32_t lo, std::int32_t hi) {
    // votes for the candidate among positions [0, lo) and [hi, k)
    if (c.cum_index < 0) return 0;
    const auto& cum = p.cum_other[static_cast<std::size_t>(c.cum_index)];
    return cum[static_cast<std::size_t>(lo)] +
           (cum[static_cast<std::size_t>(p.k)] - cum[static_cast<std::size_t>(hi)]);
}

inline bool certified_earliness_at(const CertProfile& p, std::int32_t tau) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    if (p.trivial) return true;
    std::int32_t m = std::min(tau, p.k);
    std::int32_t prefix = p.k - m;
    std::int32_t cy = p.cum_y[static_cast<std::size_t>(prefix)];
    for (const auto& c : p.candidates)
        if (cy < candidate_count(p, c, prefix, p.k) + m + c.tie_bonus) return false;
    return true;
}

inline bool certified_duration_at(const CertProfile& p, std::int32_t n,
                                  std::int32_t tau) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (p.trivial) return true;
    std::int64_t block = static_cast<std::int64_t>(tau) + n - 1;
    std::int32_t m = static_cast<std::int32_t>(std::min<std::int64_t>(block, p.k));
    for (std::int32_t s = 0; s < p.k; ++s) {
        std::int32_t e = static_cast<std::int32_t>(std::min<std::int64_t>(s + block, p.k));
        std::int32_t cy = p.cum_y[static_cast<std::size_t>(s)] +
                          (p.cum_y[static_cast<std::size_t>(p.k)] -
                           p.cum_y[static_cast<std::size_t>(e)]);
        for (const auto& c : p.candidates)
            if (cy < candidate_count(p, c, s, e) + m + c.tie_bonus) return false;
    }
    return true;
}

}  // namespace detail

// Largest tau whose certificate holds; tau = 0 is vacuous (an attack must
// poison at least one period). With fewer than two labels no flip exists and
// the radius saturates at k.
inline std::int32_t certify_earliness(const VoteVector& vv, const LabelSpace& labels) {
    auto p = detail::make_profile(vv, labels);
    std::int32_t r = 0;
    for (std::int32_t tau = 1; tau <= p.k; ++tau) {
        if (!detail::certified_earliness_at(p, tau)) break;
        r = tau;
    }
    return r;
}

inline std::int32_t certify_duration(const VoteVector& vv, const LabelSpace& labels,
                                     std::int32_t n) {
    auto p = detail::make_profile(vv, labels);
    std::int32_t r = 0;
    for (std::int32_t tau = 1; tau <= p.k; ++tau) {
        if (!detail::certified_duration_at(p, n, tau)) break;
        r = tau;
    }
    return r;
}

// Exposed for reference checks: the raw certificate predicates.
inline bool certified_earliness_at(const VoteVector& vv, const LabelSpace& labels,
                                   std::int32_t tau) {
    return detail::certified_earliness_at(detail::make_profile(vv, labels), tau);
}

inline bool certified_duration_at(const VoteVector& vv, const LabelSpace& labels,
                                  std::int32_t n, std::int32_t tau) {
    return detail::certified_duration_at(detail::make_profile(vv, labels), n, tau);
}

inline CertifiedRadii certify(const VoteVector& vv, const LabelSpace& labels,
                              std::int32_t n) {
    auto p = detail::make_profile(vv, labels);
    CertifiedRadii out;
    out.predicted = p.y;
    out.n = n;
    out.k = p.k;
    out.earliness_radius = 0;
    for (std::int32_t tau = 1; tau <= p.k; ++tau) {
        if (!detail::certified_earliness_at(p, tau)) break;
        out.earliness_radius = tau;
    }
    out.duration_radius = 0;
    for (std::int32_t tau = 1; tau <= p.k; ++tau) {
        if (!detail::certified_duration_at(p, n, tau)) break;
        out.duration_radius = tau;
    }
    return out;
}

// ---- certified-radii table ----

struct RadiiRow {
    PeriodIndex test_period;
    std::int64_t sample_ordinal = 0;
    std::int32_t predicted = 0;
    bool correct = false;
    std::int32_t earliness_radius = 0;
    std::int32_t duration_radius = 0;
};

inline constexpr std::string_view kRadiiTableHeader =
    "test_period\tsample_ordinal\tpredicted\tcorrect\tearliness_radius\tduration_radius";

inline std::vector<RadiiRow> certify_records(const std::vector<VoteRecord>& records,
                                             const LabelSpace& labels) {
    std::vector<RadiiRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        CertifiedRadii cr = certify(r.vote_vector(), labels, r.n);
        rows.push_back(RadiiRow{r.test_period, r.sample_ordinal, cr.predicted,
                                cr.predicted == r.true_label, cr.earliness_radius,
                                cr.duration_radius});
    }
    return rows;
}

inline void append_radii_row(std::ostream& out, const RadiiRow& r) {
    out << r.test_period.v << '\t' << r.sample_ordinal << '\t' << r.predicted << '\t'
        << (r.correct ? 1 : 0) << '\t' << r.earliness_radius << '\t'
        << r.duration_radius << '\n';
}

inline void write_radii_table(std::ostream& out, const std::vector<RadiiRow>& rows) {
    out << kRadiiTableHeader << "\n";
    for (const auto& r : rows) append_radii_row(out, r);
}

inline void write_radii_table(const std::string& path, const std::vector<RadiiRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open radii table for writing: " + path);
    write_radii_table(out, rows);
    if (!out) throw std::runtime_error("failed writing radii table: " + path);
}

}  // namespace tempagg
