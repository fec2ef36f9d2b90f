#pragma once
// Brute-force vote-level adversary. The attacker fully controls the outputs
// of every base classifier its poisoning window can touch; this upper-bounds
// any sample-level attack, so certified radius <= oracle radius <= radius of
// any concrete attack.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempagg/aggregation.hpp"
#include "tempagg/certify.hpp"
#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"

namespace tempagg {

struct AttackOutcome {
    bool flipped = false;
    std::int32_t to_label = -1;          // rewrite target y'
    std::vector<std::int32_t> positions;  // rewritten window positions, oldest = 0
};

inline VoteVector apply_attack(const VoteVector& vv, const AttackOutcome& a) {
    VoteVector out = vv;
    for (auto pos : a.positions)
        out.votes.at(static_cast<std::size_t>(pos)) = a.to_label;
    return out;
}

// Attack with earliness <= tau: only the newest min(tau, k) votes are
// reachable. Rewriting them all to a single rival is optimal: any rewrite
// that dethrones y is dominated by handing every reachable vote to the
// winner it produced.
inline AttackOutcome oracle_flip_earliness(const VoteVector& vv,
                                           const LabelSpace& labels,
                                           std::int32_t tau) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    std::int32_t k = static_cast<std::int32_t>(vv.votes.size());
    std::int32_t y = aggregate(vv, labels);
    std::int32_t m = std::min(tau, k);
    if (m == 0 || labels.size() <= 1) return {};
    VoteVector mod = vv;
    for (std::int32_t yp = 0; yp < labels.size(); ++yp) {
        if (yp == y) continue;
        mod.votes = vv.votes;
        for (std::int32_t i = k - m; i < k; ++i)
            mod.votes[static_cast<std::size_t>(i)] = yp;
        if (aggregate(mod, labels) != y) {
            AttackOutcome out;
            out.flipped = true;
            out.to_label = yp;
            for (std::int32_t i = k - m; i < k; ++i) out.positions.push_back(i);
            return out;
        }
    }
    return {};
}

// Attack with duration <= tau: poisoned periods form an interval [p, p+d-1]
// with d <= tau, p >= first_period, p+d-1 <= I; it reaches classifiers
// j in [p, p+d+n-2]. Block starts below I-k-n+2 cannot intersect the window.
inline AttackOutcome oracle_flip_duration(
    const VoteVector& vv, const LabelSpace& labels, std::int32_t tau,
    std::int32_t n, std::optional<PeriodIndex> first_period = std::nullopt) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::int32_t k = static_cast<std::int32_t>(vv.votes.size());
    std::int32_t y = aggregate(vv, labels);
    if (tau == 0 || labels.size() <= 1) return {};
    PeriodIndex I = vv.current_period;
    PeriodIndex window_first = I - (k - 1);
    PeriodIndex p_min = I - (k + n - 2);
    if (first_period) {
        if (*first_period > window_first)
            throw std::invalid_argument(
                "first_period exceeds the oldest aggregated classifier");
        p_min = std::max(p_min, *first_period);
    }
    VoteVector mod = vv;
    for (PeriodIndex p = p_min; p <= I; p = p + 1) {
        std::int32_t d = std::min(tau, I - p + 1);
        std::int32_t lo = std::max<std::int32_t>(0, p - window_first);
        std::int32_t hi = std::min<std::int32_t>(k - 1, (p - window_first) + d + n - 2);
        if (lo > hi) continue;
        for (std::int32_t yp = 0; yp < labels.size(); ++yp) {
            if (yp == y) continue;
            mod.votes = vv.votes;
            for (std::int32_t i = lo; i <= hi; ++i)
                mod.votes[static_cast<std::size_t>(i)] = yp;
            if (aggregate(mod, labels) != y) {
                AttackOutcome out;
                out.flipped = true;
                out.to_label = yp;
                for (std::int32_t i = lo; i <= hi; ++i) out.positions.push_back(i);
                return out;
            }
        }
    }
    return {};
}

namespace detail {

// Tries every label assignment to positions [lo, hi]; exponential, meant for
// cross-checking the single-rival shortcut on small instances.
inline bool any_rewrite_flips(const VoteVector& vv, const LabelSpace& labels,
                              std::int32_t y, std::int32_t lo, std::int32_t hi) {
    if (lo > hi) return false;
    std::size_t width = static_cast<std::size_t>(hi - lo + 1);
    std::vector<std::int32_t> digits(width, 0);
    VoteVector mod = vv;
    while (true) {
        mod.votes = vv.votes;
        for (std::size_t i = 0; i < width; ++i)
            mod.votes[static_cast<std::size_t>(lo) + i] = digits[i];
        if (aggregate(mod, labels) != y) return true;
        std::size_t pos = 0;
        while (pos < width) {
            if (++digits[pos] < labels.size()) break;
            digits[pos] = 0;
            ++pos;
        }
        if (pos == width) return false;
    }
}

}  // namespace detail

inline bool oracle_flip_earliness_exhaustive(const VoteVector& vv,
                                             const LabelSpace& labels,
                                             std::int32_t tau) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    std::int32_t k = static_cast<std::int32_t>(vv.votes.size());
    std::int32_t y = aggregate(vv, labels);
    std::int32_t m = std::min(tau, k);
    if (m == 0 || labels.size() <= 1) return false;
    return detail::any_rewrite_flips(vv, labels, y, k - m, k - 1);
}

inline bool oracle_flip_duration_exhaustive(
    const VoteVector& vv, const LabelSpace& labels, std::int32_t tau,
    std::int32_t n, std::optional<PeriodIndex> first_period = std::nullopt) {
    if (tau < 0) throw std::invalid_argument("tau must be >= 0");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::int32_t k = static_cast<std::int32_t>(vv.votes.size());
    std::int32_t y = aggregate(vv, labels);
    if (tau == 0 || labels.size() <= 1) return false;
    PeriodIndex I = vv.current_period;
    PeriodIndex window_first = I - (k - 1);
    PeriodIndex p_min = I - (k + n - 2);
    if (first_period) p_min = std::max(p_min, *first_period);
    for (PeriodIndex p = p_min; p <= I; p = p + 1) {
        std::int32_t d_cap = std::min(tau, I - p + 1);
        for (std::int32_t d = 1; d <= d_cap; ++d) {
            std::int32_t lo = std::max<std::int32_t>(0, p - window_first);
            std::int32_t hi =
                std::min<std::int32_t>(k - 1, (p - window_first) + d + n - 2);
            if (detail::any_rewrite_flips(vv, labels, y, lo, hi)) return true;
        }
    }
    return false;
}

// Largest tau for which no attack within the budget flips the prediction.
// Flip power grows with tau, so the first flipping tau ends the scan. The
// cap (k for earliness, k+n for duration) exceeds any budget that adds
// attacker power; it is reached only when no rival label exists.
inline std::int32_t oracle_radius(const VoteVector& vv, const LabelSpace& labels,
                                  std::int32_t n,
                                  std::optional<PeriodIndex> first_period,
                                  RobustnessNotion notion) {
    std::int32_t k = static_cast<std::int32_t>(vv.votes.size());
    std::int32_t cap = notion == RobustnessNotion::earliness ? k : k + n;
    for (std::int32_t tau = 1; tau <= cap; ++tau) {
        AttackOutcome a = notion == RobustnessNotion::earliness
                              ? oracle_flip_earliness(vv, labels, tau)
                              : oracle_flip_duration(vv, labels, tau, n, first_period);
        if (a.flipped) return tau - 1;
    }
    return cap;
}

// ---- randomized certifier-vs-oracle validation ----

struct OracleCheckConfig {
    std::int64_t trials = 10000;
    std::int32_t k_max = 8;
    std::int32_t labels_max = 5;  // label-space sizes drawn from [2, labels_max]
    std::int32_t n_max = 3;
    std::uint64_t seed = 1;

    void validate() const {
        if (trials < 0) throw std::invalid_argument("trials must be >= 0");
        if (k_max < 1) throw std::invalid_argument("k-max must be >= 1");
        if (labels_max < 2) throw std::invalid_argument("labels-max must be >= 2");
        if (labels_max > 999) throw std::invalid_argument("labels-max must be <= 999");
        if (n_max < 1) throw std::invalid_argument("n-max must be >= 1");
    }
};

struct OracleCheckSummary {
    std::int64_t trials = 0;
    std::int64_t soundness_violations = 0;
    std::int64_t earliness_tightness_violations = 0;
    std::int64_t duration_gap_trials = 0;
    std::int64_t duration_gap_total = 0;
    std::int32_t duration_gap_max = 0;

    bool ok() const {
        return soundness_violations == 0 && earliness_tightness_violations == 0;
    }

    double duration_gap_rate() const {
        return trials == 0 ? 0.0
                           : static_cast<double>(duration_gap_trials) /
                                 static_cast<double>(trials);
    }

    std::string render() const {
        char rate[32];
        std::snprintf(rate, sizeof rate, "%.6f", duration_gap_rate());
        std::string s;
        s += "trials\t" + std::to_string(trials) + "\n";
        s += "soundness_violations\t" + std::to_string(soundness_violations) + "\n";
        s += "earliness_tightness_violations\t" +
             std::to_string(earliness_tightness_violations) + "\n";
        s += "duration_gap_trials\t" + std::to_string(duration_gap_trials) + "\n";
        s += "duration_gap_rate\t" + std::string(rate) + "\n";
        s += "duration_gap_max\t" + std::to_string(duration_gap_max) + "\n";
        s += std::string("verdict\t") + (ok() ? "pass" : "fail") + "\n";
        return s;
    }
};

namespace detail {

inline LabelSpace numbered_labels(std::int32_t count) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (std::int32_t i = 0; i < count; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%03d", i);
        names.emplace_back(buf);
    }
    return LabelSpace::from_names(names);
}

}  // namespace detail

inline OracleCheckSummary run_oracle_check(const OracleCheckConfig& cfg) {
    cfg.validate();
    OracleCheckSummary sum;
    sum.trials = cfg.trials;
    std::vector<LabelSpace> spaces;  // spaces[L-2] has L labels
    for (std::int32_t L = 2; L <= cfg.labels_max; ++L)
        spaces.push_back(detail::numbered_labels(L));
    SplitMix64 rng(cfg.seed);
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
        std::int32_t k = 1 + static_cast<std::int32_t>(rng.below(
                                 static_cast<std::uint64_t>(cfg.k_max)));
        std::int32_t L = 2 + static_cast<std::int32_t>(rng.below(
                                 static_cast<std::uint64_t>(cfg.labels_max - 1)));
        std::int32_t n = 1 + static_cast<std::int32_t>(rng.below(
                                 static_cast<std::uint64_t>(cfg.n_max)));
        const LabelSpace& labels = spaces[static_cast<std::size_t>(L - 2)];
        VoteVector vv;
        vv.current_period = PeriodIndex{100};
        vv.votes.reserve(static_cast<std::size_t>(k));
        for (std::int32_t i = 0; i < k; ++i)
            vv.votes.push_back(static_cast<std::int32_t>(
                rng.below(static_cast<std::uint64_t>(L))));

        CertifiedRadii cert = certify(vv, labels, n);
        std::int32_t oe = oracle_radius(vv, labels, n, std::nullopt,
                                        RobustnessNotion::earliness);
        std::int32_t od = oracle_radius(vv, labels, n, std::nullopt,
                                        RobustnessNotion::duration);
        if (cert.earliness_radius > oe || cert.duration_radius > od)
            ++sum.soundness_violations;
        if (cert.earliness_radius != oe) ++sum.earliness_tightness_violations;
        std::int32_t gap = od - cert.duration_radius;
        if (gap > 0) {
            ++sum.duration_gap_trials;
            sum.duration_gap_total += gap;
            sum.duration_gap_max = std::max(sum.duration_gap_max, gap);
        }
    }
    return sum;
}

}  // namespace tempagg
