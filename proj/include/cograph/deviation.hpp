#pragma once

#include <optional>
#include <utility>

#include "cograph/errors.hpp"
#include "cograph/graph.hpp"

namespace cograph {

inline constexpr double kHighQualityThreshold = 3.5;  // τ_h
inline constexpr double kLowQualityThreshold = 2.5;   // τ_l

struct PageRating {
    int currency = 1;   // c
    int relevance = 1;  // r
    int authority = 1;  // α
    int accuracy = 1;   // β
    int purpose = 1;    // ρ
    bool accessible = true;
    std::optional<Barrier> barrier;  // present iff not accessible
};

struct DeviationSignal {
    double mean_cr = 0;
    double mean_aap = 0;
    bool phi = false;         // accessibility failure disjunction
    Strength psi = Strength::None;  // unexpected-finding strength
};

enum class StrategyKind { Substitute, Exploit, Verify, Pivot, Explore };

inline const char* to_string(StrategyKind s) {
    switch (s) {
        case StrategyKind::Substitute: return "substitute";
        case StrategyKind::Exploit: return "exploit";
        case StrategyKind::Verify: return "verify";
        case StrategyKind::Pivot: return "pivot";
        case StrategyKind::Explore: return "explore";
    }
    return "?";
}

/// Page-level composites: cr = 0.30c + 0.70r, aap = 0.40α + 0.35β + 0.25ρ.
/// Inaccessible pages never reach this function.
inline std::pair<double, double> page_composites(const PageRating& p) {
    if (!p.accessible) throw InaccessiblePage("composites requested for a gated page");
    double cr = 0.30 * p.currency + 0.70 * p.relevance;
    double aap = 0.40 * p.authority + 0.35 * p.accuracy + 0.25 * p.purpose;
    return {cr, aap};
}

/// Folds a task's accessible pages plus barrier observations into a node
/// profile over the bounded window. psi rides through from the batch-level
/// judgment; an empty window leaves the means absent.
inline QualityProfile aggregate_profile(const std::deque<std::pair<double, double>>& window,
                                        const std::vector<Barrier>& barriers,
                                        Strength psi) {
    QualityProfile q;
    for (const auto& [cr, aap] : window) q.push_page(cr, aap);
    for (auto b : barriers) q.add_barrier(b);
    q.unexpected_strength = psi;
    return q;
}

inline DeviationSignal deviation_from_profile(const QualityProfile& q) {
    DeviationSignal d;
    d.mean_cr = q.mean_cr.value_or(0);
    d.mean_aap = q.mean_aap.value_or(0);
    d.phi = q.accessibility_flag();
    d.psi = q.unexpected_strength;
    return d;
}

/// Linear projection of the ordinal onto [1,4]; routing compares ordinals.
inline double psi_ordinal_to_scalar(Strength psi) {
    return 1.0 + static_cast<double>(psi);
}

/// Strategy router π, evaluated in priority order: accessibility failures
/// dominate, then the quality quadrants, with Pivot requiring at least a
/// moderate unexpected signal. Threshold comparisons are inclusive.
inline StrategyKind select_strategy(const DeviationSignal& d) {
    if (d.phi) return StrategyKind::Substitute;
    bool high_cr = d.mean_cr >= kHighQualityThreshold;
    bool high_aap = d.mean_aap >= kHighQualityThreshold;
    if (high_cr && high_aap) return StrategyKind::Exploit;
    if (high_cr && !high_aap) return StrategyKind::Verify;
    if (!high_cr && d.psi >= Strength::Moderate) return StrategyKind::Pivot;
    return StrategyKind::Explore;
}

/// Structural-escalation signal: both composites below τ_l.
inline bool quality_gap(const DeviationSignal& d) {
    return d.mean_cr < kLowQualityThreshold && d.mean_aap < kLowQualityThreshold;
}

}  // namespace cograph
