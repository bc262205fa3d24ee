#pragma once

#include "hdist/domain_tree.hpp"

namespace hdist {

enum class AdmissibilityKind { Weak, Standard };

struct AdmissibilityRule {
    AdmissibilityKind kind = AdmissibilityKind::Weak;
    /// Buffer-zone constant; only used by the standard rule.
    double rho = 1.0;

    static AdmissibilityRule weak() { return {AdmissibilityKind::Weak, 1.0}; }
    static AdmissibilityRule standard(double rho);
    /// Standard rule with rho = sqrt(d).
    static AdmissibilityRule standard_default(int d);

    const char* name() const { return kind == AdmissibilityKind::Weak ? "weak" : "standard"; }
};

/// Weak: disjoint index sets.  Standard: min(diam) <= rho * dist between the
/// closed continuous boxes.  Both boxes must be on the same tree level.
bool is_admissible(const AdmissibilityRule& rule, const IndexBox& target, const IndexBox& source,
                   const DomainConfig& config);

/// Same test with "max(diam)" in place of "min(diam)".
bool is_strong_admissible(double rho, const IndexBox& target, const IndexBox& source, const DomainConfig& config);

/// Admissible pairs among children(target) x children(source).
int count_admissible_child_pairs(const AdmissibilityRule& rule, NodeId parent_target, NodeId parent_source,
                                 const DomainTree& tree);

} // namespace hdist
