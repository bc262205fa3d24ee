#include "hdist/admissibility.hpp"

#include <cmath>
#include <stdexcept>

namespace hdist {

namespace {

// Ties on the buffer-zone boundary are admissible; the tolerance absorbs the
// rounding of rho^2 when rho is an irrational default such as sqrt(3).
constexpr double kTieTolerance = 1e-12;

bool diameter_within(double diam, double rho, double dist) {
    return diam * diam <= rho * rho * dist * dist * (1.0 + kTieTolerance);
}

void require_same_level(const IndexBox& a, const IndexBox& b) {
    if (a.level != b.level) throw std::invalid_argument("admissibility is only defined for boxes on the same level");
}

} // namespace

AdmissibilityRule AdmissibilityRule::standard(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    return {AdmissibilityKind::Standard, rho};
}

AdmissibilityRule AdmissibilityRule::standard_default(int d) { return standard(std::sqrt(static_cast<double>(d))); }

bool is_admissible(const AdmissibilityRule& rule, const IndexBox& target, const IndexBox& source,
                   const DomainConfig& config) {
    require_same_level(target, source);
    if (rule.kind == AdmissibilityKind::Weak) return !boxes_intersect(target, source, config.d);
    const double diam = std::min(box_geometry(target, config).diameter, box_geometry(source, config).diameter);
    return diameter_within(diam, rule.rho, box_distance(target, source, config));
}

bool is_strong_admissible(double rho, const IndexBox& target, const IndexBox& source, const DomainConfig& config) {
    require_same_level(target, source);
    const double diam = std::max(box_geometry(target, config).diameter, box_geometry(source, config).diameter);
    return diameter_within(diam, rho, box_distance(target, source, config));
}

int count_admissible_child_pairs(const AdmissibilityRule& rule, NodeId parent_target, NodeId parent_source,
                                 const DomainTree& tree) {
    if (tree.is_leaf(parent_target) || tree.is_leaf(parent_source))
        throw std::invalid_argument("count_admissible_child_pairs needs two non-leaf parents");
    const int c = tree.children_per_node();
    int count = 0;
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j)
            if (is_admissible(rule, tree.box(tree.child(parent_target, i)), tree.box(tree.child(parent_source, j)),
                              tree.config()))
                ++count;
    return count;
}

} // namespace hdist
