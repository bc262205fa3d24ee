#include "hdist/domain_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hdist {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

void DomainConfig::validate() const {
    if (d < 1 || d > kMaxDim)
        throw std::invalid_argument("dimension must be 1, 2 or 3 (got " + std::to_string(d) + ")");
    if (!is_power_of_two(n))
        throw std::invalid_argument("n must be a positive power of two (got " + std::to_string(n) + ")");
    if (leaf_size < 1 || n % leaf_size != 0)
        throw std::invalid_argument("leaf_size must divide n (got leaf_size=" + std::to_string(leaf_size) +
                                    ", n=" + std::to_string(n) + ")");
    // n is a power of two, so any divisor is too.
}

std::int64_t DomainConfig::num_points() const { return ipow(n, d); }

int DomainConfig::refinements() const { return std::countr_zero(static_cast<unsigned>(n / leaf_size)); }

std::int64_t IndexBox::dofs(int d) const {
    std::int64_t r = 1;
    for (int k = 0; k < d; ++k) r *= hi[k] - lo[k];
    return r;
}

bool IndexBox::contains(std::span<const int> point, int d) const {
    for (int k = 0; k < d; ++k)
        if (point[k] < lo[k] || point[k] >= hi[k]) return false;
    return true;
}

bool boxes_intersect(const IndexBox& a, const IndexBox& b, int d) {
    for (int k = 0; k < d; ++k)
        if (a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) return false;
    return true;
}

BoxGeometry box_geometry(const IndexBox& box, const DomainConfig& config) {
    BoxGeometry g;
    const double h = 1.0 / config.n;
    double sq = 0.0;
    for (int k = 0; k < config.d; ++k) {
        const double len = (box.hi[k] - box.lo[k]) * h;
        sq += len * len;
        g.center[k] = 0.5 * (box.lo[k] + box.hi[k]) * h;
    }
    g.diameter = std::sqrt(sq);
    return g;
}

double box_distance(const IndexBox& a, const IndexBox& b, const DomainConfig& config) {
    double sq = 0.0;
    for (int k = 0; k < config.d; ++k) {
        const int gap = std::max({0, b.lo[k] - a.hi[k], a.lo[k] - b.hi[k]});
        const double g = static_cast<double>(gap) / config.n;
        sq += g * g;
    }
    return std::sqrt(sq);
}

DomainTree::DomainTree(const DomainConfig& config) : config_(config) {
    config_.validate();
    const int levels = config_.refinements() + 1;
    level_start_.reserve(levels + 1);
    std::int64_t start = 0;
    for (int l = 0; l < levels; ++l) {
        level_start_.push_back(start);
        start += std::int64_t{1} << (config_.d * l);
    }
    level_start_.push_back(start);
}

std::int64_t DomainTree::nodes_at_level(int level) const {
    return level_start_.at(level + 1) - level_start_.at(level);
}

NodeId DomainTree::node(int level, std::int64_t index_in_level) const {
    if (level < 0 || level >= num_levels() || index_in_level < 0 || index_in_level >= nodes_at_level(level))
        throw std::out_of_range("node (" + std::to_string(level) + ", " + std::to_string(index_in_level) +
                                ") is outside the domain tree");
    return static_cast<NodeId>(level_start_[level] + index_in_level);
}

int DomainTree::level_of(NodeId id) const {
    if (id < 0 || id >= num_nodes()) throw std::out_of_range("unknown domain node " + std::to_string(id));
    int l = 0;
    while (level_start_[l + 1] <= id) ++l;
    return l;
}

std::int64_t DomainTree::index_in_level(NodeId id) const { return id - level_start_[level_of(id)]; }

NodeId DomainTree::parent(NodeId id) const {
    const int l = level_of(id);
    if (l == 0) return kNoNode;
    return node(l - 1, index_in_level(id) >> config_.d);
}

NodeId DomainTree::child(NodeId id, int c) const {
    const int l = level_of(id);
    if (l == leaf_level()) return kNoNode;
    if (c < 0 || c >= children_per_node()) throw std::out_of_range("child index out of range");
    return node(l + 1, (index_in_level(id) << config_.d) + c);
}

int DomainTree::child_index(NodeId id) const {
    return static_cast<int>(index_in_level(id) & (children_per_node() - 1));
}

std::int64_t DomainTree::dofs_at_level(int level) const { return ipow(side(level), config_.d); }

IndexBox DomainTree::box(NodeId id) const {
    const int l = level_of(id);
    const std::int64_t idx = index_in_level(id);
    const int d = config_.d;
    IndexBox b;
    b.level = l;
    for (int j = 1; j <= l; ++j) {
        const int digit = static_cast<int>((idx >> (d * (l - j))) & ((1 << d) - 1));
        for (int k = 0; k < d; ++k)
            if (digit & (1 << (d - 1 - k))) b.lo[k] += config_.n >> j;
    }
    for (int k = 0; k < d; ++k) b.hi[k] = b.lo[k] + side(l);
    return b;
}

std::int64_t DomainTree::canonical_index(std::span<const int> point) const {
    const int d = config_.d;
    const int L = leaf_level();
    for (int k = 0; k < d; ++k)
        if (point[k] < 0 || point[k] >= config_.n) throw std::out_of_range("grid point outside the domain");
    std::int64_t leaf = 0;
    for (int j = 1; j <= L; ++j) {
        int digit = 0;
        for (int k = 0; k < d; ++k) {
            if (point[k] & (config_.n >> j)) digit |= 1 << (d - 1 - k);
        }
        leaf = (leaf << d) | digit;
    }
    const int leaf_side = side(L);
    std::int64_t local = 0;
    for (int k = 0; k < d; ++k) local = local * leaf_side + (point[k] % leaf_side);
    return leaf * dofs_at_level(L) + local;
}

std::array<int, kMaxDim> DomainTree::point_of(std::int64_t canonical) const {
    const int L = leaf_level();
    const std::int64_t leaf_dofs = dofs_at_level(L);
    if (canonical < 0 || canonical >= config_.num_points()) throw std::out_of_range("canonical index out of range");
    const IndexBox leaf = box(node(L, canonical / leaf_dofs));
    std::int64_t local = canonical % leaf_dofs;
    const int leaf_side = side(L);
    std::array<int, kMaxDim> p{};
    for (int k = config_.d - 1; k >= 0; --k) {
        p[k] = leaf.lo[k] + static_cast<int>(local % leaf_side);
        local /= leaf_side;
    }
    return p;
}

} // namespace hdist
