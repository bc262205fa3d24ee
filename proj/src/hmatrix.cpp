#include "hdist/hmatrix.hpp"

#include "hdist/keyed_random.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hdist {

void HMatrixConfig::validate() const {
    domain.validate();
    if (r < 1) throw std::invalid_argument("low-rank block rank must be >= 1");
    if (rule.kind == AdmissibilityKind::Standard && !(rule.rho > 0.0))
        throw std::invalid_argument("rho must be positive");
}

std::vector<std::pair<int, int>> BlockId::path(int d) const {
    std::vector<std::pair<int, int>> p;
    p.reserve(level);
    const std::int64_t mask = (std::int64_t{1} << d) - 1;
    for (int j = 1; j <= level; ++j) {
        const int shift = d * (level - j);
        p.emplace_back(static_cast<int>((target_index >> shift) & mask), static_cast<int>((source_index >> shift) & mask));
    }
    return p;
}

BlockId BlockId::from_path(const std::vector<std::pair<int, int>>& path, int d) {
    BlockId id;
    id.level = static_cast<int>(path.size());
    for (const auto& [t, s] : path) {
        if (t < 0 || t >= (1 << d) || s < 0 || s >= (1 << d)) throw std::invalid_argument("child index out of range");
        id.target_index = (id.target_index << d) | t;
        id.source_index = (id.source_index << d) | s;
    }
    return id;
}

std::uint64_t BlockId::key() const {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(level) + 1);
    h = combine64(h, static_cast<std::uint64_t>(target_index));
    return combine64(h, static_cast<std::uint64_t>(source_index));
}

bool preorder_less(const BlockId& a, const BlockId& b, int d) {
    const int common = std::min(a.level, b.level);
    const std::int64_t mask = (std::int64_t{1} << d) - 1;
    for (int j = 1; j <= common; ++j) {
        const auto digit = [&](const BlockId& id, std::int64_t index) { return (index >> (d * (id.level - j))) & mask; };
        const auto at = digit(a, a.target_index), bt = digit(b, b.target_index);
        if (at != bt) return at < bt;
        const auto as = digit(a, a.source_index), bs = digit(b, b.source_index);
        if (as != bs) return as < bs;
    }
    return a.level < b.level;
}

const char* to_string(BlockKind kind) {
    switch (kind) {
    case BlockKind::Dense: return "dense";
    case BlockKind::LowRank: return "lowrank";
    case BlockKind::Hier: return "hier";
    }
    return "?";
}

HMatrixStructure::HMatrixStructure(const DomainTree& tree, const AdmissibilityRule& rule, int r)
    : tree_(tree), rule_(rule), r_(r) {
    if (r < 1) throw std::invalid_argument("low-rank block rank must be >= 1");
    build(tree_.root(), tree_.root(), -1);
    for (int i = 0; i < static_cast<int>(blocks_.size()); ++i)
        if (blocks_[i].kind != BlockKind::Hier) data_blocks_.push_back(i);
}

int HMatrixStructure::build(NodeId target, NodeId source, int parent) {
    const int index = static_cast<int>(blocks_.size());
    HBlock b;
    b.id = BlockId{tree_.level_of(target), tree_.index_in_level(target), tree_.index_in_level(source)};
    b.target = target;
    b.source = source;
    b.parent = parent;
    // The order of these checks matters: a leaf pair is dense even when admissible.
    if (tree_.is_leaf(target) || tree_.is_leaf(source))
        b.kind = BlockKind::Dense;
    else if (target != tree_.root() && is_admissible(rule_, tree_.box(target), tree_.box(source), tree_.config()))
        b.kind = BlockKind::LowRank;
    else
        b.kind = BlockKind::Hier;
    blocks_.push_back(b);

    if (b.kind == BlockKind::Hier) {
        const int c = tree_.children_per_node();
        std::vector<int> children;
        children.reserve(c * c);
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < c; ++j) children.push_back(build(tree_.child(target, i), tree_.child(source, j), index));
        blocks_[index].children = std::move(children);
    }
    return index;
}

std::int64_t HMatrixStructure::stored_scalars(const HBlock& b) const {
    switch (b.kind) {
    case BlockKind::Dense: return rows(b) * cols(b);
    case BlockKind::LowRank: return (rows(b) + cols(b)) * r_;
    case BlockKind::Hier: return 0;
    }
    return 0;
}

std::int64_t HMatrixStructure::flops(const HBlock& b) const { return 2 * stored_scalars(b); }

int HMatrixStructure::count(BlockKind kind, int level) const {
    int c = 0;
    for (const auto& b : blocks_)
        if (b.kind == kind && (level < 0 || b.id.level == level)) ++c;
    return c;
}

double dense_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t col) {
    return keyed_uniform(seed, id.key(), FactorTag::Dense, row, col);
}

double u_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t k) {
    return keyed_uniform(seed, id.key(), FactorTag::U, row, k);
}

double v_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t k) {
    return keyed_uniform(seed, id.key(), FactorTag::V, row, k);
}

HMatrix::HMatrix(const HMatrixConfig& config, std::shared_ptr<const HMatrixStructure> structure)
    : config_(config), structure_(std::move(structure)) {
    const auto& s = *structure_;
    data_.resize(s.blocks().size());
    for (int bi : s.data_blocks()) {
        const HBlock& b = s.block(bi);
        BlockData& out = data_[bi];
        const std::int64_t m = s.rows(b), n = s.cols(b);
        if (b.kind == BlockKind::Dense) {
            out.d = Matrix(m, n);
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < n; ++j) out.d(i, j) = dense_entry(config_.seed, b.id, i, j);
        } else {
            out.u = Matrix(m, s.rank());
            out.v = Matrix(n, s.rank());
            for (std::int64_t i = 0; i < m; ++i)
                for (int k = 0; k < s.rank(); ++k) out.u(i, k) = u_entry(config_.seed, b.id, i, k);
            for (std::int64_t i = 0; i < n; ++i)
                for (int k = 0; k < s.rank(); ++k) out.v(i, k) = v_entry(config_.seed, b.id, i, k);
        }
    }
}

std::shared_ptr<const HMatrixStructure> build_structure(const HMatrixConfig& config) {
    config.validate();
    return std::make_shared<const HMatrixStructure>(DomainTree(config.domain), config.rule, config.r);
}

HMatrix build_hmatrix(const HMatrixConfig& config, const DomainTree& tree) {
    config.validate();
    if (tree.config().d != config.domain.d || tree.config().n != config.domain.n ||
        tree.config().leaf_size != config.domain.leaf_size)
        throw std::invalid_argument("domain tree does not match the H-matrix configuration");
    return HMatrix(config, std::make_shared<const HMatrixStructure>(tree, config.rule, config.r));
}

HMatrix build_hmatrix(const HMatrixConfig& config) { return HMatrix(config, build_structure(config)); }

DomainVector sequential_matvec(const HMatrix& k, std::span<const double> x) {
    if (static_cast<std::int64_t>(x.size()) != k.size())
        throw std::invalid_argument("sequential_matvec: vector length " + std::to_string(x.size()) +
                                    " does not match matrix size " + std::to_string(k.size()));
    const auto& s = k.structure();
    const auto& tree = s.tree();
    DomainVector y(x.size(), 0.0);
    std::vector<double> tmp;
    for (int bi : s.data_blocks()) {
        const HBlock& b = s.block(bi);
        const BlockData& data = k.data(bi);
        auto xs = x.subspan(tree.offset(b.source), tree.dofs(b.source));
        auto yt = std::span<double>(y).subspan(tree.offset(b.target), tree.dofs(b.target));
        if (b.kind == BlockKind::Dense) {
            tmp.assign(yt.size(), 0.0);
            gemv(data.d, xs, tmp);
            axpy(1.0, tmp, yt);
        } else {
            tmp.assign(s.rank(), 0.0);
            gemv_transposed(data.v, xs, tmp);
            gemv_accumulate(data.u, tmp, 1.0, yt);
        }
    }
    return y;
}

Matrix densify(const HMatrix& k, std::int64_t cap) {
    const std::int64_t n = k.size();
    if (n > cap)
        throw std::invalid_argument("densify: matrix size " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
    const auto& s = k.structure();
    const auto& tree = s.tree();
    Matrix full(n, n);
    for (int bi : s.data_blocks()) {
        const HBlock& b = s.block(bi);
        const BlockData& data = k.data(bi);
        const std::int64_t r0 = tree.offset(b.target), c0 = tree.offset(b.source);
        const std::int64_t m = s.rows(b), w = s.cols(b);
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < w; ++j) {
                double v;
                if (b.kind == BlockKind::Dense) {
                    v = data.d(i, j);
                } else {
                    v = 0.0;
                    for (std::int64_t q = 0; q < data.u.cols(); ++q) v += data.u(i, q) * data.v(j, q);
                }
                full(r0 + i, c0 + j) = v;
            }
    }
    return full;
}

std::int64_t flop_count(const HMatrixStructure& structure) {
    std::int64_t total = 0;
    for (int bi : structure.data_blocks()) total += structure.flops(structure.block(bi));
    return total;
}

} // namespace hdist
