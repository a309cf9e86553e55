#include "lcbn/hierarchy.hpp"

#include <string>

#include "lcbn/errors.hpp"

namespace lcbn {

const char* to_string(AttributeRole role) {
    switch (role) {
        case AttributeRole::Ancestor: return "ancestor";
        case AttributeRole::Intermediate: return "intermediate";
        case AttributeRole::Leaf: return "leaf";
        case AttributeRole::Singleton: return "singleton";
    }
    return "?";
}

Hierarchy build_hierarchy(int K, const std::vector<std::pair<int, int>>& edges) {
    if (K < 1 || K > kMaxPatternBits)
        throw IndexError("attribute count K out of range: " + std::to_string(K));

    Hierarchy h;
    h.K_ = K;
    h.G_.assign(static_cast<size_t>(K) * K, 0);
    auto g = [&](int k0, int l0) -> std::uint8_t& { return h.G_[static_cast<size_t>(k0) * K + l0]; };

    for (auto [k, l] : edges) {
        if (k < 1 || k > K || l < 1 || l > K)
            throw IndexError("edge endpoint outside [1," + std::to_string(K) + "]: " + std::to_string(k) +
                             " -> " + std::to_string(l));
        if (k == l) throw CycleError("self loop on attribute " + std::to_string(k));
        g(k - 1, l - 1) = 1;
    }

    // Floyd-Warshall closure; K is small
    for (int m = 0; m < K; ++m)
        for (int k = 0; k < K; ++k)
            if (g(k, m))
                for (int l = 0; l < K; ++l)
                    if (g(m, l)) g(k, l) = 1;

    for (int k = 0; k < K; ++k)
        if (g(k, k)) throw CycleError("directed cycle through attribute " + std::to_string(k + 1));

    h.parent_mask_.assign(static_cast<size_t>(K), 0);
    for (int l = 0; l < K; ++l)
        for (int k = 0; k < K; ++k)
            if (g(k, l)) h.parent_mask_[static_cast<size_t>(l)] |= attr_bit(K, k + 1);

    return h;
}

std::vector<std::pair<int, int>> Hierarchy::closure_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= K_; ++k)
        for (int l = 1; l <= K_; ++l)
            if (reaches(k, l)) out.emplace_back(k, l);
    return out;
}

std::vector<std::pair<int, int>> Hierarchy::reduction_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= K_; ++k) {
        for (int l = 1; l <= K_; ++l) {
            if (!reaches(k, l)) continue;
            bool implied = false;
            for (int m = 1; m <= K_ && !implied; ++m)
                if (m != k && m != l && reaches(k, m) && reaches(m, l)) implied = true;
            if (!implied) out.emplace_back(k, l);
        }
    }
    return out;
}

size_t Hierarchy::edge_count() const {
    size_t n = 0;
    for (auto v : G_) n += v;
    return n;
}

std::vector<int> Hierarchy::topological_order() const {
    std::vector<int> order;
    order.reserve(static_cast<size_t>(K_));
    PatternBits placed = 0;
    std::vector<bool> done(static_cast<size_t>(K_) + 1, false);
    for (int step = 0; step < K_; ++step) {
        for (int k = 1; k <= K_; ++k) {
            if (done[static_cast<size_t>(k)]) continue;
            if (dominates(placed, parent_mask(k))) {
                order.push_back(k);
                placed |= attr_bit(K_, k);
                done[static_cast<size_t>(k)] = true;
                break;
            }
        }
    }
    return order;
}

PatternSet enumerate_permissible(const Hierarchy& h, int cap_k) {
    const int K = h.K();
    if (K > cap_k)
        throw CapacityError("2^" + std::to_string(K) + " patterns exceed the enumeration cap (K <= " +
                            std::to_string(cap_k) + ")");
    std::vector<PatternBits> out;
    const PatternBits n = PatternBits{1} << K;
    for (PatternBits b = 0; b < n; ++b)
        if (is_permissible(h, b)) out.push_back(b);
    return PatternSet(K, std::move(out), false);
}

bool is_permissible(const Hierarchy& h, PatternBits alpha) {
    PatternBits rest = alpha;
    while (rest) {
        const int bit = __builtin_ctz(rest);
        rest &= rest - 1;
        const int k1 = h.K() - bit;
        if (!dominates(alpha, h.parent_mask(k1))) return false;
    }
    return true;
}

bool is_permissible(const Hierarchy& h, const AttributePattern& alpha) {
    if (alpha.K() != h.K()) throw IndexError("pattern length does not match hierarchy K");
    return is_permissible(h, alpha.bits());
}

Hierarchy reconstruct_hierarchy(const PatternSet& a) {
    if (a.empty()) throw IndexError("cannot reconstruct a hierarchy from an empty pattern set");
    const int K = a.K();
    const PatternBits full = (K == kMaxPatternBits) ? ~PatternBits{0} : ((PatternBits{1} << K) - 1);

    // viol[l] collects attributes k that fail "alpha_l = 1 implies alpha_k = 1"
    std::vector<PatternBits> viol(static_cast<size_t>(K) + 1, 0);
    for (PatternBits alpha : a.patterns()) {
        const PatternBits absent = ~alpha & full;
        PatternBits rest = alpha;
        while (rest) {
            const int bit = __builtin_ctz(rest);
            rest &= rest - 1;
            viol[static_cast<size_t>(K - bit)] |= absent;
        }
    }

    std::vector<std::pair<int, int>> edges;
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= K; ++l) {
            if (k == l) continue;
            const bool k_before_l = !has_attr(viol[static_cast<size_t>(l)], K, k);  // col_k >= col_l
            if (!k_before_l) continue;
            const bool l_before_k = !has_attr(viol[static_cast<size_t>(k)], K, l);
            if (l_before_k)
                throw MergedAttributesError("attributes " + std::to_string(k) + " and " + std::to_string(l) +
                                            " have identical columns across the pattern set");
            edges.emplace_back(k, l);
        }
    }
    return build_hierarchy(K, edges);
}

std::vector<AttributeRole> classify_attributes(const Hierarchy& h) {
    const int K = h.K();
    std::vector<int> indeg(static_cast<size_t>(K) + 1, 0), outdeg(static_cast<size_t>(K) + 1, 0);
    for (auto [k, l] : h.reduction_edges()) {
        ++outdeg[static_cast<size_t>(k)];
        ++indeg[static_cast<size_t>(l)];
    }
    std::vector<AttributeRole> roles(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) {
        const bool has_parent = indeg[static_cast<size_t>(k)] > 0;
        const bool has_child = outdeg[static_cast<size_t>(k)] > 0;
        roles[static_cast<size_t>(k - 1)] = has_child ? (has_parent ? AttributeRole::Intermediate : AttributeRole::Ancestor)
                                                      : (has_parent ? AttributeRole::Leaf : AttributeRole::Singleton);
    }
    return roles;
}

}  // namespace lcbn
