#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lcbn/pattern.hpp"

namespace lcbn {

enum class AttributeRole { Ancestor, Intermediate, Leaf, Singleton };

const char* to_string(AttributeRole role);

// An attribute hierarchy: a DAG of prerequisite relations on K attributes.
// Edges are stored as the transitive closure (the reachability matrix G with
// zero diagonal); user-supplied edge lists are closed on construction.
class Hierarchy {
public:
    Hierarchy() : K_(0) {}

    int K() const { return K_; }

    // closure edge k -> l, 1-based
    bool reaches(int k1, int l1) const { return G_[static_cast<size_t>(k1 - 1) * K_ + (l1 - 1)] != 0; }

    // row-major K x K reachability matrix
    const std::vector<std::uint8_t>& reachability() const { return G_; }

    // closure parents of attribute k (1-based), as a pattern mask
    PatternBits parent_mask(int k1) const { return parent_mask_[static_cast<size_t>(k1 - 1)]; }

    std::vector<std::pair<int, int>> closure_edges() const;

    // unique transitive reduction (direct edges)
    std::vector<std::pair<int, int>> reduction_edges() const;

    size_t edge_count() const;

    // lexicographically smallest topological order, 1-based
    std::vector<int> topological_order() const;

    friend bool operator==(const Hierarchy& a, const Hierarchy& b) { return a.K_ == b.K_ && a.G_ == b.G_; }

    friend Hierarchy build_hierarchy(int K, const std::vector<std::pair<int, int>>& edges);

private:
    int K_;
    std::vector<std::uint8_t> G_;
    std::vector<PatternBits> parent_mask_;
};

// Builds a hierarchy from 1-based prerequisite pairs (k, l) meaning k -> l.
// Throws IndexError for endpoints outside [1, K] and CycleError if the edges
// contain a directed cycle.
Hierarchy build_hierarchy(int K, const std::vector<std::pair<int, int>>& edges);

// All patterns consistent with every closure edge, in canonical order.
// Throws CapacityError when 2^K exceeds the enumeration cap.
PatternSet enumerate_permissible(const Hierarchy& h, int cap_k = 20);

bool is_permissible(const Hierarchy& h, PatternBits alpha);
bool is_permissible(const Hierarchy& h, const AttributePattern& alpha);

// Reads a hierarchy back off a pattern set: k -> l whenever column l implies
// column k across all patterns.  Identical columns mean the two attributes
// are indistinguishable in the set and raise MergedAttributesError.
Hierarchy reconstruct_hierarchy(const PatternSet& a);

// Role of each attribute from the direct (transitively reduced) edges.
std::vector<AttributeRole> classify_attributes(const Hierarchy& h);

}  // namespace lcbn
