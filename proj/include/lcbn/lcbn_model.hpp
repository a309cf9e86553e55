#pragma once

#include <cstdint>
#include <vector>

#include "lcbn/hierarchy.hpp"
#include "lcbn/pattern.hpp"

namespace lcbn {

// Conditional mastery probabilities t_k: the chance of mastering attribute k
// given every prerequisite is mastered.  Estimation keeps t strictly inside
// (0,1); sampling fixtures may use the boundary.
struct LcbnParams {
    std::vector<double> t;

    int K() const { return static_cast<int>(t.size()); }
    void validate_interior() const;   // throws RangeError outside (0,1)
    void validate_sampling() const;   // allows [0,1]
};

// Probabilities over an explicit pattern set; patterns outside the set have
// probability zero.
struct ProportionVector {
    PatternSet support;
    std::vector<double> p;

    double prob_of(PatternBits alpha) const {
        const long i = support.index_of(alpha);
        return i < 0 ? 0.0 : p[static_cast<size_t>(i)];
    }
    double sum() const;

    // expand onto the full 2^K vector, canonical order
    std::vector<double> dense() const;
};

// Probability of one pattern under the conjunctive factorization: each
// attribute contributes t_k or 1-t_k when all its prerequisites are present,
// and forces the probability to zero when mastered without them.
double pattern_prob(const LcbnParams& t, const Hierarchy& h, PatternBits alpha);
double pattern_prob(const LcbnParams& t, const Hierarchy& h, const AttributePattern& alpha);

// Full proportion vector over the permissible set of h.
ProportionVector proportions(const LcbnParams& t, const Hierarchy& h, int cap_k = 20);

// Forward sampling in the lexicographically smallest topological order:
// alpha_k ~ Bernoulli(t_k) when all prerequisites are mastered, else 0.
// Deterministic for a fixed seed.
std::vector<PatternBits> sample_patterns(const LcbnParams& t, const Hierarchy& h, int n, std::uint64_t seed);

}  // namespace lcbn
