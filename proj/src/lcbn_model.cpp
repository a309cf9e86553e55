#include "lcbn/lcbn_model.hpp"

#include <string>

#include "lcbn/errors.hpp"
#include "lcbn/rng.hpp"

namespace lcbn {

void LcbnParams::validate_interior() const {
    for (size_t k = 0; k < t.size(); ++k)
        if (!(t[k] > 0.0 && t[k] < 1.0))
            throw RangeError("t_" + std::to_string(k + 1) + " = " + std::to_string(t[k]) +
                             " outside (0,1)");
}

void LcbnParams::validate_sampling() const {
    for (size_t k = 0; k < t.size(); ++k)
        if (!(t[k] >= 0.0 && t[k] <= 1.0))
            throw RangeError("t_" + std::to_string(k + 1) + " outside [0,1]");
}

double ProportionVector::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

std::vector<double> ProportionVector::dense() const {
    std::vector<double> out(size_t{1} << support.K(), 0.0);
    for (size_t i = 0; i < support.size(); ++i) out[support[i]] = p[i];
    return out;
}

double pattern_prob(const LcbnParams& t, const Hierarchy& h, PatternBits alpha) {
    const int K = h.K();
    if (t.K() != K) throw IndexError("t length does not match hierarchy K");
    double prob = 1.0;
    for (int k = 1; k <= K; ++k) {
        const bool parents_ready = dominates(alpha, h.parent_mask(k));
        const bool mastered = has_attr(alpha, K, k);
        if (parents_ready) {
            prob *= mastered ? t.t[static_cast<size_t>(k - 1)] : 1.0 - t.t[static_cast<size_t>(k - 1)];
        } else if (mastered) {
            return 0.0;
        }
        // absent attribute with unmet prerequisites contributes a factor of one
    }
    return prob;
}

double pattern_prob(const LcbnParams& t, const Hierarchy& h, const AttributePattern& alpha) {
    if (alpha.K() != h.K()) throw IndexError("pattern length does not match hierarchy K");
    return pattern_prob(t, h, alpha.bits());
}

ProportionVector proportions(const LcbnParams& t, const Hierarchy& h, int cap_k) {
    ProportionVector out;
    out.support = enumerate_permissible(h, cap_k);
    out.p.reserve(out.support.size());
    for (PatternBits alpha : out.support.patterns()) out.p.push_back(pattern_prob(t, h, alpha));
    return out;
}

std::vector<PatternBits> sample_patterns(const LcbnParams& t, const Hierarchy& h, int n, std::uint64_t seed) {
    const int K = h.K();
    if (t.K() != K) throw IndexError("t length does not match hierarchy K");
    t.validate_sampling();

    const std::vector<int> order = h.topological_order();
    Rng rng(mix_seed(seed, 0x5a5a17u));
    std::vector<PatternBits> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        PatternBits alpha = 0;
        for (int k : order) {
            if (!dominates(alpha, h.parent_mask(k))) continue;
            if (rng.bernoulli(t.t[static_cast<size_t>(k - 1)])) alpha |= attr_bit(K, k);
        }
        out.push_back(alpha);
    }
    return out;
}

}  // namespace lcbn
