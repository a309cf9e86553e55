#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "lcbn/errors.hpp"

namespace lcbn {

// Attribute patterns are binary vectors alpha in {0,1}^K.  A pattern is
// stored as the integer value of its bit string with alpha_1 as the most
// significant bit, so the string "1100" (K=4) has value 12.  Attribute k
// (1-based) lives at bit (K-k).
using PatternBits = std::uint32_t;

constexpr int kMaxPatternBits = 30;

inline PatternBits attr_bit(int K, int k1) {  // k1 is 1-based
    return PatternBits{1} << (K - k1);
}

inline bool has_attr(PatternBits bits, int K, int k1) {
    return (bits >> (K - k1)) & 1u;
}

// a >= b elementwise (a dominates b)
inline bool dominates(PatternBits a, PatternBits b) { return (a & b) == b; }

class AttributePattern {
public:
    AttributePattern(int K, PatternBits bits) : K_(K), bits_(bits) {
        if (K < 1 || K > kMaxPatternBits) throw IndexError("pattern length K out of range: " + std::to_string(K));
        if (K < kMaxPatternBits && (bits >> K) != 0) throw IndexError("pattern bits exceed K");
    }

    static AttributePattern parse(const std::string& s) {
        if (s.empty() || s.size() > kMaxPatternBits) throw IndexError("pattern string length out of range");
        PatternBits b = 0;
        for (char c : s) {
            if (c != '0' && c != '1') throw IndexError(std::string("invalid pattern character '") + c + "'");
            b = (b << 1) | (c == '1' ? 1u : 0u);
        }
        return AttributePattern(static_cast<int>(s.size()), b);
    }

    int K() const { return K_; }
    PatternBits bits() const { return bits_; }
    bool get(int k1) const { return has_attr(bits_, K_, k1); }
    int count() const { return __builtin_popcount(bits_); }

    std::string render() const {
        std::string s(static_cast<size_t>(K_), '0');
        for (int k = 1; k <= K_; ++k)
            if (get(k)) s[static_cast<size_t>(k - 1)] = '1';
        return s;
    }

    friend bool operator==(const AttributePattern& a, const AttributePattern& b) {
        return a.K_ == b.K_ && a.bits_ == b.bits_;
    }
    friend bool operator<(const AttributePattern& a, const AttributePattern& b) { return a.bits_ < b.bits_; }

private:
    int K_;
    PatternBits bits_;
};

inline std::string render_bits(int K, PatternBits bits) { return AttributePattern(K, bits).render(); }

// An ordered set of distinct patterns.  Canonical order is ascending by
// integer value (alpha_1 most significant), which matches the order the
// construction routines emit.
class PatternSet {
public:
    PatternSet() : K_(0) {}
    PatternSet(int K, std::vector<PatternBits> patterns, bool sort_canonical = true)
        : K_(K), patterns_(std::move(patterns)) {
        if (K < 1 || K > kMaxPatternBits) throw IndexError("pattern set K out of range");
        if (sort_canonical) std::sort(patterns_.begin(), patterns_.end());
        for (size_t i = 0; i + 1 < patterns_.size(); ++i)
            if (patterns_[i] == patterns_[i + 1]) throw IndexError("duplicate pattern in set");
        for (PatternBits b : patterns_)
            if (K < kMaxPatternBits && (b >> K) != 0) throw IndexError("pattern bits exceed K");
    }

    static PatternSet full(int K) {
        if (K < 1 || K > kMaxPatternBits) throw CapacityError("K out of range for full pattern set");
        std::vector<PatternBits> v(static_cast<size_t>(1) << K);
        for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<PatternBits>(i);
        return PatternSet(K, std::move(v), false);
    }

    int K() const { return K_; }
    size_t size() const { return patterns_.size(); }
    bool empty() const { return patterns_.empty(); }
    PatternBits operator[](size_t i) const { return patterns_[i]; }
    const std::vector<PatternBits>& patterns() const { return patterns_; }

    bool contains(PatternBits b) const {
        return std::binary_search(patterns_.begin(), patterns_.end(), b);
    }

    // index of pattern b, or -1
    long index_of(PatternBits b) const {
        auto it = std::lower_bound(patterns_.begin(), patterns_.end(), b);
        if (it == patterns_.end() || *it != b) return -1;
        return it - patterns_.begin();
    }

    bool is_subset_of(const PatternSet& other) const {
        for (PatternBits b : patterns_)
            if (!other.contains(b)) return false;
        return true;
    }

    PatternSet complement() const {  // {0,1}^K minus this set
        std::vector<PatternBits> out;
        const PatternBits n = PatternBits{1} << K_;
        out.reserve(n - patterns_.size());
        size_t pos = 0;
        for (PatternBits b = 0; b < n; ++b) {
            if (pos < patterns_.size() && patterns_[pos] == b) {
                ++pos;
            } else {
                out.push_back(b);
            }
        }
        return PatternSet(K_, std::move(out), false);
    }

    friend bool operator==(const PatternSet& a, const PatternSet& b) {
        return a.K_ == b.K_ && a.patterns_ == b.patterns_;
    }

private:
    int K_;
    std::vector<PatternBits> patterns_;  // ascending
};

}  // namespace lcbn
