#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcbn/hierarchy.hpp"
#include "lcbn/pattern.hpp"
#include "lcbn/qmatrix.hpp"

namespace lcbn {

// J x |A| ideal-response matrix: entry (j, alpha) is 1 when alpha dominates
// the requirement row q_j.
struct GammaMatrix {
    int J = 0;
    PatternSet patterns;
    std::vector<std::uint8_t> values;  // row-major J x |A|

    std::uint8_t at(int j1, size_t col) const {
        return values[static_cast<size_t>(j1 - 1) * patterns.size() + col];
    }
};

GammaMatrix build_gamma(const QMatrix& q, const PatternSet& a);

enum class Verdict { Pass, Fail, Unknown };
const char* to_string(Verdict v);

struct ConditionResult {
    Verdict verdict = Verdict::Unknown;
    std::string witness;  // found certificate on pass, counterexample on fail
};

struct ConditionReport {
    std::string check;
    std::vector<std::pair<std::string, ConditionResult>> conditions;
    long candidates_examined = 0;

    Verdict overall() const;
    const ConditionResult& condition(const std::string& name) const;
};

// Strict identifiability of the DINA measurement under a hierarchy:
//   A. some K rows of Q sparsify to the identity (one basis row per attribute)
//   B. sparsified measurement counts by role: intermediate >= 1,
//      ancestor and leaf >= 2, singleton >= 3
//   C. for every singleton pair, the columns of Q outside the chosen basis
//      block differ (re-tried over alternative basis choices up to budget)
ConditionReport check_dina_strict(const QMatrix& q, const Hierarchy& h, long budget = 1000000);

// Minimal condition under a linear chain: ancestor and leaf each measured at
// least twice in the sparsified Q.  NotLinearError when h is not a chain.
ConditionReport check_linear_necessary(const QMatrix& q, const Hierarchy& h);

// Strict identifiability from the constraint matrix alone:
//   A. two disjoint item sets whose Gamma blocks both separate all patterns
//      and induce the same partial order
//   B. every comparable pattern pair is separated by an item outside both
//   C. no Gamma column over A equals a column over the complement
// Existential searches are budgeted; exceeding the budget yields Unknown.
ConditionReport check_slam_strict(const GammaMatrix& gamma, const GammaMatrix& gamma_complement,
                                  long budget = 1000000);

// Generic-identifiability variant: condition A may be met after flipping
// some zero entries of the candidate blocks to one; separation (B) is then
// checked against the original Gamma outside the blocks.
ConditionReport check_generic(const GammaMatrix& gamma, const GammaMatrix& gamma_complement,
                              long budget = 1000000);

}  // namespace lcbn
