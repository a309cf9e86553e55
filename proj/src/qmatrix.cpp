#include "lcbn/qmatrix.hpp"

#include <algorithm>

#include "lcbn/errors.hpp"

namespace lcbn {

QMatrix::QMatrix(int J, int K, std::vector<PatternBits> rows) : J_(J), K_(K), rows_(std::move(rows)) {
    if (K < 1 || K > kMaxPatternBits) throw IndexError("Q-matrix K out of range");
    if (J < 1) throw IndexError("Q-matrix needs at least one row");
    if (rows_.size() != static_cast<size_t>(J)) throw IndexError("Q-matrix row count mismatch");
    for (PatternBits r : rows_)
        if (K < kMaxPatternBits && (r >> K) != 0) throw IndexError("Q-matrix row has bits beyond K");
}

std::vector<int> QMatrix::zero_rows() const {
    std::vector<int> out;
    for (int j = 1; j <= J_; ++j)
        if (rows_[static_cast<size_t>(j - 1)] == 0) out.push_back(j);
    return out;
}

int QMatrix::column_count(int k1) const {
    int n = 0;
    for (PatternBits r : rows_) n += has_attr(r, K_, k1) ? 1 : 0;
    return n;
}

PatternBits sparsify_row(PatternBits row, const Hierarchy& h) {
    const int K = h.K();
    PatternBits out = row;
    PatternBits rest = row;
    while (rest) {
        const int bit = __builtin_ctz(rest);
        rest &= rest - 1;
        const int k1 = K - bit;
        // clear k when some other required attribute is a descendant of k
        PatternBits others = row & ~attr_bit(K, k1);
        while (others) {
            const int obit = __builtin_ctz(others);
            others &= others - 1;
            if (h.reaches(k1, K - obit)) {
                out &= ~attr_bit(K, k1);
                break;
            }
        }
    }
    return out;
}

QMatrix sparsify_q(const QMatrix& q, const Hierarchy& h) {
    if (q.K() != h.K()) throw IndexError("Q-matrix and hierarchy disagree on K");
    std::vector<PatternBits> rows;
    rows.reserve(static_cast<size_t>(q.J()));
    for (PatternBits r : q.rows()) rows.push_back(sparsify_row(r, h));
    QMatrix out(q.J(), q.K(), std::move(rows));
    out.set_attribute_names(q.attribute_names());
    return out;
}

std::pair<QMatrix, Hierarchy> merge_attributes(const QMatrix& q, const Hierarchy& h,
                                               const std::vector<std::vector<int>>& groups) {
    const int K = h.K();
    if (q.K() != K) throw IndexError("Q-matrix and hierarchy disagree on K");

    std::vector<int> group_of(static_cast<size_t>(K) + 1, 0);
    for (size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw IndexError("empty attribute group");
        for (int k : groups[g]) {
            if (k < 1 || k > K) throw IndexError("group member outside [1,K]: " + std::to_string(k));
            if (group_of[static_cast<size_t>(k)] != 0)
                throw IndexError("attribute " + std::to_string(k) + " appears in two groups");
            group_of[static_cast<size_t>(k)] = static_cast<int>(g) + 1;
        }
    }
    for (int k = 1; k <= K; ++k)
        if (group_of[static_cast<size_t>(k)] == 0)
            throw IndexError("attribute " + std::to_string(k) + " missing from the partition");

    // members of one group must be totally ordered under the closure
    for (const auto& grp : groups)
        for (size_t a = 0; a < grp.size(); ++a)
            for (size_t b = a + 1; b < grp.size(); ++b)
                if (!h.reaches(grp[a], grp[b]) && !h.reaches(grp[b], grp[a]))
                    throw IndexError("group members " + std::to_string(grp[a]) + " and " +
                                     std::to_string(grp[b]) + " are not chain-connected in the hierarchy");

    const int K2 = static_cast<int>(groups.size());
    std::vector<std::pair<int, int>> edges;
    for (auto [k, l] : h.closure_edges()) {
        const int gk = group_of[static_cast<size_t>(k)];
        const int gl = group_of[static_cast<size_t>(l)];
        if (gk != gl) edges.emplace_back(gk, gl);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [a, b] : edges)
        for (auto [c, d] : edges)
            if (a == d && b == c)
                throw CycleError("merging groups " + std::to_string(a) + " and " + std::to_string(b) +
                                 " creates a cycle");
    Hierarchy h2 = build_hierarchy(K2, edges);  // also rejects longer cycles

    std::vector<PatternBits> rows;
    rows.reserve(static_cast<size_t>(q.J()));
    for (PatternBits r : q.rows()) {
        PatternBits nr = 0;
        for (int g = 1; g <= K2; ++g)
            for (int k : groups[static_cast<size_t>(g - 1)])
                if (has_attr(r, K, k)) nr |= attr_bit(K2, g);
        rows.push_back(nr);
    }
    return {QMatrix(q.J(), K2, std::move(rows)), h2};
}

}  // namespace lcbn
