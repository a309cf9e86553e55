#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcbn/hierarchy.hpp"
#include "lcbn/pattern.hpp"

namespace lcbn {

// J x K binary design matrix.  Row j is the skill requirement profile of
// item j, stored as a pattern mask (attribute 1 at the most significant
// position, same convention as AttributePattern).
class QMatrix {
public:
    QMatrix() : J_(0), K_(0) {}
    QMatrix(int J, int K, std::vector<PatternBits> rows);

    int J() const { return J_; }
    int K() const { return K_; }
    PatternBits row(int j1) const { return rows_[static_cast<size_t>(j1 - 1)]; }
    const std::vector<PatternBits>& rows() const { return rows_; }
    bool entry(int j1, int k1) const { return has_attr(rows_[static_cast<size_t>(j1 - 1)], K_, k1); }

    // 1-based indices of all-zero rows (items measuring no attribute);
    // loaders warn about these but the matrix stays usable
    std::vector<int> zero_rows() const;

    // items measuring attribute k
    int column_count(int k1) const;

    const std::vector<std::string>& attribute_names() const { return names_; }
    void set_attribute_names(std::vector<std::string> names) { names_ = std::move(names); }

    friend bool operator==(const QMatrix& a, const QMatrix& b) {
        return a.J_ == b.J_ && a.K_ == b.K_ && a.rows_ == b.rows_;
    }

private:
    int J_, K_;
    std::vector<PatternBits> rows_;
    std::vector<std::string> names_;
};

// Drops redundant requirements: q_{j,k} is cleared whenever the item also
// requires a descendant of k under the hierarchy closure.  On permissible
// patterns the sparsified row carries the same constraint as the original.
QMatrix sparsify_q(const QMatrix& q, const Hierarchy& h);
PatternBits sparsify_row(PatternBits row, const Hierarchy& h);

// Merges attribute groups: the new Q gets the elementwise OR of the member
// columns, and the quotient hierarchy inherits every between-group edge.
// Each group must form a chain under the closure (totally ordered), and the
// quotient must stay acyclic.
std::pair<QMatrix, Hierarchy> merge_attributes(const QMatrix& q, const Hierarchy& h,
                                               const std::vector<std::vector<int>>& groups);

}  // namespace lcbn
