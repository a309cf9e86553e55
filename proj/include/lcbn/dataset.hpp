#pragma once

#include <cstdint>
#include <vector>

#include "lcbn/errors.hpp"

namespace lcbn {

// N x J response matrix with entries 0, 1, or missing (-1).  The CSV loader
// additionally rejects rows with no observed cell; in-memory construction
// allows them so posterior computations on degenerate rows stay testable.
class Dataset {
public:
    static constexpr std::int8_t kMissing = -1;

    Dataset() : n_(0), j_(0) {}
    Dataset(int n, int j, std::vector<std::int8_t> cells) : n_(n), j_(j), cells_(std::move(cells)) {
        if (n < 1 || j < 1) throw InputError("dataset needs at least one row and one column");
        if (cells_.size() != static_cast<size_t>(n) * static_cast<size_t>(j))
            throw InputError("dataset cell count mismatch");
        for (std::int8_t c : cells_)
            if (c != 0 && c != 1 && c != kMissing) throw InputError("dataset cell outside {0,1,missing}");
        index_observed();
    }

    int N() const { return n_; }
    int J() const { return j_; }

    std::int8_t at(int i0, int j0) const { return cells_[static_cast<size_t>(i0) * j_ + j0]; }
    bool observed(int i0, int j0) const { return at(i0, j0) != kMissing; }

    // per-row observed cells, encoded (item index << 1) | response
    const std::vector<std::uint32_t>& obs_codes() const { return obs_codes_; }
    std::uint32_t row_begin(int i0) const { return row_offset_[static_cast<size_t>(i0)]; }
    std::uint32_t row_end(int i0) const { return row_offset_[static_cast<size_t>(i0) + 1]; }

    size_t observed_count() const { return obs_codes_.size(); }
    std::vector<int> all_missing_rows() const;  // 1-based

private:
    void index_observed();

    int n_, j_;
    std::vector<std::int8_t> cells_;
    std::vector<std::uint32_t> obs_codes_;
    std::vector<std::uint32_t> row_offset_;
};

}  // namespace lcbn
