#include "lcbn/dataset.hpp"

namespace lcbn {

void Dataset::index_observed() {
    row_offset_.assign(static_cast<size_t>(n_) + 1, 0);
    obs_codes_.clear();
    obs_codes_.reserve(cells_.size());
    for (int i = 0; i < n_; ++i) {
        row_offset_[static_cast<size_t>(i)] = static_cast<std::uint32_t>(obs_codes_.size());
        for (int j = 0; j < j_; ++j) {
            const std::int8_t c = at(i, j);
            if (c != kMissing)
                obs_codes_.push_back((static_cast<std::uint32_t>(j) << 1) | static_cast<std::uint32_t>(c));
        }
    }
    row_offset_[static_cast<size_t>(n_)] = static_cast<std::uint32_t>(obs_codes_.size());
}

std::vector<int> Dataset::all_missing_rows() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i)
        if (row_begin(i) == row_end(i)) out.push_back(i + 1);
    return out;
}

}  // namespace lcbn
