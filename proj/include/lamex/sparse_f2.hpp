#pragma once

#include "lamex/common.hpp"

#include <cstdint>
#include <vector>

namespace lamex::f2 {

/* Sparse GF(2) vector: strictly increasing column indices. */
using SparseVec = std::vector<uint32_t>;

/* c = a ^ b (symmetric difference of sorted index lists) */
SparseVec sparse_xor(const SparseVec& a, const SparseVec& b);

/* Incremental sparse echelon basis keyed on the *largest* index of each row
 * (the Lambda differential is close to a perfect matching in this order, so
 * fill-in stays low). Supports rank accumulation and membership reduction.
 * Rows are stored verbatim; total stored entries are bounded by `budget`
 * (ResourceLimit beyond it). */
class SparseEchelon {
public:
    explicit SparseEchelon(size_t cols, size_t budget = size_t(1) << 28);

    /* reduce v against the basis; returns the residual */
    SparseVec reduce(SparseVec v) const;
    /* insert v (reducing first); returns true if the rank grew */
    bool insert(SparseVec v);

    size_t rank() const { return rows_.size(); }
    size_t cols() const { return cols_; }
    size_t stored_entries() const { return stored_; }
    bool contains(const SparseVec& v) const { return reduce(v).empty(); }

private:
    size_t cols_;
    size_t budget_;
    size_t stored_ = 0;
    std::vector<SparseVec> rows_;
    std::vector<int32_t> pivot_row_;  // by column; -1 = none
};

}  // namespace lamex::f2
