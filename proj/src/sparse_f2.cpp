#include "lamex/sparse_f2.hpp"

#include <algorithm>

namespace lamex::f2 {

SparseVec sparse_xor(const SparseVec& a, const SparseVec& b)
{
    SparseVec out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            out.push_back(a[i++]);
        else if (a[i] > b[j])
            out.push_back(b[j++]);
        else {
            ++i;
            ++j;
        }
    }
    out.insert(out.end(), a.begin() + i, a.end());
    out.insert(out.end(), b.begin() + j, b.end());
    return out;
}

SparseEchelon::SparseEchelon(size_t cols, size_t budget)
    : cols_(cols), budget_(budget), pivot_row_(cols, -1)
{
}

SparseVec SparseEchelon::reduce(SparseVec v) const
{
    while (!v.empty()) {
        int32_t r = pivot_row_[v.back()];
        if (r < 0)
            return v;
        v = sparse_xor(v, rows_[size_t(r)]);
    }
    return v;
}

bool SparseEchelon::insert(SparseVec v)
{
    v = reduce(std::move(v));
    if (v.empty())
        return false;
    stored_ += v.size();
    if (stored_ > budget_)
        throw ResourceLimit("SparseEchelon: entry budget exceeded");
    pivot_row_[v.back()] = int32_t(rows_.size());
    rows_.push_back(std::move(v));
    return true;
}

}  // namespace lamex::f2
