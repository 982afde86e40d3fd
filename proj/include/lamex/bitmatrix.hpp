#pragma once

#include "lamex/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lamex::f2 {

/* Dense bit vector over GF(2). */
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    size_t size() const { return n_; }
    size_t words() const { return w_.size(); }
    uint64_t* data() { return w_.data(); }
    const uint64_t* data() const { return w_.data(); }

    bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
    void set(size_t i, bool v = true)
    {
        if (v)
            w_[i >> 6] |= uint64_t(1) << (i & 63);
        else
            w_[i >> 6] &= ~(uint64_t(1) << (i & 63));
    }
    void flip(size_t i) { w_[i >> 6] ^= uint64_t(1) << (i & 63); }

    BitVec& operator^=(const BitVec& o);
    bool is_zero() const;
    size_t count() const;
    /* index of first set bit, or size() when zero */
    size_t first_set() const;
    friend bool operator==(const BitVec&, const BitVec&) = default;

    std::vector<uint32_t> support() const;
    static BitVec from_support(size_t n, const std::vector<uint32_t>& idx);

private:
    size_t n_ = 0;
    std::vector<uint64_t> w_;
};

/* Row-major bit-packed GF(2) matrix. Padding bits past `cols` stay zero. */
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), w_(rows * ((cols + 63) / 64), 0)
    {
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t words_per_row() const { return wpr_; }

    uint64_t* row(size_t i) { return w_.data() + i * wpr_; }
    const uint64_t* row(size_t i) const { return w_.data() + i * wpr_; }

    bool get(size_t i, size_t j) const { return (row(i)[j >> 6] >> (j & 63)) & 1; }
    void set(size_t i, size_t j, bool v = true)
    {
        if (v)
            row(i)[j >> 6] |= uint64_t(1) << (j & 63);
        else
            row(i)[j >> 6] &= ~(uint64_t(1) << (j & 63));
    }
    void flip(size_t i, size_t j) { row(i)[j >> 6] ^= uint64_t(1) << (j & 63); }

    void xor_rows(size_t dst, size_t src);
    void swap_rows(size_t a, size_t b);
    /* bits [from, from+len) of row i as a BitVec */
    BitVec extract(size_t i, size_t from, size_t len) const;
    bool row_is_zero(size_t i) const;
    BitVec row_vec(size_t i) const;
    void set_row(size_t i, const BitVec& v);
    void append_row(const BitVec& v);

    BitMatrix transposed() const;

    /* In-place reduction to reduced row echelon form (deterministic:
     * pivots are the first nonzero columns in order). Returns pivot
     * columns. M4R block elimination is used above a size threshold
     * unless disabled via set_m4r_enabled(false). */
    std::vector<uint32_t> rref();
    /* RREF with pivot columns restricted to [0, pivot_limit); trailing
     * columns are carried along (augmented elimination). */
    std::vector<uint32_t> rref_left(size_t pivot_limit);

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

    static void set_m4r_enabled(bool on);
    static bool m4r_enabled();

    /* Binary cache format: magic "F2MX", u32 version, u64 rows, u64 cols,
     * payload words little-endian. */
    void save(std::ostream& os) const;
    static BitMatrix load(std::istream& is);

private:
    size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<uint64_t> w_;
    std::vector<uint32_t> rref_schoolbook();
};

size_t rank(BitMatrix m);

/* Subspace of F_2^n held as a reduced-row-echelon basis (unique per span). */
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(size_t ambient) : ambient_(ambient) {}
    /* span of the rows of m */
    static Subspace row_space(BitMatrix m);
    /* adopt rows already in reduced row echelon form */
    static Subspace from_rref(BitMatrix m);

    size_t ambient() const { return ambient_; }
    size_t dim() const { return basis_.rows(); }
    const BitMatrix& basis() const { return basis_; }
    const std::vector<uint32_t>& pivots() const { return pivots_; }

    /* residual of v after reduction against the basis (canonical coset rep) */
    BitVec reduce(BitVec v) const;
    bool contains(const BitVec& v) const { return reduce(v).is_zero(); }
    /* insert v if independent; true when the dimension grew */
    bool insert(BitVec v);

    friend bool operator==(const Subspace&, const Subspace&) = default;

private:
    size_t ambient_ = 0;
    BitMatrix basis_;           // RREF rows, sorted by pivot
    std::vector<uint32_t> pivots_;
    void resort();
};

/* Right null space {x : m x = 0}; dim = cols - rank. */
Subspace kernel(const BitMatrix& m);

/* Some x with m x = b (column convention, |b| = rows), or nullopt. */
std::optional<BitVec> solve(const BitMatrix& m, const BitVec& b);

/* matrix product (rows(a) x cols(b)); M4R above threshold unless disabled */
BitMatrix mul(const BitMatrix& a, const BitMatrix& b);

}  // namespace lamex::f2
