#include "lamex/bitmatrix.hpp"

#include "lamex/f2_kernels.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace lamex::f2 {

BitVec& BitVec::operator^=(const BitVec& o)
{
    xor_into(w_.data(), o.w_.data(), w_.size());
    return *this;
}

bool BitVec::is_zero() const
{
    return is_zero_words(w_.data(), w_.size());
}

size_t BitVec::count() const
{
    return popcount_words(w_.data(), w_.size());
}

size_t BitVec::first_set() const
{
    for (size_t k = 0; k < w_.size(); ++k)
        if (w_[k])
            return (k << 6) + static_cast<size_t>(std::countr_zero(w_[k]));
    return n_;
}

std::vector<uint32_t> BitVec::support() const
{
    std::vector<uint32_t> out;
    for (size_t k = 0; k < w_.size(); ++k) {
        uint64_t x = w_[k];
        while (x) {
            out.push_back(uint32_t((k << 6) + std::countr_zero(x)));
            x &= x - 1;
        }
    }
    return out;
}

BitVec BitVec::from_support(size_t n, const std::vector<uint32_t>& idx)
{
    BitVec v(n);
    for (uint32_t i : idx)
        v.flip(i);
    return v;
}

void BitMatrix::xor_rows(size_t dst, size_t src)
{
    xor_into(row(dst), row(src), wpr_);
}

void BitMatrix::swap_rows(size_t a, size_t b)
{
    if (a != b)
        std::swap_ranges(row(a), row(a) + wpr_, row(b));
}

bool BitMatrix::row_is_zero(size_t i) const
{
    return is_zero_words(row(i), wpr_);
}

BitVec BitMatrix::extract(size_t i, size_t from, size_t len) const
{
    BitVec v(len);
    const uint64_t* r = row(i);
    size_t shift = from & 63;
    size_t w0 = from >> 6;
    for (size_t w = 0; w < v.words(); ++w) {
        uint64_t lo = r[w0 + w] >> shift;
        uint64_t hi = (shift && w0 + w + 1 < wpr_) ? r[w0 + w + 1] << (64 - shift) : 0;
        v.data()[w] = lo | hi;
    }
    if (len & 63)
        v.data()[v.words() - 1] &= (uint64_t(1) << (len & 63)) - 1;
    return v;
}

BitVec BitMatrix::row_vec(size_t i) const
{
    BitVec v(cols_);
    std::memcpy(v.data(), row(i), wpr_ * 8);
    return v;
}

void BitMatrix::set_row(size_t i, const BitVec& v)
{
    std::memcpy(row(i), v.data(), wpr_ * 8);
}

void BitMatrix::append_row(const BitVec& v)
{
    w_.resize(w_.size() + wpr_, 0);
    ++rows_;
    if (v.size())
        std::memcpy(row(rows_ - 1), v.data(), wpr_ * 8);
}

BitMatrix BitMatrix::transposed() const
{
    BitMatrix t(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i) {
        const uint64_t* r = row(i);
        for (size_t k = 0; k < wpr_; ++k) {
            uint64_t x = r[k];
            while (x) {
                size_t j = (k << 6) + static_cast<size_t>(std::countr_zero(x));
                t.set(j, i);
                x &= x - 1;
            }
        }
    }
    return t;
}

namespace {
    std::atomic<bool> g_m4r{true};
}

void BitMatrix::set_m4r_enabled(bool on)
{
    g_m4r.store(on);
}

bool BitMatrix::m4r_enabled()
{
    return g_m4r.load();
}

std::vector<uint32_t> BitMatrix::rref_left(size_t pivot_limit)
{
    // strip variant of rref_m4r bounded to the pivot columns; reuse rref by
    // temporarily narrowing would copy, so run the same loops with a limit
    std::vector<uint32_t> pivots;
    size_t r = 0;
    size_t limit = std::min(pivot_limit, cols_);
    if (m4r_enabled() && rows_ >= 256 && limit >= 64) {
        const size_t nstrips = (limit + 63) / 64;
        for (size_t sidx = 0; sidx < nstrips && r < rows_; ++sidx) {
            const size_t word = sidx;
            const size_t c0 = sidx << 6;
            const size_t width = std::min<size_t>(64, limit - c0);
            const uint64_t colmask = width == 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
            struct Piv {
                uint64_t strip;
                int lead;
                uint32_t seed;
                uint64_t mask;
            };
            std::vector<Piv> pv;
            for (size_t i = r; i < rows_ && pv.size() < width; ++i) {
                uint64_t x = row(i)[word] & colmask;
                if (!x)
                    continue;
                uint64_t mask = 0;
                for (auto& p : pv)
                    if ((x >> p.lead) & 1) {
                        x ^= p.strip;
                        mask ^= p.mask;
                    }
                if (!x)
                    continue;
                int lead = std::countr_zero(x);
                mask ^= uint64_t(1) << pv.size();
                for (auto& p : pv)
                    if ((p.strip >> lead) & 1) {
                        p.strip ^= x;
                        p.mask ^= mask;
                    }
                pv.push_back(Piv{x, lead, uint32_t(i), mask});
            }
            if (pv.empty())
                continue;
            std::vector<uint32_t> seeds(pv.size());
            for (size_t j = 0; j < pv.size(); ++j)
                seeds[j] = pv[j].seed;
            std::sort(pv.begin(), pv.end(),
                      [](const Piv& a, const Piv& b) { return a.lead < b.lead; });
            const size_t k = pv.size();
            BitMatrix newpiv(k, cols_);
            for (size_t j = 0; j < k; ++j) {
                uint64_t mask = pv[j].mask;
                while (mask) {
                    size_t ord = static_cast<size_t>(std::countr_zero(mask));
                    xor_into(newpiv.row(j), row(seeds[ord]), wpr_);
                    mask &= mask - 1;
                }
            }
            const size_t nchunks = (k + 7) / 8;
            std::vector<std::vector<uint64_t>> tables(nchunks);
            for (size_t ch = 0; ch < nchunks; ++ch) {
                size_t kk = std::min<size_t>(8, k - ch * 8);
                tables[ch].assign((size_t(1) << kk) * wpr_, 0);
                for (size_t g = 1; g < (size_t(1) << kk); ++g) {
                    size_t bit = static_cast<size_t>(std::countr_zero(g));
                    xor3(tables[ch].data() + g * wpr_,
                         tables[ch].data() + (g ^ (size_t(1) << bit)) * wpr_,
                         newpiv.row(ch * 8 + bit), wpr_);
                }
            }
            std::vector<bool> is_seed(rows_, false);
            for (auto& p : pv)
                is_seed[p.seed] = true;
            for (size_t i = 0; i < rows_; ++i) {
                if (is_seed[i])
                    continue;
                uint64_t bits = row(i)[word] & colmask;
                if (!bits)
                    continue;
                for (size_t ch = 0; ch < nchunks; ++ch) {
                    size_t kk = std::min<size_t>(8, k - ch * 8);
                    size_t id = 0;
                    for (size_t j = 0; j < kk; ++j)
                        id |= size_t((bits >> pv[ch * 8 + j].lead) & 1) << j;
                    if (id)
                        xor_into(row(i), tables[ch].data() + id * wpr_, wpr_);
                }
            }
            std::vector<int32_t> owner(rows_, -1);
            std::vector<size_t> pos(k);
            for (size_t j = 0; j < k; ++j) {
                set_row(pv[j].seed, newpiv.row_vec(j));
                pos[j] = pv[j].seed;
                owner[pos[j]] = int32_t(j);
            }
            for (size_t j = 0; j < k; ++j) {
                size_t target = r + j;
                if (pos[j] == target)
                    continue;
                swap_rows(pos[j], target);
                if (owner[target] >= 0) {
                    size_t o = size_t(owner[target]);
                    pos[o] = pos[j];
                    owner[pos[j]] = int32_t(o);
                } else {
                    owner[pos[j]] = -1;
                }
                owner[target] = int32_t(j);
                pos[j] = target;
            }
            for (size_t j = 0; j < k; ++j)
                pivots.push_back(uint32_t(c0 + size_t(pv[j].lead)));
            r += k;
        }
        return pivots;
    }
    for (size_t c = 0; c < limit && r < rows_; ++c) {
        size_t piv = rows_;
        for (size_t i = r; i < rows_; ++i)
            if (get(i, c)) {
                piv = i;
                break;
            }
        if (piv == rows_)
            continue;
        swap_rows(r, piv);
        for (size_t i = 0; i < rows_; ++i)
            if (i != r && get(i, c))
                xor_rows(i, r);
        pivots.push_back(uint32_t(c));
        ++r;
    }
    return pivots;
}

std::vector<uint32_t> BitMatrix::rref_schoolbook()
{
    std::vector<uint32_t> pivots;
    size_t r = 0;
    for (size_t c = 0; c < cols_ && r < rows_; ++c) {
        size_t piv = rows_;
        for (size_t i = r; i < rows_; ++i)
            if (get(i, c)) {
                piv = i;
                break;
            }
        if (piv == rows_)
            continue;
        swap_rows(r, piv);
        for (size_t i = 0; i < rows_; ++i)
            if (i != r && get(i, c))
                xor_rows(i, r);
        pivots.push_back(uint32_t(c));
        ++r;
    }
    return pivots;
}

std::vector<uint32_t> BitMatrix::rref()
{
    if (m4r_enabled() && rows_ >= 256 && cols_ >= 256)
        return rref_left(cols_);
    return rref_schoolbook();
}

void BitMatrix::save(std::ostream& os) const
{
    const char magic[4] = {'F', '2', 'M', 'X'};
    os.write(magic, 4);
    auto put_u32 = [&](uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i)
            b[i] = (v >> (8 * i)) & 0xff;
        os.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u64 = [&](uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i)
            b[i] = (v >> (8 * i)) & 0xff;
        os.write(reinterpret_cast<char*>(b), 8);
    };
    put_u32(1);
    put_u64(rows_);
    put_u64(cols_);
    for (uint64_t w : w_)
        put_u64(w);
}

BitMatrix BitMatrix::load(std::istream& is)
{
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "F2MX", 4) != 0)
        throw ComputeError("BitMatrix::load: bad magic");
    auto get_u32 = [&]() {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= uint32_t(b[i]) << (8 * i);
        return v;
    };
    auto get_u64 = [&]() {
        unsigned char b[8];
        is.read(reinterpret_cast<char*>(b), 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= uint64_t(b[i]) << (8 * i);
        return v;
    };
    if (get_u32() != 1)
        throw ComputeError("BitMatrix::load: unsupported version");
    uint64_t rows = get_u64(), cols = get_u64();
    BitMatrix m(rows, cols);
    for (size_t i = 0; i < rows * m.words_per_row(); ++i)
        m.w_[i] = get_u64();
    if (!is)
        throw ComputeError("BitMatrix::load: truncated payload");
    return m;
}

size_t rank(BitMatrix m)
{
    return m.rref().size();
}

Subspace Subspace::row_space(BitMatrix m)
{
    Subspace s(m.cols());
    auto pivots = m.rref();
    s.basis_ = BitMatrix(pivots.size(), m.cols());
    for (size_t i = 0; i < pivots.size(); ++i)
        s.basis_.set_row(i, m.row_vec(i));
    s.pivots_ = std::move(pivots);
    return s;
}

Subspace Subspace::from_rref(BitMatrix m)
{
    Subspace s(m.cols());
    s.pivots_.reserve(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) {
        size_t p = m.row_vec(i).first_set();
        if (p >= m.cols() || (i && p <= s.pivots_.back()))
            throw ComputeError("Subspace::from_rref: rows not in echelon order");
        s.pivots_.push_back(uint32_t(p));
    }
    s.basis_ = std::move(m);
    return s;
}

BitVec Subspace::reduce(BitVec v) const
{
    for (size_t i = 0; i < pivots_.size(); ++i)
        if (v.get(pivots_[i]))
            xor_into(v.data(), basis_.row(i), basis_.words_per_row());
    return v;
}

bool Subspace::insert(BitVec v)
{
    v = reduce(std::move(v));
    if (v.is_zero())
        return false;
    uint32_t p = uint32_t(v.first_set());
    for (size_t i = 0; i < pivots_.size(); ++i)
        if (basis_.get(i, p))
            xor_into(basis_.row(i), v.data(), basis_.words_per_row());
    basis_.append_row(v);
    pivots_.push_back(p);
    resort();
    return true;
}

void Subspace::resort()
{
    std::vector<size_t> order(pivots_.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return pivots_[a] < pivots_[b]; });
    BitMatrix nb(pivots_.size(), ambient_);
    std::vector<uint32_t> np(pivots_.size());
    for (size_t i = 0; i < order.size(); ++i) {
        nb.set_row(i, basis_.row_vec(order[i]));
        np[i] = pivots_[order[i]];
    }
    basis_ = std::move(nb);
    pivots_ = std::move(np);
}

Subspace kernel(const BitMatrix& m)
{
    BitMatrix a = m;
    auto pivots = a.rref();
    size_t n = m.cols();
    std::vector<int32_t> pivot_row(n, -1);
    for (size_t i = 0; i < pivots.size(); ++i)
        pivot_row[pivots[i]] = int32_t(i);
    BitMatrix basis(n - pivots.size(), n);
    size_t bi = 0;
    for (size_t c = 0; c < n; ++c) {
        if (pivot_row[c] >= 0)
            continue;
        basis.set(bi, c);
        for (size_t j = 0; j < pivots.size(); ++j)
            if (a.get(j, c))
                basis.set(bi, pivots[j]);
        ++bi;
    }
    return Subspace::row_space(std::move(basis));
}

std::optional<BitVec> solve(const BitMatrix& m, const BitVec& b)
{
    if (b.size() != m.rows())
        throw ComputeError("solve: rhs length mismatch");
    BitMatrix a(m.rows(), m.cols() + 1);
    for (size_t i = 0; i < m.rows(); ++i) {
        std::memcpy(a.row(i), m.row(i), m.words_per_row() * 8);
        if (b.get(i))
            a.set(i, m.cols());
    }
    auto pivots = a.rref();
    BitVec x(m.cols());
    for (size_t i = 0; i < pivots.size(); ++i) {
        if (pivots[i] == m.cols())
            return std::nullopt;
        if (a.get(i, m.cols()))
            x.set(pivots[i]);
    }
    return x;
}

BitMatrix mul(const BitMatrix& a, const BitMatrix& b)
{
    if (a.cols() != b.rows())
        throw ComputeError("mul: shape mismatch");
    BitMatrix c(a.rows(), b.cols());
    bool use_m4r = BitMatrix::m4r_enabled() && a.cols() >= 512 && b.cols() >= 256 && a.rows() >= 64;
    if (!use_m4r) {
        for (size_t i = 0; i < a.rows(); ++i) {
            const uint64_t* ra = a.row(i);
            for (size_t k = 0; k < a.words_per_row(); ++k) {
                uint64_t x = ra[k];
                while (x) {
                    size_t j = (k << 6) + static_cast<size_t>(std::countr_zero(x));
                    xor_into(c.row(i), b.row(j), b.words_per_row());
                    x &= x - 1;
                }
            }
        }
        return c;
    }
    constexpr size_t K = 8;
    size_t wpr = b.words_per_row();
    std::vector<uint64_t> table((size_t(1) << K) * wpr);
    for (size_t blk = 0; blk < a.cols(); blk += K) {
        size_t k = std::min(K, a.cols() - blk);
        size_t entries = size_t(1) << k;
        std::memset(table.data(), 0, entries * wpr * 8);
        for (size_t g = 1; g < entries; ++g) {
            size_t bit = static_cast<size_t>(std::countr_zero(g));
            xor3(table.data() + g * wpr, table.data() + (g ^ (size_t(1) << bit)) * wpr,
                 b.row(blk + bit), wpr);
        }
        for (size_t i = 0; i < a.rows(); ++i) {
            size_t id = 0;
            const uint64_t* ra = a.row(i);
            for (size_t j = 0; j < k; ++j)
                id |= size_t((ra[(blk + j) >> 6] >> ((blk + j) & 63)) & 1) << j;
            if (id)
                xor_into(c.row(i), table.data() + id * wpr, wpr);
        }
    }
    return c;
}

}  // namespace lamex::f2
