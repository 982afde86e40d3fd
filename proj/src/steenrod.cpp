#include "lamex/steenrod.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include <fmt/format.h>

namespace lamex {

std::string Milnor::str() const
{
    int k = NXI;
    while (k > 0 && r[k - 1] == 0)
        --k;
    if (k == 0)
        return "Sq()";
    std::string s = "Sq(";
    for (int i = 0; i < k; ++i)
        s += fmt::format("{}{}", i ? "," : "", r[i]);
    return s + ")";
}

namespace {
    std::shared_mutex g_basis_mx;
    std::unordered_map<int, std::vector<Milnor>> g_basis;

    void enumerate(int slot, int remaining, Milnor& cur, std::vector<Milnor>& out)
    {
        if (slot < 0) {
            if (remaining == 0)
                out.push_back(cur);
            return;
        }
        int w = (1 << (slot + 1)) - 1;
        if (slot == 0) {
            cur.r[0] = uint16_t(remaining);
            out.push_back(cur);
            cur.r[0] = 0;
            return;
        }
        for (int v = 0; v * w <= remaining; ++v) {
            cur.r[slot] = uint16_t(v);
            enumerate(slot - 1, remaining - v * w, cur, out);
        }
        cur.r[slot] = 0;
    }
}

const std::vector<Milnor>& milnor_basis(int d)
{
    if (d < 0)
        throw ComputeError("milnor_basis: negative degree");
    {
        std::shared_lock lk(g_basis_mx);
        auto it = g_basis.find(d);
        if (it != g_basis.end())
            return it->second;
    }
    std::vector<Milnor> out;
    Milnor cur;
    int top = 0;
    while (top + 1 < Milnor::NXI && ((1 << (top + 2)) - 1) <= d)
        ++top;
    enumerate(top, d, cur, out);
    std::sort(out.begin(), out.end());
    std::unique_lock lk(g_basis_mx);
    return g_basis.emplace(d, std::move(out)).first->second;
}

int milnor_dim(int d)
{
    return int(milnor_basis(d).size());
}

size_t milnor_index(const Milnor& m)
{
    const auto& basis = milnor_basis(m.degree());
    auto it = std::lower_bound(basis.begin(), basis.end(), m);
    if (it == basis.end() || !(*it == m))
        throw ComputeError("milnor_index: element not in basis");
    return size_t(it - basis.begin());
}

bool multinomial_odd(const std::vector<int>& parts)
{
    int total = 0;
    for (int p : parts) {
        if (p < 0 || (total & p))
            return false;
        total |= p;
    }
    return true;
}

namespace {
    /* Milnor product by matrix enumeration (p = 2): matrices X = (x_{ij}) with
     * row sums Σ_j 2^j x_{ij} = r_i (i >= 1), column sums Σ_i x_{ij} = s_j
     * (j >= 1); odd multinomial on each anti-diagonal; T_n = Σ_{i+j=n} x_{ij}. */
    struct MulCtx {
        int m, n;                       // rows (lhs length), cols (rhs length)
        std::array<int, Milnor::NXI + 1> rrem;  // remaining r_i
        std::array<int, Milnor::NXI + 1> srem;  // remaining s_j
        std::array<std::array<int, Milnor::NXI + 1>, Milnor::NXI + 1> x;
        std::vector<Milnor> out;

        void emit()
        {
            for (int i = 1; i <= m; ++i)
                x[i][0] = rrem[i];
            for (int j = 1; j <= n; ++j)
                x[0][j] = srem[j];
            Milnor t;
            for (int d = 1; d <= m + n; ++d) {
                int total = 0, sum = 0;
                for (int i = std::max(0, d - n); i <= std::min(d, m); ++i) {
                    int v = x[i][d - i];
                    if (total & v)
                        return;  // even multinomial
                    total |= v;
                    sum += v;
                }
                if (d - 1 < Milnor::NXI)
                    t.r[d - 1] = uint16_t(sum);
                else if (sum)
                    throw ComputeError("milnor_mul: product degree exceeds table");
            }
            out.push_back(t);
        }

        void rec(int i, int j)
        {
            if (i > m) {
                emit();
                return;
            }
            int ni = j == n ? i + 1 : i;
            int nj = j == n ? 1 : j + 1;
            int cap = std::min(rrem[i] >> j, srem[j]);
            for (int v = 0; v <= cap; ++v) {
                rrem[i] -= v << j;
                srem[j] -= v;
                x[i][j] = v;
                rec(ni, nj);
                rrem[i] += v << j;
                srem[j] += v;
            }
            x[i][j] = 0;
        }
    };

    struct PairHash {
        size_t operator()(const std::pair<Milnor, Milnor>& p) const
        {
            size_t h = 1469598103934665603ull;
            auto mix = [&](const Milnor& m) {
                for (auto v : m.r) {
                    h ^= v;
                    h *= 1099511628211ull;
                }
            };
            mix(p.first);
            mix(p.second);
            return h;
        }
    };

    std::shared_mutex g_mul_mx;
    std::unordered_map<std::pair<Milnor, Milnor>, std::vector<Milnor>, PairHash> g_mul;
}

const std::vector<Milnor>& milnor_mul(const Milnor& a, const Milnor& b)
{
    std::pair<Milnor, Milnor> key{a, b};
    {
        std::shared_lock lk(g_mul_mx);
        auto it = g_mul.find(key);
        if (it != g_mul.end())
            return it->second;
    }
    MulCtx ctx;
    ctx.m = 0;
    ctx.n = 0;
    for (int i = 0; i < Milnor::NXI; ++i) {
        ctx.rrem[i + 1] = a.r[i];
        ctx.srem[i + 1] = b.r[i];
        if (a.r[i])
            ctx.m = i + 1;
        if (b.r[i])
            ctx.n = i + 1;
    }
    for (auto& row : ctx.x)
        row.fill(0);
    if (ctx.m == 0 || ctx.n == 0) {
        // unit cases
        ctx.out.push_back(ctx.m == 0 ? b : a);
    } else {
        ctx.rec(1, 1);
    }
    std::sort(ctx.out.begin(), ctx.out.end());
    std::vector<Milnor> result;
    for (size_t i = 0; i < ctx.out.size();) {
        size_t j = i + 1;
        while (j < ctx.out.size() && ctx.out[j] == ctx.out[i])
            ++j;
        if ((j - i) & 1)
            result.push_back(ctx.out[i]);
        i = j;
    }
    std::unique_lock lk(g_mul_mx);
    return g_mul.emplace(std::move(key), std::move(result)).first->second;
}

CellModule::CellModule(const ComplexSpec& spec) : spec_(spec)
{
    spec_.validate();
    if (spec_.kind == ComplexKind::Cells)
        verify_module_axioms();
}

bool CellModule::has_cell(int c) const
{
    switch (spec_.kind) {
        case ComplexKind::Sphere: return c == spec_.shift;
        case ComplexKind::Stunted:
            return c >= spec_.lower && (spec_.upper < 0 || c <= spec_.upper);
        case ComplexKind::Cells:
            return std::binary_search(spec_.cells.begin(), spec_.cells.end(), c);
    }
    return false;
}

std::vector<int> CellModule::cells_upto(int tmax) const
{
    std::vector<int> out;
    switch (spec_.kind) {
        case ComplexKind::Sphere:
            if (spec_.shift <= tmax)
                out.push_back(spec_.shift);
            break;
        case ComplexKind::Stunted: {
            int hi = spec_.upper < 0 ? tmax : std::min(spec_.upper, tmax);
            for (int c = spec_.lower; c <= hi; ++c)
                out.push_back(c);
            break;
        }
        case ComplexKind::Cells:
            for (int c : spec_.cells)
                if (c <= tmax)
                    out.push_back(c);
            break;
    }
    return out;
}

bool CellModule::act(const Milnor& m, int c) const
{
    if (m.is_unit())
        return true;
    if (sphere_like())
        return false;
    int d = m.degree();
    if (!has_cell(c + d))
        return false;
    // Sq(R)·x^c: multinomial(c - Σr_i, r_1, r_2, ...) with no binary carries
    std::vector<int> parts;
    int k0 = c;
    for (int i = 0; i < Milnor::NXI; ++i) {
        k0 -= int(m.r[i]);
        if (m.r[i])
            parts.push_back(int(m.r[i]));
    }
    if (k0 < 0)
        return false;
    parts.push_back(k0);
    return multinomial_odd(parts);
}

std::vector<int> CellModule::min_generators(int d) const
{
    // generators = cells not hit by any positive-degree action
    std::vector<int> out;
    if (!has_cell(d))
        return out;
    if (sphere_like()) {
        out.push_back(d);
        return out;
    }
    for (int c : cells_upto(d - 1)) {
        for (const Milnor& m : milnor_basis(d - c))
            if (act(m, c))
                return out;  // x^d is decomposable
    }
    out.push_back(d);
    return out;
}

void CellModule::verify_module_axioms() const
{
    // (a·b)·x = a·(b·x) for all Milnor pairs within the cell span; rejects
    // cell selections that are not genuine subquotients of the projective
    // space module
    int lo = spec_.cells.front(), hi = spec_.cells.back();
    int span = hi - lo;
    for (int c : spec_.cells)
        for (int da = 1; da <= span; ++da)
            for (int db = 1; da + db <= hi - c; ++db) {
                for (const Milnor& a : milnor_basis(da))
                    for (const Milnor& b : milnor_basis(db)) {
                        bool rhs = act(b, c) && act(a, c + db);
                        bool lhs = false;
                        for (const Milnor& ab : milnor_mul(a, b))
                            if (act(ab, c))
                                lhs = !lhs;
                        if (lhs != rhs)
                            throw ConfigError(fmt::format(
                                "cell selection is not an A-module: ({} of deg {})·({} of deg {}) "
                                "on cell {} disagrees",
                                a.str(), da, b.str(), db, c));
                    }
            }
}

}  // namespace lamex
