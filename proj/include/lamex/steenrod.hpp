#pragma once

#include "lamex/common.hpp"
#include "lamex/complexes.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

namespace lamex {

/* Milnor basis element Sq(r_1, ..., r_k) of the mod-2 Steenrod algebra. */
struct Milnor {
    static constexpr int NXI = 8;  // ξ_1..ξ_8, degrees 2^i - 1
    std::array<uint16_t, NXI> r{};

    int degree() const
    {
        int d = 0;
        for (int i = 0; i < NXI; ++i)
            d += int(r[i]) * ((1 << (i + 1)) - 1);
        return d;
    }
    bool is_unit() const
    {
        for (auto v : r)
            if (v)
                return false;
        return true;
    }
    static Milnor sq(int k)
    {
        Milnor m;
        m.r[0] = uint16_t(k);
        return m;
    }
    auto operator<=>(const Milnor&) const = default;
    std::string str() const;
};

/* Milnor basis of degree d, deterministic order */
const std::vector<Milnor>& milnor_basis(int d);
int milnor_dim(int d);
/* index in milnor_basis(degree) */
size_t milnor_index(const Milnor& m);

/* GF(2) product in the Milnor basis (sorted, duplicate-free); memoized */
const std::vector<Milnor>& milnor_mul(const Milnor& a, const Milnor& b);

/* no-carry multinomial: odd iff the parts have pairwise disjoint binary digits */
bool multinomial_odd(const std::vector<int>& parts);

/* A left A-module with one basis element x^c per cell, action derived from the
 * projective-space formula Sq(R)·x^c = [multinomial] x^{c+|R|} restricted to
 * the retained cells (sub/quotient conventions). The sphere module is the
 * one-cell special case with trivial positive action. */
class CellModule {
public:
    explicit CellModule(const ComplexSpec& spec);

    const ComplexSpec& spec() const { return spec_; }
    std::string id() const { return spec_.id(); }
    bool sphere_like() const { return spec_.kind == ComplexKind::Sphere; }
    bool has_cell(int c) const;
    /* cells in ascending order with dimension <= tmax */
    std::vector<int> cells_upto(int tmax) const;
    /* Sq(R)·x^c = x^{c+|R|} (true) or 0 (false) */
    bool act(const Milnor& m, int c) const;
    /* minimal module generators in degree d (0 or 1 cells for these modules) */
    std::vector<int> min_generators(int d) const;

private:
    ComplexSpec spec_;
    void verify_module_axioms() const;
};

}  // namespace lamex
