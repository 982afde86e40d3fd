#pragma once

#include "lamex/bitmatrix.hpp"
#include "lamex/common.hpp"
#include "lamex/lambda.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lamex {

enum class ComplexKind { Sphere, Stunted, Cells };

/* A cell-filtered cochain complex over the Lambda algebra: the sphere
 * complex, a stunted projective range P_lower^upper, or an explicit list of
 * cells with attaching twists. */
struct ComplexSpec {
    ComplexKind kind = ComplexKind::Sphere;
    int shift = 0;                   // Sphere
    int lower = 1;                   // Stunted
    int upper = -1;                  // Stunted; -1 = infinity
    std::vector<int> cells;          // Cells, ascending dimensions
    /* twist (from -> to): cell-lowering differential contribution; words of
     * homological length 1 and internal degree from-to */
    std::map<std::pair<int, int>, LambdaPolynomial> twists;

    static ComplexSpec sphere(int shift = 0);
    static ComplexSpec stunted(int lower, int upper /* -1 = inf */);
    static ComplexSpec twisted(std::vector<int> cells,
                               std::map<std::pair<int, int>, LambdaPolynomial> twists);

    bool infinite() const { return kind == ComplexKind::Stunted && upper < 0; }
    /* cells carrying basis symbols at bidegree (s,t), descending order */
    std::vector<int> cells_at(int s, int t) const;
    int min_cell() const;
    void validate() const;
    /* canonical content-derived identifier (cache key, chart headers) */
    std::string id() const;

    friend bool operator==(const ComplexSpec&, const ComplexSpec&) = default;
};

/* named complexes from the paper plus the Pn-m / Pn-inf pattern */
ComplexSpec builtin_complex(const std::string& name);
/* structured text format (see README): kind/shift/lower/upper/cells/twist */
ComplexSpec parse_complex_spec(const std::string& text);
ComplexSpec load_complex_spec(const std::string& path);

/* Canonical ordered basis of one bidegree: cells descending, words lex
 * ascending inside a cell. Column index = offset into this ordering. */
struct BasisTable {
    Bidegree bd;
    struct Block {
        int cell;
        size_t offset;
        std::shared_ptr<const LambdaPolynomial> words;
    };
    std::vector<Block> blocks;
    size_t dim = 0;

    /* column of symbol (cell, word); dim when absent */
    size_t index_of(int cell, const LambdaWord& w) const;
    std::pair<int, const LambdaWord*> symbol(size_t col) const;
};

/* memoized basis tables and dimensions */
std::shared_ptr<const BasisTable> make_basis(const ComplexSpec& spec, int s, int t);
/* dimension without enumeration (counting recurrence); saturates at 2^62 */
uint64_t dim_estimate(const ComplexSpec& spec, int s, int t);

/* A GF(2) sum of (cell, word) symbols in one bidegree of one complex.
 * Terms are kept in column order (cell descending, word ascending). */
struct Cochain {
    Bidegree bd;
    std::vector<std::pair<int, LambdaWord>> terms;

    bool zero() const { return terms.empty(); }
    static Cochain from_terms(Bidegree bd, std::vector<std::pair<int, LambdaWord>> terms);
    friend bool operator==(const Cochain&, const Cochain&) = default;
};

Cochain cochain_add(const Cochain& a, const Cochain& b);
std::string cochain_str(const Cochain& c);
f2::BitVec cochain_to_vec(const Cochain& c, const BasisTable& basis);
Cochain vec_to_cochain(const f2::BitVec& v, const BasisTable& basis);
f2::SparseVec cochain_to_sparse(const Cochain& c, const BasisTable& basis);

/* The single differential rule: straighten λ_cell·word, regroup by leading
 * index, drop out-of-range cells (quotient convention). For explicit cell
 * complexes the internal differential plus the registered twists. */
Cochain total_differential(const ComplexSpec& spec, const Cochain& c);
Cochain symbol_differential(const ComplexSpec& spec, int cell, const LambdaWord& w);

/* differential matrix (s,t) -> (s+1,t); rows = source basis */
f2::BitMatrix differential_matrix(const ComplexSpec& spec, int s, int t);

/* right action by a sphere word/polynomial on the tail */
Cochain right_multiply(const ComplexSpec& spec, const Cochain& c, const LambdaPolynomial& x);

/* Chain maps induced by cell-range truncation. */
struct CellRangeMap {
    ComplexSpec src;
    ComplexSpec dst;
    /* terms with cells outside keep-range are dropped; others map verbatim */
    int keep_lo = 0, keep_hi = -1;  // -1 = no upper bound
    Cochain apply(const Cochain& c) const;
    f2::BitMatrix matrix(int s, int t) const;  // src columns -> dst columns
};

/* inclusion of the lower-cell subcomplex [lower, k] into the full complex */
CellRangeMap inclusion_map(const ComplexSpec& spec, int k);
/* projection onto the upper-cell quotient [k, upper] */
CellRangeMap quotient_map(const ComplexSpec& spec, int k);
/* chain-map identity f·d = d·f for all basis symbols at (s,t) */
bool verify_chain_map(const CellRangeMap& f, int s, int t);

/* Transfer chain map: (n; I) -> normalize(λ_n I), degree (+1,+1). */
LambdaPolynomial transfer_chain(const Cochain& c);

/* d² = 0 by evaluation on every basis symbol at (s,t) */
bool check_d_squared(const ComplexSpec& spec, int s, int t);

}  // namespace lamex
