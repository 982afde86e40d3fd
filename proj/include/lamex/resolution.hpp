#pragma once

#include "lamex/bitmatrix.hpp"
#include "lamex/steenrod.hpp"

#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lamex {

/* element of a free module F_s: GF(2) sum of (Milnor, generator index) */
using FreeElt = std::vector<std::pair<Milnor, uint32_t>>;

FreeElt free_add(const FreeElt& a, const FreeElt& b);

struct ResGen {
    int s;
    int t;
    FreeElt dg;  // image in F_{s-1}; for s = 0 a single (unit, cell) entry
};

/* Minimal free resolution of a cell module over the Steenrod algebra,
 * computed degree by degree. dim Ext^{s,t} = number of generators at (s,t). */
class Resolution {
public:
    explicit Resolution(CellModule module) : module_(std::move(module)) {}

    const CellModule& module() const { return module_; }
    std::string id() const { return module_.id(); }

    /* extend the resolution through s <= s_max, t <= t_max */
    void extend(int s_max, int t_max);
    int computed_s() const { return s_done_; }
    int computed_t() const { return t_done_; }

    int ext_dim(int s, int t) const;
    /* generator indices at (s,t) */
    std::vector<uint32_t> gens_at(int s, int t) const;
    const std::vector<ResGen>& gens(int s) const;

    /* basis of F_{s,t}: per generator of degree t' <= t, a block of Milnor
     * basis elements of degree t - t' */
    struct Basis {
        struct Block {
            uint32_t gen;
            int gen_t;
            size_t offset;
            const std::vector<Milnor>* milnor;
        };
        std::vector<Block> blocks;
        size_t dim = 0;
        size_t index_of(const Milnor& m, uint32_t gen) const;
        std::pair<Milnor, uint32_t> decode(size_t col) const;
    };
    Basis basis(int s, int t) const;

    f2::BitVec elt_to_vec(const FreeElt& e, const Basis& basis) const;
    FreeElt vec_to_elt(const f2::BitVec& v, const Basis& basis) const;
    /* differential of an element of F_{s,t} (expanded over Milnor products) */
    FreeElt d_elt(int s, const FreeElt& e) const;

    /* persistent cache (versioned, checksummed) */
    void save(const std::string& path) const;
    bool load(const std::string& path);

    /* Augmented elimination of d_s at internal degree t: image echelon with
     * preimage witnesses plus the kernel of d_s. Heavy; cached with a
     * byte-budget LRU. */
    struct Solver {
        size_t src_dim = 0, dst_dim = 0;
        f2::BitMatrix img;                 // image RREF rows
        f2::BitMatrix wit;                 // matching preimages
        std::vector<uint32_t> pivots;      // pivot columns of img
        f2::BitMatrix kernel_rows;         // kernel basis of d_s (src coords)
        /* x with x·D = v, if any */
        std::optional<f2::BitVec> solve(const f2::BitVec& v) const;
        f2::BitVec reduce(f2::BitVec v) const;  // residue of v mod the image
        size_t bytes() const;
    };
    std::shared_ptr<const Solver> solver(int s, int t);
    void set_solver_budget(size_t bytes);

private:
    CellModule module_;
    std::vector<std::vector<ResGen>> gens_;          // by s
    std::map<std::pair<int, int>, int> dims_;        // (s,t) -> #gens
    int s_done_ = -1;
    int t_done_ = -1;

    mutable std::mutex mx_;
    std::map<std::string, std::shared_ptr<const Solver>> solver_cache_;
    std::list<std::string> solver_lru_;
    size_t solver_bytes_ = 0;
    size_t solver_budget_ = size_t(5) << 29;  // ~2.5 GB

    std::shared_ptr<const Solver> build_solver(int s, int t) const;
    /* module degree-t piece as a column space for s = 0 */
    std::vector<int> module_cells(int t) const;
};

/* A class in Ext^{s,t}(module) = dual of the generator space at (s,t). */
struct RClass {
    std::string res_id;
    Bidegree bd;
    f2::BitVec coords;  // over gens_at(s,t)
    bool zero() const { return coords.is_zero(); }
    friend bool operator==(const RClass&, const RClass&) = default;
};

/* Chain map from a module resolution into another lifting a cocycle
 * (dst = sphere) or a cell-range module map (same s). Values are computed
 * lazily per generator and memoized. */
class ChainLift {
public:
    /* lift of the functional `x` (on gens of src at x.bd) into dst */
    ChainLift(std::shared_ptr<Resolution> src, std::shared_ptr<Resolution> dst, RClass x);
    /* lift of the module map that keeps cells in [lo, hi] (identity there) */
    ChainLift(std::shared_ptr<Resolution> src, std::shared_ptr<Resolution> dst, int keep_lo,
              int keep_hi);

    /* Θ(gen g of src at level s) in F_{s - s0}(dst); s0 = 0 for module maps */
    const FreeElt& value(int s, uint32_t gen);
    int s0() const { return s0_; }
    int t0() const { return t0_; }

private:
    std::shared_ptr<Resolution> src_, dst_;
    RClass x_;
    bool module_map_ = false;
    int keep_lo_ = 0, keep_hi_ = -1;
    int s0_ = 0, t0_ = 0;
    std::map<std::pair<int, uint32_t>, FreeElt> values_;
    FreeElt compute(int s, uint32_t gen);
};

}  // namespace lamex
