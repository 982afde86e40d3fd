#pragma once

#include "lamex/bitmatrix.hpp"
#include "lamex/complexes.hpp"
#include "lamex/sparse_f2.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lamex {

/* A homology class of a Lambda cochain complex. `rep` is the canonical
 * coset representative (fully reduced against the boundary space) unless
 * `canonical` is false (sparse path: only membership tests are available). */
struct ExtClass {
    std::string complex_id;
    Bidegree bd;
    f2::BitVec rep;
    int ah_filtration = -1;  // largest cell of the reduced representative
    bool canonical = true;
    std::optional<std::string> name;

    bool zero() const { return rep.is_zero(); }
};

/* Homology of one bidegree with canonical data. */
struct HomologyData {
    std::shared_ptr<const BasisTable> basis;
    f2::Subspace boundaries;   // image of d_{s-1,t}, RREF
    f2::Subspace classes;      // canonical homology reps (boundary-reduced), RREF
    std::vector<int> ah;       // AH filtration per basis row of `classes`
    int dim() const { return int(classes.dim()); }
};

struct LesNode {
    Bidegree bd;
    int dim_sub, dim_total, dim_quot;
    f2::BitMatrix incl, proj;  // induced maps on homology
    f2::BitMatrix connecting;  // H^{s,t}(quot) -> H^{s+1,t}(sub)
    bool exact_at_total, exact_at_quot, exact_at_sub;
};

struct LesReport {
    std::vector<LesNode> nodes;
    bool exact = true;
};

/* Homology engine for the Lambda cochain complexes. Dense canonical data up
 * to `dense_dim`; dimension and membership via sparse elimination above it.
 * All results are cached per (complex, s, t); the cache can be persisted. */
class LambdaEngine {
public:
    struct Limits {
        uint64_t dense_dim = 60000;          // max basis dim for canonical homology
        size_t sparse_budget = size_t(3) << 27;  // stored entries per sparse echelon
    };

    explicit LambdaEngine(Limits limits = {}) : limits_(limits) {}

    const Limits& limits() const { return limits_; }

    /* canonical homology (dense path; ResourceLimit beyond limits) */
    std::shared_ptr<const HomologyData> homology(const ComplexSpec& spec, int s, int t);
    bool dense_feasible(const ComplexSpec& spec, int s, int t) const;

    /* dimension only; falls back to sparse rank-nullity above the dense cap */
    int ext_dim(const ComplexSpec& spec, int s, int t);

    std::pair<int, std::vector<ExtClass>> ext_group(const ComplexSpec& spec, int s, int t);

    /* class of a cocycle (canonical rep); throws if not a cocycle */
    ExtClass class_of(const ComplexSpec& spec, const Cochain& cocycle);
    /* membership of a cocycle in the boundary space (sparse-capable) */
    bool is_boundary(const ComplexSpec& spec, const Cochain& cocycle);
    bool same_class(const ComplexSpec& spec, const Cochain& a, const Cochain& b);

    Cochain rep_cochain(const ComplexSpec& spec, const ExtClass& c);

    /* induced map on homology in the canonical bases (rows = source basis) */
    f2::BitMatrix induced_map(const CellRangeMap& f, int s, int t);

    /* long exact sequence of the split [lower, k] / [k+1, upper]; verifies
     * exactness at every node with stems in [stem_lo, stem_hi], s <= s_max */
    LesReport les(const ComplexSpec& spec, int k, int stem_lo, int stem_hi, int s_max);

    /* transfer to the sphere: (s,t) -> (s+1,t+1) */
    ExtClass transfer(const ExtClass& x);

    /* products (sphere-sphere, or cell complex times sphere right action) */
    ExtClass multiply(const ExtClass& a, const ExtClass& b);

    struct MasseyResult {
        bool defined = false;
        ExtClass value;
        f2::Subspace indeterminacy;
        bool zero_indeterminacy = false;
    };
    /* triple product on the sphere; requires a·b = 0 and b·c = 0 */
    MasseyResult massey(const ExtClass& a, const ExtClass& b, const ExtClass& c,
                        uint64_t nullhomotopy_seed = 0);

    /* some y with g·y = x, if any */
    std::optional<ExtClass> divisible_by(const ExtClass& x, const ExtClass& g);

    /* persistent cache (versioned, checksummed); merge-on-load */
    void cache_store(const std::string& path) const;
    void cache_load(const std::string& path);

    ComplexSpec spec_by_id(const std::string& id) const;

private:
    Limits limits_;
    mutable std::mutex mx_;
    std::map<std::string, std::shared_ptr<const HomologyData>> cache_;
    std::map<std::string, int> dim_cache_;
    std::map<std::string, ComplexSpec> specs_;
    std::map<std::string, std::shared_ptr<f2::SparseEchelon>> sparse_bnd_;

    void remember_spec(const ComplexSpec& spec);
    std::shared_ptr<f2::SparseEchelon> sparse_boundaries(const ComplexSpec& spec, int s, int t);
    ExtClass make_class(const ComplexSpec& spec, int s, int t, f2::BitVec reduced);
    f2::BitVec class_coords(const HomologyData& h, const f2::BitVec& cocycle) const;
};

/* row vector times matrix */
f2::BitVec vec_mat(const f2::BitVec& v, const f2::BitMatrix& m);

/* sparse rank of the differential (s,t) -> (s+1,t) */
size_t sparse_rank_differential(const ComplexSpec& spec, int s, int t, size_t budget);

}  // namespace lamex
