#pragma once

#include "lamex/resolution.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lamex {

/* High-range Ext engine over minimal resolutions. Provides dimensions,
 * products, Massey products, divisibility, induced maps of cell-range
 * truncations, and Atiyah-Hirzebruch filtrations, for the sphere and the
 * cell modules. Complements the Lambda engine above its feasible range;
 * the two are equivalence-tested on their overlap. */
class ResolutionEngine {
public:
    explicit ResolutionEngine(std::string cache_dir = "");

    /* resolution of the module of `spec`, computed through (s_max, t_max) */
    std::shared_ptr<Resolution> resolution(const ComplexSpec& spec, int s_max, int t_max);
    /* previously computed resolution (throws if absent) */
    std::shared_ptr<Resolution> resolution(const std::string& id) const;

    int ext_dim(const ComplexSpec& spec, int s, int t);

    RClass make_class(const ComplexSpec& spec, int s, int t, f2::BitVec coords);
    std::vector<RClass> ext_basis(const ComplexSpec& spec, int s, int t);
    RClass zero_class(const ComplexSpec& spec, int s, int t);
    RClass sum(const RClass& a, const RClass& b) const;

    /* x·u (right action of the sphere class u) */
    RClass multiply(const RClass& x, const RClass& u);

    struct MasseyResult {
        bool defined = false;
        RClass value;
        f2::Subspace indeterminacy;
        bool zero_indeterminacy = false;
    };
    MasseyResult massey(const RClass& a, const RClass& b, const RClass& c);

    std::optional<RClass> divisible_by(const RClass& x, const RClass& g);

    /* induced map on Ext of the spectra map "src -> dst" given by keeping the
     * cell range [keep_lo, keep_hi]; rows = Ext(src) basis, cols = Ext(dst) */
    f2::BitMatrix induced(const ComplexSpec& src, const ComplexSpec& dst, int keep_lo, int keep_hi,
                          int s, int t);

    /* AH filtration of each basis class at (s,t): smallest k with the class
     * in the image of Ext(sub complex through cell k) */
    std::vector<int> ah_filtration(const ComplexSpec& spec, int s, int t);
    /* filtration-k subspace of Ext^{s,t}(spec), in basis coordinates */
    f2::Subspace ah_subspace(const ComplexSpec& spec, int s, int t, int k);

    /* Does the AH name a[cell] resolve at (s,t) of `spec` (a = sphere class
     * at (s, t-cell))? If yes, returns one representing class. */
    std::optional<RClass> resolve_ah(const ComplexSpec& spec, int s, int t, int cell,
                                     const RClass& sphere_class);

    /* LES rank bookkeeping for the split [lo..k] / [k+1..hi] of spec: checks
     * exactness at the middle node directly and the boundary ranks via the
     * two induced maps (see README); nodes with stems in [stem_lo, stem_hi] */
    struct LesCheck {
        bool exact = true;
        std::vector<std::string> failures;
    };
    LesCheck les_check(const ComplexSpec& spec, int k, int stem_lo, int stem_hi, int s_max);

    /* range bookkeeping: extend all resolutions a claim needs */
    void require(const ComplexSpec& spec, int s_max, int t_max);

    std::string cache_dir() const { return cache_dir_; }

private:
    std::string cache_dir_;
    mutable std::mutex mx_;
    std::map<std::string, std::shared_ptr<Resolution>> res_;
    std::map<std::string, std::shared_ptr<ChainLift>> lifts_;
    std::map<std::string, f2::BitMatrix> induced_cache_;

    std::shared_ptr<ChainLift> lift_of(const RClass& x);
    std::shared_ptr<ChainLift> module_lift(const ComplexSpec& from, const ComplexSpec& to,
                                           int keep_lo, int keep_hi, int s_max, int t_max);
    ComplexSpec sub_spec(const ComplexSpec& spec, int k) const;
    std::string cache_path(const std::string& id) const;
};

}  // namespace lamex
