#include "lamex/res_engine.hpp"

#include <algorithm>
#include <filesystem>

#include <fmt/format.h>

namespace lamex {

namespace {
    ComplexSpec truncate(const ComplexSpec& spec, int lo, int hi /* -1 = spec upper */)
    {
        switch (spec.kind) {
            case ComplexKind::Sphere:
                if (spec.shift < lo || (hi >= 0 && spec.shift > hi))
                    throw ConfigError("truncation drops the only cell");
                return spec;
            case ComplexKind::Stunted: {
                int upper = hi < 0 ? spec.upper : (spec.upper < 0 ? hi : std::min(spec.upper, hi));
                int lower = std::max(spec.lower, lo);
                if (lower == upper)
                    return ComplexSpec::sphere(lower);
                return ComplexSpec::stunted(lower, upper);
            }
            case ComplexKind::Cells: {
                std::vector<int> cells;
                for (int c : spec.cells)
                    if (c >= lo && (hi < 0 || c <= hi))
                        cells.push_back(c);
                if (cells.empty())
                    throw ConfigError("truncation drops every cell");
                std::map<std::pair<int, int>, LambdaPolynomial> twists;
                for (auto& [key, poly] : spec.twists)
                    if (key.first >= lo && (hi < 0 || key.first <= hi) && key.second >= lo &&
                        (hi < 0 || key.second <= hi))
                        twists[key] = poly;
                if (cells.size() == 1)
                    return ComplexSpec::sphere(cells[0]);
                return ComplexSpec::twisted(std::move(cells), std::move(twists));
            }
        }
        throw ComputeError("unreachable");
    }
}

ResolutionEngine::ResolutionEngine(std::string cache_dir) : cache_dir_(std::move(cache_dir))
{
    if (!cache_dir_.empty())
        std::filesystem::create_directories(cache_dir_);
}

std::string ResolutionEngine::cache_path(const std::string& id) const
{
    if (cache_dir_.empty())
        return "";
    std::string safe = id;
    for (char& c : safe)
        if (c == '/' || c == '>' || c == ':' || c == ';' || c == ',')
            c = '_';
    return cache_dir_ + "/" + safe + ".res";
}

ComplexSpec ResolutionEngine::sub_spec(const ComplexSpec& spec, int k) const
{
    return truncate(spec, spec.min_cell(), k);
}

std::shared_ptr<Resolution> ResolutionEngine::resolution(const ComplexSpec& spec, int s_max,
                                                         int t_max)
{
    std::shared_ptr<Resolution> r;
    {
        std::scoped_lock lk(mx_);
        auto it = res_.find(spec.id());
        if (it != res_.end())
            r = it->second;
    }
    if (!r) {
        r = std::make_shared<Resolution>(CellModule(spec));
        std::string path = cache_path(spec.id());
        if (!path.empty() && std::filesystem::exists(path))
            r->load(path);
        std::scoped_lock lk(mx_);
        r = res_.emplace(spec.id(), r).first->second;
    }
    if (r->computed_s() < s_max || r->computed_t() < t_max) {
        bool restart = s_max > r->computed_s() && r->computed_s() >= 0;
        r->extend(std::max(s_max, r->computed_s()), std::max(t_max, r->computed_t()));
        if (restart) {
            // generator indices may have changed; memoized lift values and
            // induced matrices are stale
            std::scoped_lock lk(mx_);
            lifts_.clear();
            induced_cache_.clear();
        }
        std::string path = cache_path(spec.id());
        if (!path.empty())
            r->save(path);
    }
    return r;
}

std::shared_ptr<Resolution> ResolutionEngine::resolution(const std::string& id) const
{
    std::scoped_lock lk(mx_);
    auto it = res_.find(id);
    if (it == res_.end())
        throw ComputeError("resolution not computed: " + id);
    return it->second;
}

void ResolutionEngine::require(const ComplexSpec& spec, int s_max, int t_max)
{
    resolution(spec, s_max, t_max);
}

int ResolutionEngine::ext_dim(const ComplexSpec& spec, int s, int t)
{
    if (s < 0 || t < 0)
        return 0;
    auto r = resolution(spec, s, t);
    return r->ext_dim(s, t);
}

RClass ResolutionEngine::make_class(const ComplexSpec& spec, int s, int t, f2::BitVec coords)
{
    if (int(coords.size()) != ext_dim(spec, s, t))
        throw ComputeError("make_class: coordinate length mismatch");
    RClass c;
    c.res_id = spec.id();
    c.bd = {s, t};
    c.coords = std::move(coords);
    return c;
}

std::vector<RClass> ResolutionEngine::ext_basis(const ComplexSpec& spec, int s, int t)
{
    int dim = ext_dim(spec, s, t);
    std::vector<RClass> out;
    for (int i = 0; i < dim; ++i) {
        f2::BitVec v(size_t(dim));
        v.set(size_t(i));
        out.push_back(make_class(spec, s, t, std::move(v)));
    }
    return out;
}

RClass ResolutionEngine::zero_class(const ComplexSpec& spec, int s, int t)
{
    return make_class(spec, s, t, f2::BitVec(size_t(ext_dim(spec, s, t))));
}

RClass ResolutionEngine::sum(const RClass& a, const RClass& b) const
{
    if (a.res_id != b.res_id || a.bd != b.bd)
        throw ComputeError("sum: class mismatch");
    RClass out = a;
    out.coords ^= b.coords;
    return out;
}

std::shared_ptr<ChainLift> ResolutionEngine::lift_of(const RClass& x)
{
    std::string key = fmt::format("L|{}|{}|{}|", x.res_id, x.bd.s, x.bd.t);
    for (uint32_t i : x.coords.support())
        key += fmt::format("{},", i);
    {
        std::scoped_lock lk(mx_);
        auto it = lifts_.find(key);
        if (it != lifts_.end())
            return it->second;
    }
    auto src = resolution(x.res_id);
    auto sphere = resolution(ComplexSpec::sphere(0), 0, 0);
    auto lift = std::make_shared<ChainLift>(src, sphere, x);
    std::scoped_lock lk(mx_);
    return lifts_.emplace(key, std::move(lift)).first->second;
}

RClass ResolutionEngine::multiply(const RClass& x, const RClass& u)
{
    if (u.res_id != "S0")
        throw ComputeError("multiply: right factor must live on the sphere");
    Bidegree target{x.bd.s + u.bd.s, x.bd.t + u.bd.t};
    auto xres = resolution(x.res_id);
    if (xres->computed_s() < target.s || xres->computed_t() < target.t)
        throw ComputeError(fmt::format("multiply: resolution {} not computed through ({},{})",
                                       x.res_id, target.s, target.t));
    resolution(ComplexSpec::sphere(0), u.bd.s + 1, u.bd.t + 1);
    auto gens = xres->gens_at(target.s, target.t);
    f2::BitVec out(gens.size());
    RClass result;
    result.res_id = x.res_id;
    result.bd = target;
    if (x.zero() || u.zero()) {
        result.coords = std::move(out);
        return result;
    }
    auto sphere = resolution("S0");
    auto ugens = sphere->gens_at(u.bd.s, u.bd.t);
    auto lift = lift_of(x);
    for (size_t gi = 0; gi < gens.size(); ++gi) {
        const FreeElt& val = lift->value(target.s, gens[gi]);
        bool bit = false;
        for (const auto& [m, h] : val) {
            if (!m.is_unit())
                continue;
            for (size_t ui = 0; ui < ugens.size(); ++ui)
                if (ugens[ui] == h && u.coords.get(ui))
                    bit = !bit;
        }
        if (bit)
            out.set(gi);
    }
    result.coords = std::move(out);
    return result;
}

/* chain homotopy H with dH + Hd = Θ_b∘Θ_a, evaluated lazily per generator */
namespace {
    struct Homotopy {
        std::shared_ptr<Resolution> sphere;
        std::shared_ptr<ChainLift> la, lb;  // lifts of a and b
        int sab, tab;
        std::map<std::pair<int, uint32_t>, FreeElt> values;

        const FreeElt& value(int s, uint32_t gen)
        {
            auto key = std::make_pair(s, gen);
            auto it = values.find(key);
            if (it != values.end())
                return it->second;
            const ResGen& g = sphere->gens(s)[gen];
            // rhs = Θ_b(Θ_a(g)) + H(d g)
            FreeElt rhs;
            const FreeElt& av = la->value(s, gen);
            for (const auto& [m, h] : av) {
                const FreeElt& bv = lb->value(s - la->s0(), h);
                for (const auto& [m2, h2] : bv) {
                    FreeElt part;
                    for (const Milnor& p : milnor_mul(m, m2))
                        part.emplace_back(p, h2);
                    std::sort(part.begin(), part.end());
                    rhs = free_add(rhs, part);
                }
            }
            if (s > sab) {
                for (const auto& [m, g2] : g.dg) {
                    const FreeElt& w = value(s - 1, g2);
                    for (const auto& [b, h] : w) {
                        FreeElt part;
                        for (const Milnor& p : milnor_mul(m, b))
                            part.emplace_back(p, h);
                        std::sort(part.begin(), part.end());
                        rhs = free_add(rhs, part);
                    }
                }
            }
            FreeElt out;
            if (!rhs.empty()) {
                int k = s - sab + 1;
                int tt = g.t - tab;
                auto dstb = sphere->basis(k - 1, tt);
                auto sol = sphere->solver(k, tt)->solve(sphere->elt_to_vec(rhs, dstb));
                if (!sol)
                    throw ComputeError("massey: homotopy obstruction (product nonzero?)");
                out = sphere->vec_to_elt(*sol, sphere->basis(k, tt));
            }
            return values.emplace(key, std::move(out)).first->second;
        }
    };
}

ResolutionEngine::MasseyResult ResolutionEngine::massey(const RClass& a, const RClass& b,
                                                        const RClass& c)
{
    for (const RClass* x : {&a, &b, &c})
        if (x->res_id != "S0")
            throw ComputeError("massey: all classes must live on the sphere");
    Bidegree vb{a.bd.s + b.bd.s + c.bd.s - 1, a.bd.t + b.bd.t + c.bd.t};
    auto sphere = resolution(ComplexSpec::sphere(0), vb.s + 1, vb.t + 1);
    // preconditions: the products vanish (pointwise on generators, because the
    // resolution is minimal)
    RClass ab = multiply(a, b), bc = multiply(b, c);
    if (!ab.zero() || !bc.zero())
        throw ComputeError("massey: a·b and b·c must vanish");
    Homotopy H{sphere, lift_of(a), lift_of(b), a.bd.s + b.bd.s, a.bd.t + b.bd.t, {}};
    Homotopy K{sphere, lift_of(b), lift_of(c), b.bd.s + c.bd.s, b.bd.t + c.bd.t, {}};
    auto agens = sphere->gens_at(a.bd.s, a.bd.t);
    auto cgens = sphere->gens_at(c.bd.s, c.bd.t);
    auto vgens = sphere->gens_at(vb.s, vb.t);
    f2::BitVec coords(vgens.size());
    for (size_t gi = 0; gi < vgens.size(); ++gi) {
        bool bit = false;
        // â∘K: K(g) lands in F_{s_a} at degree t - t_b - t_c
        for (const auto& [m, h] : K.value(vb.s, vgens[gi])) {
            if (!m.is_unit())
                continue;
            for (size_t i = 0; i < agens.size(); ++i)
                if (agens[i] == h && a.coords.get(i))
                    bit = !bit;
        }
        // ĉ∘H: H(g) lands in F_{s_c} at degree t - t_a - t_b
        for (const auto& [m, h] : H.value(vb.s, vgens[gi])) {
            if (!m.is_unit())
                continue;
            for (size_t i = 0; i < cgens.size(); ++i)
                if (cgens[i] == h && c.coords.get(i))
                    bit = !bit;
        }
        if (bit)
            coords.set(gi);
    }
    MasseyResult out;
    out.defined = true;
    out.value = make_class(ComplexSpec::sphere(0), vb.s, vb.t, std::move(coords));
    out.indeterminacy = f2::Subspace(vgens.size());
    Bidegree free1{b.bd.s + c.bd.s - 1, b.bd.t + c.bd.t};
    Bidegree free2{a.bd.s + b.bd.s - 1, a.bd.t + b.bd.t};
    if (free1.s >= 0 && free1.t >= 0)
        for (const RClass& y : ext_basis(ComplexSpec::sphere(0), free1.s, free1.t))
            out.indeterminacy.insert(multiply(a, y).coords);
    if (free2.s >= 0 && free2.t >= 0)
        for (const RClass& y : ext_basis(ComplexSpec::sphere(0), free2.s, free2.t))
            out.indeterminacy.insert(multiply(y, c).coords);
    out.zero_indeterminacy = out.indeterminacy.dim() == 0;
    return out;
}

std::optional<RClass> ResolutionEngine::divisible_by(const RClass& x, const RClass& g)
{
    ComplexSpec xspec = builtin_complex(x.res_id);
    Bidegree yb{x.bd.s - g.bd.s, x.bd.t - g.bd.t};
    if (yb.s < 0 || yb.t < yb.s)
        return std::nullopt;
    auto ybasis = ext_basis(xspec, yb.s, yb.t);
    int xdim = ext_dim(xspec, x.bd.s, x.bd.t);
    if (ybasis.empty())
        return x.zero() ? std::make_optional(zero_class(xspec, yb.s, yb.t)) : std::nullopt;
    f2::BitMatrix m(ybasis.size(), size_t(xdim));
    for (size_t i = 0; i < ybasis.size(); ++i)
        m.set_row(i, multiply(ybasis[i], g).coords);
    auto sol = f2::solve(m.transposed(), x.coords);
    if (!sol)
        return std::nullopt;
    f2::BitVec y(ybasis.size());
    for (uint32_t i : sol->support())
        y.flip(i);
    return make_class(xspec, yb.s, yb.t, std::move(y));
}

std::shared_ptr<ChainLift> ResolutionEngine::module_lift(const ComplexSpec& from,
                                                         const ComplexSpec& to, int keep_lo,
                                                         int keep_hi, int s_max, int t_max)
{
    std::string key = fmt::format("M|{}|{}|{}|{}", from.id(), to.id(), keep_lo, keep_hi);
    {
        std::scoped_lock lk(mx_);
        auto it = lifts_.find(key);
        if (it != lifts_.end())
            return it->second;
    }
    auto src = resolution(from, s_max, t_max);
    auto dst = resolution(to, s_max, t_max);
    auto lift = std::make_shared<ChainLift>(src, dst, keep_lo, keep_hi);
    std::scoped_lock lk(mx_);
    return lifts_.emplace(key, std::move(lift)).first->second;
}

f2::BitMatrix ResolutionEngine::induced(const ComplexSpec& src, const ComplexSpec& dst,
                                        int keep_lo, int keep_hi, int s, int t)
{
    // spectra map src -> dst corresponds to the module map H*(dst) -> H*(src)
    std::string key = fmt::format("I|{}|{}|{}|{}|{}|{}", src.id(), dst.id(), keep_lo, keep_hi, s, t);
    {
        std::scoped_lock lk(mx_);
        auto it = induced_cache_.find(key);
        if (it != induced_cache_.end())
            return it->second;
    }
    auto rsrc = resolution(src, s, t);
    auto rdst = resolution(dst, s, t);
    auto lift = module_lift(dst, src, keep_lo, keep_hi, s, t);
    auto sgens = rsrc->gens_at(s, t);
    auto dgens = rdst->gens_at(s, t);
    f2::BitMatrix m(sgens.size(), dgens.size());
    for (size_t j = 0; j < dgens.size(); ++j) {
        const FreeElt& val = lift->value(s, dgens[j]);
        for (const auto& [mil, h] : val) {
            if (!mil.is_unit())
                continue;
            for (size_t i = 0; i < sgens.size(); ++i)
                if (sgens[i] == h)
                    m.flip(i, j);
        }
    }
    std::scoped_lock lk(mx_);
    return induced_cache_.emplace(key, std::move(m)).first->second;
}

f2::Subspace ResolutionEngine::ah_subspace(const ComplexSpec& spec, int s, int t, int k)
{
    int dim = ext_dim(spec, s, t);
    f2::Subspace out(size_t(dim));
    if (k < spec.min_cell())
        return out;
    ComplexSpec sub = sub_spec(spec, std::min(k, t));  // cells above t are empty
    if (sub == spec) {
        // full space
        for (int i = 0; i < dim; ++i) {
            f2::BitVec v(size_t(dim));
            v.set(size_t(i));
            out.insert(std::move(v));
        }
        return out;
    }
    f2::BitMatrix m = induced(sub, spec, sub.min_cell(), std::min(k, t), s, t);
    for (size_t i = 0; i < m.rows(); ++i)
        out.insert(m.row_vec(i));
    return out;
}

std::vector<int> ResolutionEngine::ah_filtration(const ComplexSpec& spec, int s, int t)
{
    int dim = ext_dim(spec, s, t);
    std::vector<int> out(size_t(dim), -1);
    if (!dim)
        return out;
    int top = std::min(spec.infinite() ? t : (spec.kind == ComplexKind::Sphere ? spec.shift
                                                                               : spec.upper),
                       t);
    if (spec.kind == ComplexKind::Cells)
        top = std::min(spec.cells.back(), t);
    for (int k = spec.min_cell(); k <= top; ++k) {
        f2::Subspace fk = ah_subspace(spec, s, t, k);
        for (int i = 0; i < dim; ++i) {
            if (out[size_t(i)] >= 0)
                continue;
            f2::BitVec v(size_t(dim));
            v.set(size_t(i));
            if (fk.contains(v))
                out[size_t(i)] = k;
        }
    }
    return out;
}

std::optional<RClass> ResolutionEngine::resolve_ah(const ComplexSpec& spec, int s, int t, int cell,
                                                   const RClass& sphere_class)
{
    if (sphere_class.zero())
        return std::nullopt;
    ComplexSpec sub = sub_spec(spec, cell);
    ComplexSpec topcell = ComplexSpec::sphere(cell);
    // Ext(S^cell) at (s,t) matches Ext(S^0) at (s, t-cell) generator by
    // generator (the resolution of a shifted sphere is the shifted resolution)
    auto rsub = resolution(sub, s + 1, t + 1);
    f2::BitMatrix iota = induced(sub, spec, sub.min_cell(), cell, s, t);
    f2::BitMatrix top = induced(sub, topcell, cell, cell, s, t);
    // solve z·top = sphere_class.coords
    if (top.cols() != sphere_class.coords.size())
        throw ComputeError("resolve_ah: sphere class bidegree mismatch");
    auto z0 = f2::solve(top.transposed(), sphere_class.coords);
    if (!z0)
        return std::nullopt;
    f2::Subspace lower = ah_subspace(spec, s, t, cell - 1);
    f2::BitVec w0 = vec_mat(*z0, iota);
    auto mk = [&](f2::BitVec v) { return make_class(spec, s, t, std::move(v)); };
    if (!lower.contains(w0))
        return mk(std::move(w0));
    f2::Subspace kert = f2::kernel(top.transposed());
    for (size_t i = 0; i < kert.dim(); ++i) {
        f2::BitVec w = vec_mat(kert.basis().row_vec(i), iota);
        if (!lower.contains(w)) {
            w ^= w0;
            return mk(std::move(w));
        }
    }
    return std::nullopt;
}

ResolutionEngine::LesCheck ResolutionEngine::les_check(const ComplexSpec& spec, int k, int stem_lo,
                                                       int stem_hi, int s_max)
{
    LesCheck out;
    ComplexSpec sub = sub_spec(spec, k);
    ComplexSpec quot = truncate(spec, k + 1, -1);
    for (int stem = stem_lo; stem <= stem_hi; ++stem) {
        for (int s = 0; s <= s_max; ++s) {
            int t = stem + s;
            if (t < 0)
                continue;
            f2::BitMatrix i1 = induced(sub, spec, sub.min_cell(), k, s, t);
            f2::BitMatrix p1 = induced(spec, quot, k + 1, -1, s, t);
            f2::BitMatrix i2 = induced(sub, spec, sub.min_cell(), k, s + 1, t);
            // exactness at the total complex
            auto im = f2::Subspace::row_space(i1);
            auto ker = f2::kernel(p1.transposed());
            if (!(im == ker)) {
                out.exact = false;
                out.failures.push_back(
                    fmt::format("im(i)!=ker(p) at ({},{}) of {}", s, t, spec.id()));
            }
            // connecting-rank bookkeeping: coker(p at (s,t)) vs ker(i at (s+1,t))
            size_t coker = size_t(ext_dim(quot, s, t)) - f2::rank(p1);
            size_t keri = i2.rows() - f2::rank(i2);
            if (coker != keri) {
                out.exact = false;
                out.failures.push_back(fmt::format(
                    "connecting rank mismatch at ({},{}) of {}: coker(p)={} ker(i)={}", s, t,
                    spec.id(), coker, keri));
            }
        }
    }
    return out;
}

}  // namespace lamex
