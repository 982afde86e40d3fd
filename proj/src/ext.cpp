#include "lamex/ext.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace lamex {

f2::BitVec vec_mat(const f2::BitVec& v, const f2::BitMatrix& m)
{
    if (v.size() != m.rows())
        throw ComputeError("vec_mat: shape mismatch");
    f2::BitVec out(m.cols());
    for (uint32_t i : v.support())
        f2::xor_into(out.data(), m.row(i), m.words_per_row());
    return out;
}

namespace {
    std::string key_of(const ComplexSpec& spec, int s, int t)
    {
        return fmt::format("{}|{}|{}", spec.id(), s, t);
    }

    ComplexSpec spec_from_id(const std::string& id)
    {
        if (!id.empty() && id[0] == 'X') {
            // X<c1>,<c2>,...[;<from>><to>:<j>[+<j>]...]...
            std::vector<int> cells;
            std::map<std::pair<int, int>, LambdaPolynomial> twists;
            std::istringstream is(id.substr(1));
            std::string part;
            bool first = true;
            while (std::getline(is, part, ';')) {
                if (first) {
                    std::istringstream cs(part);
                    std::string num;
                    while (std::getline(cs, num, ','))
                        cells.push_back(std::stoi(num));
                    first = false;
                } else {
                    auto gt = part.find('>');
                    auto colon = part.find(':');
                    if (gt == std::string::npos || colon == std::string::npos)
                        throw ConfigError("bad complex id: " + id);
                    int from = std::stoi(part.substr(0, gt));
                    int to = std::stoi(part.substr(gt + 1, colon - gt - 1));
                    std::istringstream ws(part.substr(colon + 1));
                    std::string num;
                    LambdaPolynomial poly;
                    while (std::getline(ws, num, '+'))
                        poly.push_back(LambdaWord(1, (unsigned char)std::stoi(num)));
                    std::sort(poly.begin(), poly.end());
                    twists[{from, to}] = std::move(poly);
                }
            }
            return ComplexSpec::twisted(std::move(cells), std::move(twists));
        }
        return builtin_complex(id);
    }

    uint64_t fnv1a(const std::string& data)
    {
        uint64_t h = 14695981039346656037ull;
        for (unsigned char c : data) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }
}

void LambdaEngine::remember_spec(const ComplexSpec& spec)
{
    specs_.emplace(spec.id(), spec);
}

ComplexSpec LambdaEngine::spec_by_id(const std::string& id) const
{
    auto it = specs_.find(id);
    if (it != specs_.end())
        return it->second;
    return spec_from_id(id);
}

bool LambdaEngine::dense_feasible(const ComplexSpec& spec, int s, int t) const
{
    for (int ds = -1; ds <= 1; ++ds)
        if (dim_estimate(spec, s + ds, t) > limits_.dense_dim)
            return false;
    return true;
}

std::shared_ptr<const HomologyData> LambdaEngine::homology(const ComplexSpec& spec, int s, int t)
{
    std::string key = key_of(spec, s, t);
    {
        std::scoped_lock lk(mx_);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        remember_spec(spec);
    }
    if (!dense_feasible(spec, s, t))
        throw ResourceLimit(fmt::format("homology {} ({},{}): dimension {} exceeds dense cap {}",
                                        spec.id(), s, t, dim_estimate(spec, s, t),
                                        limits_.dense_dim));
    auto h = std::make_shared<HomologyData>();
    h->basis = make_basis(spec, s, t);
    if (s >= 1 && make_basis(spec, s - 1, t)->dim > 0)
        h->boundaries = f2::Subspace::row_space(differential_matrix(spec, s - 1, t));
    else
        h->boundaries = f2::Subspace(h->basis->dim);
    f2::Subspace cocycles = f2::kernel(differential_matrix(spec, s, t).transposed());
    h->classes = f2::Subspace(h->basis->dim);
    for (size_t i = 0; i < cocycles.dim(); ++i)
        h->classes.insert(h->boundaries.reduce(cocycles.basis().row_vec(i)));
    h->ah.reserve(h->classes.dim());
    for (size_t i = 0; i < h->classes.dim(); ++i) {
        size_t lead = h->classes.basis().row_vec(i).first_set();
        h->ah.push_back(h->basis->symbol(lead).first);
    }
    std::scoped_lock lk(mx_);
    return cache_.emplace(key, std::move(h)).first->second;
}

size_t sparse_rank_differential(const ComplexSpec& spec, int s, int t, size_t budget)
{
    auto src = make_basis(spec, s, t);
    auto dst = make_basis(spec, s + 1, t);
    if (src->dim == 0 || dst->dim == 0)
        return 0;
    f2::SparseEchelon ech(dst->dim, budget);
    for (const auto& blk : src->blocks)
        for (const auto& w : *blk.words) {
            Cochain d = symbol_differential(spec, blk.cell, w);
            ech.insert(cochain_to_sparse(d, *dst));
        }
    return ech.rank();
}

int LambdaEngine::ext_dim(const ComplexSpec& spec, int s, int t)
{
    std::string key = key_of(spec, s, t);
    {
        std::scoped_lock lk(mx_);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second->dim();
        auto dt = dim_cache_.find(key);
        if (dt != dim_cache_.end())
            return dt->second;
        remember_spec(spec);
    }
    int dim;
    if (dense_feasible(spec, s, t)) {
        dim = homology(spec, s, t)->dim();
    } else {
        uint64_t n = dim_estimate(spec, s, t);
        if (n >= (uint64_t(1) << 62))
            throw ResourceLimit("ext_dim: basis dimension saturates the counter");
        size_t r1 = sparse_rank_differential(spec, s, t, limits_.sparse_budget);
        size_t r0 = s >= 1 ? sparse_rank_differential(spec, s - 1, t, limits_.sparse_budget) : 0;
        dim = int(n - r1 - r0);
    }
    std::scoped_lock lk(mx_);
    dim_cache_.emplace(key, dim);
    return dim;
}

std::pair<int, std::vector<ExtClass>> LambdaEngine::ext_group(const ComplexSpec& spec, int s, int t)
{
    auto h = homology(spec, s, t);
    std::vector<ExtClass> classes;
    classes.reserve(h->classes.dim());
    for (size_t i = 0; i < h->classes.dim(); ++i) {
        ExtClass c;
        c.complex_id = spec.id();
        c.bd = {s, t};
        c.rep = h->classes.basis().row_vec(i);
        c.ah_filtration = h->ah[i];
        classes.push_back(std::move(c));
    }
    return {h->dim(), std::move(classes)};
}

ExtClass LambdaEngine::make_class(const ComplexSpec& spec, int s, int t, f2::BitVec reduced)
{
    ExtClass c;
    c.complex_id = spec.id();
    c.bd = {s, t};
    c.ah_filtration = -1;
    if (!reduced.is_zero()) {
        auto basis = make_basis(spec, s, t);
        c.ah_filtration = basis->symbol(reduced.first_set()).first;
    }
    c.rep = std::move(reduced);
    return c;
}

ExtClass LambdaEngine::class_of(const ComplexSpec& spec, const Cochain& cocycle)
{
    if (!total_differential(spec, cocycle).zero())
        throw ComputeError("class_of: not a cocycle: " + cochain_str(cocycle));
    int s = cocycle.bd.s, t = cocycle.bd.t;
    auto h = homology(spec, s, t);
    f2::BitVec v = cochain_to_vec(cocycle, *h->basis);
    return make_class(spec, s, t, h->boundaries.reduce(std::move(v)));
}

std::shared_ptr<f2::SparseEchelon> LambdaEngine::sparse_boundaries(const ComplexSpec& spec, int s,
                                                                   int t)
{
    std::string key = "B" + key_of(spec, s, t);
    {
        std::scoped_lock lk(mx_);
        auto it = sparse_bnd_.find(key);
        if (it != sparse_bnd_.end())
            return it->second;
    }
    auto dst = make_basis(spec, s, t);
    auto ech = std::make_shared<f2::SparseEchelon>(dst->dim, limits_.sparse_budget);
    if (s >= 1) {
        auto src = make_basis(spec, s - 1, t);
        for (const auto& blk : src->blocks)
            for (const auto& w : *blk.words) {
                Cochain d = symbol_differential(spec, blk.cell, w);
                ech->insert(cochain_to_sparse(d, *dst));
            }
    }
    std::scoped_lock lk(mx_);
    return sparse_bnd_.emplace(key, std::move(ech)).first->second;
}

bool LambdaEngine::is_boundary(const ComplexSpec& spec, const Cochain& cocycle)
{
    if (cocycle.zero())
        return true;
    if (!total_differential(spec, cocycle).zero())
        throw ComputeError("is_boundary: not a cocycle");
    int s = cocycle.bd.s, t = cocycle.bd.t;
    if (dense_feasible(spec, s, t)) {
        auto h = homology(spec, s, t);
        return h->boundaries.reduce(cochain_to_vec(cocycle, *h->basis)).is_zero();
    }
    auto ech = sparse_boundaries(spec, s, t);
    auto dst = make_basis(spec, s, t);
    return ech->contains(cochain_to_sparse(cocycle, *dst));
}

bool LambdaEngine::same_class(const ComplexSpec& spec, const Cochain& a, const Cochain& b)
{
    return is_boundary(spec, cochain_add(a, b));
}

Cochain LambdaEngine::rep_cochain(const ComplexSpec& spec, const ExtClass& c)
{
    auto basis = make_basis(spec, c.bd.s, c.bd.t);
    return vec_to_cochain(c.rep, *basis);
}

f2::BitVec LambdaEngine::class_coords(const HomologyData& h, const f2::BitVec& cocycle) const
{
    f2::BitVec wr = h.boundaries.reduce(cocycle);
    f2::BitVec coords(h.classes.dim());
    for (size_t i = 0; i < h.classes.dim(); ++i)
        if (wr.get(h.classes.pivots()[i])) {
            coords.set(i);
            wr ^= h.classes.basis().row_vec(i);
        }
    if (!wr.is_zero())
        throw ComputeError("class_coords: vector not a cocycle class (chain map identity broken?)");
    return coords;
}

f2::BitMatrix LambdaEngine::induced_map(const CellRangeMap& f, int s, int t)
{
    auto hs = homology(f.src, s, t);
    auto hd = homology(f.dst, s, t);
    f2::BitMatrix fm = f.matrix(s, t);
    f2::BitMatrix m(hs->classes.dim(), hd->classes.dim());
    for (size_t i = 0; i < hs->classes.dim(); ++i) {
        f2::BitVec img = vec_mat(hs->classes.basis().row_vec(i), fm);
        m.set_row(i, class_coords(*hd, img));
    }
    return m;
}

LesReport LambdaEngine::les(const ComplexSpec& spec, int k, int stem_lo, int stem_hi, int s_max)
{
    CellRangeMap inc = inclusion_map(spec, k);
    CellRangeMap quo = quotient_map(spec, k + 1);
    const ComplexSpec& sub = inc.src;
    const ComplexSpec& quot = quo.dst;
    LesReport report;
    // connecting map: lift a quotient class (verbatim symbols), apply the total
    // differential, restrict to the subcomplex
    auto connecting = [&](int s, int t) {
        auto hq = homology(quot, s, t);
        auto hs1 = homology(sub, s + 1, t);
        f2::BitMatrix m(hq->classes.dim(), hs1->classes.dim());
        auto sub_basis = make_basis(sub, s + 1, t);
        for (size_t i = 0; i < hq->classes.dim(); ++i) {
            Cochain lift = vec_to_cochain(hq->classes.basis().row_vec(i), *hq->basis);
            Cochain d = total_differential(spec, lift);
            // all terms must lie in cells <= k
            f2::BitVec v(sub_basis->dim);
            for (auto& [cell, w] : d.terms) {
                if (cell > k)
                    throw ComputeError("connecting: differential escapes the subcomplex");
                v.flip(sub_basis->index_of(cell, w));
            }
            m.set_row(i, class_coords(*hs1, v));
        }
        return m;
    };
    auto row_space_of = [](const f2::BitMatrix& m) { return f2::Subspace::row_space(m); };
    auto left_kernel = [](const f2::BitMatrix& m) { return f2::kernel(m.transposed()); };
    for (int t = 0;; ++t) {
        bool any = false;
        for (int s = 0; s <= s_max; ++s) {
            int stem = t - s;
            if (stem < stem_lo || stem > stem_hi)
                continue;
            any = true;
            LesNode node;
            node.bd = {s, t};
            node.dim_sub = homology(sub, s, t)->dim();
            node.dim_total = homology(spec, s, t)->dim();
            node.dim_quot = homology(quot, s, t)->dim();
            node.incl = induced_map(inc, s, t);
            node.proj = induced_map(quo, s, t);
            node.connecting = connecting(s, t);
            // exactness at total: im(incl) = ker(proj)
            node.exact_at_total = row_space_of(node.incl) == left_kernel(node.proj);
            // exactness at quot: im(proj) = ker(connecting)
            node.exact_at_quot = row_space_of(node.proj) == left_kernel(node.connecting);
            // exactness at sub in degree s+1: im(connecting at (s,t)) = ker(incl at (s+1,t))
            f2::BitMatrix incl_next = induced_map(inc, s + 1, t);
            node.exact_at_sub = row_space_of(node.connecting) == left_kernel(incl_next);
            report.exact = report.exact && node.exact_at_total && node.exact_at_quot &&
                           node.exact_at_sub;
            report.nodes.push_back(std::move(node));
        }
        if (t > stem_hi + s_max)
            break;
        (void)any;
    }
    return report;
}

ExtClass LambdaEngine::transfer(const ExtClass& x)
{
    ComplexSpec src = spec_by_id(x.complex_id);
    if (src.kind != ComplexKind::Stunted || src.lower != 1 || !src.infinite())
        throw ComputeError("transfer: class must live on P1-inf");
    Cochain c = rep_cochain(src, x);
    LambdaPolynomial words = transfer_chain(c);
    ComplexSpec sphere = ComplexSpec::sphere(0);
    Cochain out;
    out.bd = {x.bd.s + 1, x.bd.t + 1};
    for (auto& w : words)
        out.terms.emplace_back(0, w);
    if (dense_feasible(sphere, out.bd.s, out.bd.t))
        return class_of(sphere, out);
    // sparse fallback: raw representative, membership-only equality
    if (!total_differential(sphere, out).zero())
        throw ComputeError("transfer: image is not a cocycle");
    auto basis = make_basis(sphere, out.bd.s, out.bd.t);
    ExtClass r;
    r.complex_id = sphere.id();
    r.bd = out.bd;
    r.rep = cochain_to_vec(out, *basis);
    r.ah_filtration = 0;
    r.canonical = false;
    return r;
}

ExtClass LambdaEngine::multiply(const ExtClass& a, const ExtClass& b)
{
    ComplexSpec ca = spec_by_id(a.complex_id);
    ComplexSpec cb = spec_by_id(b.complex_id);
    if (cb.kind != ComplexKind::Sphere || cb.shift != 0)
        throw ComputeError("multiply: right factor must live on the sphere");
    Bidegree target{a.bd.s + b.bd.s, a.bd.t + b.bd.t};
    if (a.rep.is_zero() || b.rep.is_zero()) {
        auto h = homology(ca, target.s, target.t);
        return make_class(ca, target.s, target.t, f2::BitVec(h->basis->dim));
    }
    Cochain ra = rep_cochain(ca, a);
    LambdaPolynomial words;
    for (auto& [cell, w] : rep_cochain(cb, b).terms)
        words.push_back(w);
    std::sort(words.begin(), words.end());
    Cochain prod = right_multiply(ca, ra, words);
    return class_of(ca, prod);
}

LambdaEngine::MasseyResult LambdaEngine::massey(const ExtClass& a, const ExtClass& b,
                                                const ExtClass& c, uint64_t nullhomotopy_seed)
{
    ComplexSpec sphere = ComplexSpec::sphere(0);
    for (const ExtClass* x : {&a, &b, &c})
        if (x->complex_id != sphere.id())
            throw ComputeError("massey: all classes must live on the sphere");
    auto poly_of = [&](const ExtClass& x) {
        LambdaPolynomial p;
        for (auto& [cell, w] : rep_cochain(sphere, x).terms)
            p.push_back(w);
        std::sort(p.begin(), p.end());
        return p;
    };
    LambdaPolynomial pa = poly_of(a), pb = poly_of(b), pc = poly_of(c);
    // nullhomotopy d(H) = a b at (s_a+s_b-1, t_a+t_b)
    auto nullhomotopy = [&](const LambdaPolynomial& u, const LambdaPolynomial& v, Bidegree utbd,
                            uint64_t seed) {
        LambdaPolynomial prod = multiply(u, v);
        Bidegree pb2{utbd.s, utbd.t};
        auto src = make_basis(sphere, pb2.s - 1, pb2.t);
        auto dst = make_basis(sphere, pb2.s, pb2.t);
        f2::BitVec rhs(dst->dim);
        for (auto& w : prod)
            rhs.flip(dst->index_of(0, w));
        f2::BitMatrix d = differential_matrix(sphere, pb2.s - 1, pb2.t);
        auto sol = f2::solve(d.transposed(), rhs);
        if (!sol)
            throw ComputeError("massey: product is not a boundary (precondition fails)");
        f2::BitVec h = *sol;
        if (seed) {
            // randomize by a cocycle at the nullhomotopy bidegree
            f2::Subspace z = f2::kernel(differential_matrix(sphere, pb2.s - 1, pb2.t).transposed());
            std::mt19937_64 rng(seed);
            for (size_t i = 0; i < z.dim(); ++i)
                if (rng() & 1)
                    h ^= z.basis().row_vec(i);
        }
        // as polynomial
        LambdaPolynomial hp;
        for (uint32_t i : h.support())
            hp.push_back(*src->symbol(i).second);
        std::sort(hp.begin(), hp.end());
        return hp;
    };
    MasseyResult out;
    Bidegree ab{a.bd.s + b.bd.s, a.bd.t + b.bd.t};
    Bidegree bc{b.bd.s + c.bd.s, b.bd.t + c.bd.t};
    LambdaPolynomial H = nullhomotopy(pa, pb, ab, nullhomotopy_seed);
    LambdaPolynomial K = nullhomotopy(pb, pc, bc, nullhomotopy_seed ? nullhomotopy_seed + 1 : 0);
    // value = a·K + H·c
    LambdaPolynomial val = poly_add(multiply(pa, K), multiply(H, pc));
    Bidegree vb{a.bd.s + b.bd.s + c.bd.s - 1, a.bd.t + b.bd.t + c.bd.t};
    Cochain vc;
    vc.bd = vb;
    for (auto& w : val)
        vc.terms.emplace_back(0, w);
    out.defined = true;
    out.value = class_of(sphere, vc);
    // indeterminacy: a·Ext^{s_b+s_c-1, t_b+t_c} + Ext^{s_a+s_b-1, t_a+t_b}·c
    auto ht = homology(sphere, vb.s, vb.t);
    out.indeterminacy = f2::Subspace(ht->classes.dim());
    auto accumulate = [&](const ExtClass& fixed, Bidegree free_bd, bool fixed_on_left) {
        if (free_bd.s < 0)
            return;
        auto [dim, basis_classes] = ext_group(sphere, free_bd.s, free_bd.t);
        for (auto& y : basis_classes) {
            ExtClass prod = fixed_on_left ? this->multiply(fixed, y) : this->multiply(y, fixed);
            out.indeterminacy.insert(class_coords(*ht, prod.rep));
        }
    };
    accumulate(a, {b.bd.s + c.bd.s - 1, b.bd.t + c.bd.t}, true);
    accumulate(c, {a.bd.s + b.bd.s - 1, a.bd.t + b.bd.t}, false);
    out.zero_indeterminacy = out.indeterminacy.dim() == 0;
    return out;
}

std::optional<ExtClass> LambdaEngine::divisible_by(const ExtClass& x, const ExtClass& g)
{
    ComplexSpec cx = spec_by_id(x.complex_id);
    Bidegree yb{x.bd.s - g.bd.s, x.bd.t - g.bd.t};
    if (yb.s < 0 || yb.t < yb.s)
        return std::nullopt;
    auto hy = homology(cx, yb.s, yb.t);
    auto hx = homology(cx, x.bd.s, x.bd.t);
    if (hy->dim() == 0)
        return x.rep.is_zero() ? std::make_optional(make_class(cx, yb.s, yb.t, f2::BitVec(hy->basis->dim)))
                               : std::nullopt;
    f2::BitMatrix m(hy->classes.dim(), hx->classes.dim());
    auto [dy, ybasis] = ext_group(cx, yb.s, yb.t);
    for (size_t i = 0; i < ybasis.size(); ++i) {
        ExtClass prod = multiply(ybasis[i], g);
        m.set_row(i, class_coords(*hx, prod.rep));
    }
    auto sol = f2::solve(m.transposed(), class_coords(*hx, x.rep));
    if (!sol)
        return std::nullopt;
    f2::BitVec yrep(hy->basis->dim);
    for (uint32_t i : sol->support())
        yrep ^= hy->classes.basis().row_vec(i);
    return make_class(cx, yb.s, yb.t, std::move(yrep));
}

void LambdaEngine::cache_store(const std::string& path) const
{
    std::ostringstream payload;
    size_t count;
    {
        std::scoped_lock lk(mx_);
        count = cache_.size();
        for (const auto& [key, h] : cache_) {
            uint32_t len = uint32_t(key.size());
            payload.write(reinterpret_cast<const char*>(&len), 4);
            payload.write(key.data(), len);
            h->boundaries.basis().save(payload);
            h->classes.basis().save(payload);
            uint32_t n = uint32_t(h->ah.size());
            payload.write(reinterpret_cast<const char*>(&n), 4);
            for (int a : h->ah) {
                int32_t v = a;
                payload.write(reinterpret_cast<const char*>(&v), 4);
            }
        }
    }
    std::string body = payload.str();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cache_store: cannot open " + path);
    os.write("LEXC", 4);
    uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    uint64_t sum = fnv1a(body);
    os.write(reinterpret_cast<const char*>(&sum), 8);
    uint64_t cnt = count;
    os.write(reinterpret_cast<const char*>(&cnt), 8);
    os.write(body.data(), std::streamsize(body.size()));
}

void LambdaEngine::cache_load(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cache_load: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "LEXC")
        throw ComputeError("cache_load: bad magic");
    uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1)
        throw ComputeError("cache_load: unsupported version");
    uint64_t sum = 0, cnt = 0;
    is.read(reinterpret_cast<char*>(&sum), 8);
    is.read(reinterpret_cast<char*>(&cnt), 8);
    std::stringstream body;
    body << is.rdbuf();
    if (fnv1a(body.str()) != sum)
        throw ComputeError("cache_load: checksum mismatch");
    for (uint64_t i = 0; i < cnt; ++i) {
        uint32_t len = 0;
        body.read(reinterpret_cast<char*>(&len), 4);
        std::string key(len, '\0');
        body.read(key.data(), len);
        f2::BitMatrix bnd = f2::BitMatrix::load(body);
        f2::BitMatrix cls = f2::BitMatrix::load(body);
        uint32_t n = 0;
        body.read(reinterpret_cast<char*>(&n), 4);
        std::vector<int> ah(n);
        for (uint32_t j = 0; j < n; ++j) {
            int32_t v = 0;
            body.read(reinterpret_cast<char*>(&v), 4);
            ah[j] = v;
        }
        if (!body)
            throw ComputeError("cache_load: truncated record");
        auto bar = key.find('|');
        auto bar2 = key.find('|', bar + 1);
        if (bar == std::string::npos || bar2 == std::string::npos)
            throw ComputeError("cache_load: bad record key");
        std::string id = key.substr(0, bar);
        int s = std::stoi(key.substr(bar + 1, bar2 - bar - 1));
        int t = std::stoi(key.substr(bar2 + 1));
        ComplexSpec spec = spec_from_id(id);
        auto h = std::make_shared<HomologyData>();
        h->basis = make_basis(spec, s, t);
        if (bnd.cols() != h->basis->dim || cls.cols() != h->basis->dim)
            throw ComputeError("cache_load: record does not match basis (stale cache?)");
        h->boundaries = f2::Subspace::from_rref(std::move(bnd));
        h->classes = f2::Subspace::from_rref(std::move(cls));
        h->ah = std::move(ah);
        std::scoped_lock lk(mx_);
        specs_.emplace(id, spec);
        cache_.emplace(key, std::move(h));
    }
}

}  // namespace lamex
