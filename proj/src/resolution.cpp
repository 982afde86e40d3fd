#include "lamex/resolution.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lamex {

FreeElt free_add(const FreeElt& a, const FreeElt& b)
{
    FreeElt out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

size_t Resolution::Basis::index_of(const Milnor& m, uint32_t gen) const
{
    for (const auto& b : blocks)
        if (b.gen == gen) {
            auto it = std::lower_bound(b.milnor->begin(), b.milnor->end(), m);
            if (it == b.milnor->end() || !(*it == m))
                return dim;
            return b.offset + size_t(it - b.milnor->begin());
        }
    return dim;
}

std::pair<Milnor, uint32_t> Resolution::Basis::decode(size_t col) const
{
    for (const auto& b : blocks)
        if (col >= b.offset && col < b.offset + b.milnor->size())
            return {(*b.milnor)[col - b.offset], b.gen};
    throw ComputeError("Resolution::Basis::decode: column out of range");
}

Resolution::Basis Resolution::basis(int s, int t) const
{
    Basis out;
    if (s < 0 || s >= int(gens_.size()))
        return out;
    size_t offset = 0;
    for (uint32_t g = 0; g < gens_[s].size(); ++g) {
        int dt = t - gens_[s][g].t;
        if (dt < 0)
            continue;
        const auto& mb = milnor_basis(dt);
        if (mb.empty())
            continue;
        out.blocks.push_back({g, gens_[s][g].t, offset, &mb});
        offset += mb.size();
    }
    out.dim = offset;
    return out;
}

f2::BitVec Resolution::elt_to_vec(const FreeElt& e, const Basis& basis) const
{
    f2::BitVec v(basis.dim);
    for (const auto& [m, g] : e) {
        size_t i = basis.index_of(m, g);
        if (i >= basis.dim)
            throw ComputeError("free element outside basis");
        v.flip(i);
    }
    return v;
}

FreeElt Resolution::vec_to_elt(const f2::BitVec& v, const Basis& basis) const
{
    FreeElt e;
    for (uint32_t i : v.support())
        e.push_back(basis.decode(i));
    std::sort(e.begin(), e.end());
    return e;
}

FreeElt Resolution::d_elt(int s, const FreeElt& e) const
{
    FreeElt out;
    for (const auto& [a, g] : e) {
        const ResGen& gen = gens_[s][g];
        for (const auto& [m, g2] : gen.dg) {
            FreeElt part;
            for (const Milnor& p : milnor_mul(a, m))
                part.emplace_back(p, g2);
            std::sort(part.begin(), part.end());
            out = free_add(out, part);
        }
    }
    return out;
}

std::vector<int> Resolution::module_cells(int t) const
{
    std::vector<int> out;
    if (module_.has_cell(t))
        out.push_back(t);
    return out;
}

int Resolution::ext_dim(int s, int t) const
{
    if (t < 0 || s < 0)
        return 0;
    if (s > s_done_ || t > t_done_)
        throw ComputeError(fmt::format("resolution {}: ({},{}) beyond computed range ({},{})",
                                       id(), s, t, s_done_, t_done_));
    auto it = dims_.find({s, t});
    return it == dims_.end() ? 0 : it->second;
}

std::vector<uint32_t> Resolution::gens_at(int s, int t) const
{
    std::vector<uint32_t> out;
    if (s < 0 || s >= int(gens_.size()))
        return out;
    for (uint32_t g = 0; g < gens_[s].size(); ++g)
        if (gens_[s][g].t == t)
            out.push_back(g);
    return out;
}

const std::vector<ResGen>& Resolution::gens(int s) const
{
    static const std::vector<ResGen> empty;
    if (s < 0 || s >= int(gens_.size()))
        return empty;
    return gens_[s];
}

/* One degree step: for t fixed, walk s upward. The kernel of d_{s-1} at
 * internal degree t (computed in the previous substep) is compared against
 * the image of d_s over the already-known generators; what survives becomes
 * the new generators at (s,t), with the reduced kernel vectors as their
 * differentials. Minimality is automatic (no unit coefficients can occur). */
void Resolution::extend(int s_max, int t_max)
{
    if (s_done_ >= 0 && s_max > s_done_) {
        // homological widening restarts the sweep
        gens_.clear();
        dims_.clear();
        s_done_ = t_done_ = -1;
        {
            std::scoped_lock lk(mx_);
            solver_cache_.clear();
            solver_lru_.clear();
            solver_bytes_ = 0;
        }
    }
    int smax = std::max(s_max, s_done_);
    if (t_max <= t_done_)
        return;
    gens_.resize(size_t(smax) + 1);

    for (int t = t_done_ + 1; t <= t_max; ++t) {
        for (int c : module_.min_generators(t))
            gens_[0].push_back(ResGen{0, t, FreeElt{{Milnor{}, uint32_t(c)}}});
        if (int n = int(gens_at(0, t).size()))
            dims_[{0, t}] = n;

        f2::BitMatrix prev_kernel;  // kernel of d_{s-1} at degree t
        Basis prev_src;             // basis of F_{s-1,t} it is written in
        for (int s = 0; s <= smax; ++s) {
            Basis src = basis(s, t);
            size_t dst_dim = s == 0 ? module_cells(t).size() : prev_src.dim;
            const bool want_kernel = s < smax;
            // augmented matrix [D | I]; identity part only when the kernel
            // of this level is still needed
            f2::BitMatrix aug(src.dim, dst_dim + (want_kernel ? src.dim : 0));
            for (const auto& blk : src.blocks) {
                const ResGen& g = gens_[s][blk.gen];
                for (size_t j = 0; j < blk.milnor->size(); ++j) {
                    size_t row = blk.offset + j;
                    const Milnor& a = (*blk.milnor)[j];
                    if (s == 0) {
                        int c = int(g.dg[0].second);
                        if (module_.act(a, c))
                            aug.set(row, 0);  // the only cell in degree t
                    } else {
                        for (const auto& [m, g2] : g.dg)
                            for (const Milnor& p : milnor_mul(a, m)) {
                                size_t col = prev_src.index_of(p, g2);
                                if (col >= prev_src.dim)
                                    throw ComputeError("resolution: differential escapes basis");
                                aug.flip(row, col);
                            }
                    }
                    if (want_kernel)
                        aug.set(row, dst_dim + row);
                }
            }
            auto pivots = aug.rref_left(dst_dim);
            // pivot rows carry the image echelon; the rest are kernel vectors
            f2::BitMatrix img_rows(pivots.size(), dst_dim);
            for (size_t i = 0; i < pivots.size(); ++i)
                img_rows.set_row(i, aug.extract(i, 0, dst_dim));
            f2::Subspace image = f2::Subspace::from_rref(std::move(img_rows));
            f2::BitMatrix kernel(want_kernel ? aug.rows() - pivots.size() : 0, src.dim);
            if (want_kernel)
                for (size_t i = pivots.size(); i < aug.rows(); ++i)
                    kernel.set_row(i - pivots.size(), aug.extract(i, dst_dim, src.dim));
            // new generators at (s,t) kill coker(im d_s) inside ker d_{s-1}
            if (s >= 1 && prev_kernel.rows() > 0) {
                int added = 0;
                for (size_t i = 0; i < prev_kernel.rows(); ++i) {
                    f2::BitVec v = image.reduce(prev_kernel.row_vec(i));
                    if (v.is_zero())
                        continue;
                    image.insert(v);
                    gens_[s].push_back(ResGen{s, t, vec_to_elt(v, prev_src)});
                    ++added;
                }
                if (added)
                    dims_[{s, t}] = added;
            }
            if (!want_kernel)
                break;  // nothing below needs this level's kernel
            // pad kernel vectors to include columns of generators added above
            Basis full = basis(s, t);
            if (full.dim != src.dim) {
                f2::BitMatrix padded(kernel.rows(), full.dim);
                for (size_t i = 0; i < kernel.rows(); ++i)
                    for (uint32_t c : kernel.row_vec(i).support())
                        padded.set(i, c);  // old columns form a prefix
                kernel = std::move(padded);
                src = std::move(full);
            }
            prev_kernel = std::move(kernel);
            prev_src = std::move(src);
        }
        t_done_ = t;
    }
    s_done_ = smax;
}

std::optional<f2::BitVec> Resolution::Solver::solve(const f2::BitVec& v) const
{
    if (v.size() != dst_dim)
        throw ComputeError("Solver::solve: size mismatch");
    f2::BitVec r = v;
    f2::BitVec w(src_dim);
    for (size_t i = 0; i < pivots.size(); ++i)
        if (r.get(pivots[i])) {
            f2::xor_into(r.data(), img.row(i), img.words_per_row());
            f2::xor_into(w.data(), wit.row(i), wit.words_per_row());
        }
    if (!r.is_zero())
        return std::nullopt;
    return w;
}

f2::BitVec Resolution::Solver::reduce(f2::BitVec v) const
{
    for (size_t i = 0; i < pivots.size(); ++i)
        if (v.get(pivots[i]))
            f2::xor_into(v.data(), img.row(i), img.words_per_row());
    return v;
}

size_t Resolution::Solver::bytes() const
{
    return img.rows() * img.words_per_row() * 8 + wit.rows() * wit.words_per_row() * 8 +
           kernel_rows.rows() * kernel_rows.words_per_row() * 8;
}

std::shared_ptr<const Resolution::Solver> Resolution::build_solver(int s, int t) const
{
    auto sol = std::make_shared<Solver>();
    Basis src = basis(s, t);
    Basis dst_basis;
    size_t dst_dim;
    if (s == 0) {
        dst_dim = module_cells(t).size();
    } else {
        dst_basis = basis(s - 1, t);
        dst_dim = dst_basis.dim;
    }
    sol->src_dim = src.dim;
    sol->dst_dim = dst_dim;
    f2::BitMatrix aug(src.dim, dst_dim + src.dim);
    for (const auto& blk : src.blocks) {
        const ResGen& g = gens_[s][blk.gen];
        for (size_t j = 0; j < blk.milnor->size(); ++j) {
            size_t row = blk.offset + j;
            const Milnor& a = (*blk.milnor)[j];
            if (s == 0) {
                int c = int(g.dg[0].second);
                if (module_.act(a, c))
                    aug.set(row, 0);
            } else {
                for (const auto& [m, g2] : g.dg)
                    for (const Milnor& p : milnor_mul(a, m))
                        aug.flip(row, dst_basis.index_of(p, g2));
            }
            aug.set(row, dst_dim + row);
        }
    }
    auto pivots = aug.rref_left(dst_dim);
    // pivot rows form the image echelon with witnesses; the rest have zero
    // image part and their witnesses span the kernel
    sol->pivots = pivots;
    sol->img = f2::BitMatrix(pivots.size(), dst_dim);
    sol->wit = f2::BitMatrix(pivots.size(), src.dim);
    for (size_t i = 0; i < pivots.size(); ++i) {
        sol->img.set_row(i, aug.extract(i, 0, dst_dim));
        sol->wit.set_row(i, aug.extract(i, dst_dim, src.dim));
    }
    sol->kernel_rows = f2::BitMatrix(aug.rows() - pivots.size(), src.dim);
    for (size_t i = pivots.size(); i < aug.rows(); ++i)
        sol->kernel_rows.set_row(i - pivots.size(), aug.extract(i, dst_dim, src.dim));
    return sol;
}

std::shared_ptr<const Resolution::Solver> Resolution::solver(int s, int t)
{
    std::string key = fmt::format("{}|{}", s, t);
    {
        std::scoped_lock lk(mx_);
        auto it = solver_cache_.find(key);
        if (it != solver_cache_.end())
            return it->second;
    }
    auto sol = build_solver(s, t);
    std::scoped_lock lk(mx_);
    auto [it, fresh] = solver_cache_.emplace(key, sol);
    if (fresh) {
        solver_lru_.push_back(key);
        solver_bytes_ += sol->bytes();
        while (solver_bytes_ > solver_budget_ && solver_lru_.size() > 1) {
            auto victim = solver_lru_.front();
            solver_lru_.pop_front();
            if (victim == key)
                continue;
            auto vit = solver_cache_.find(victim);
            if (vit != solver_cache_.end()) {
                solver_bytes_ -= vit->second->bytes();
                solver_cache_.erase(vit);
            }
        }
    }
    return it->second;
}

void Resolution::set_solver_budget(size_t bytes)
{
    std::scoped_lock lk(mx_);
    solver_budget_ = bytes;
}

void Resolution::save(const std::string& path) const
{
    std::ostringstream payload;
    auto put_u32 = [&](uint32_t v) { payload.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(uint32_t(s_done_ + 1));
    put_u32(uint32_t(t_done_ + 1));
    put_u32(uint32_t(gens_.size()));
    for (const auto& level : gens_) {
        put_u32(uint32_t(level.size()));
        for (const ResGen& g : level) {
            put_u32(uint32_t(g.s));
            put_u32(uint32_t(g.t));
            put_u32(uint32_t(g.dg.size()));
            for (const auto& [m, idx] : g.dg) {
                for (auto v : m.r)
                    payload.write(reinterpret_cast<const char*>(&v), 2);
                put_u32(idx);
            }
        }
    }
    std::string body = payload.str();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("Resolution::save: cannot open " + path);
    os.write("LRES", 4);
    uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    uint32_t idlen = uint32_t(id().size());
    os.write(reinterpret_cast<const char*>(&idlen), 4);
    os.write(id().data(), idlen);
    uint64_t sum = 14695981039346656037ull;
    for (unsigned char c : body) {
        sum ^= c;
        sum *= 1099511628211ull;
    }
    os.write(reinterpret_cast<const char*>(&sum), 8);
    uint64_t len = body.size();
    os.write(reinterpret_cast<const char*>(&len), 8);
    os.write(body.data(), std::streamsize(body.size()));
}

bool Resolution::load(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        return false;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "LRES")
        throw ComputeError("Resolution::load: bad magic");
    uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1)
        throw ComputeError("Resolution::load: unsupported version");
    uint32_t idlen = 0;
    is.read(reinterpret_cast<char*>(&idlen), 4);
    std::string rid(idlen, '\0');
    is.read(rid.data(), idlen);
    if (rid != id())
        throw ComputeError("Resolution::load: cache belongs to " + rid);
    uint64_t sum = 0, len = 0;
    is.read(reinterpret_cast<char*>(&sum), 8);
    is.read(reinterpret_cast<char*>(&len), 8);
    std::string body(len, '\0');
    is.read(body.data(), std::streamsize(len));
    if (!is)
        throw ComputeError("Resolution::load: truncated");
    uint64_t check = 14695981039346656037ull;
    for (unsigned char c : body) {
        check ^= c;
        check *= 1099511628211ull;
    }
    if (check != sum)
        throw ComputeError("Resolution::load: checksum mismatch");
    std::istringstream ps(body);
    auto get_u32 = [&]() {
        uint32_t v = 0;
        ps.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    int sdone = int(get_u32()) - 1;
    int tdone = int(get_u32()) - 1;
    gens_.assign(get_u32(), {});
    dims_.clear();
    for (auto& level : gens_) {
        uint32_t n = get_u32();
        level.reserve(n);
        for (uint32_t i = 0; i < n; ++i) {
            ResGen g;
            g.s = int(get_u32());
            g.t = int(get_u32());
            uint32_t terms = get_u32();
            g.dg.reserve(terms);
            for (uint32_t j = 0; j < terms; ++j) {
                Milnor m;
                for (auto& v : m.r)
                    ps.read(reinterpret_cast<char*>(&v), 2);
                uint32_t idx = get_u32();
                g.dg.emplace_back(m, idx);
            }
            level.push_back(std::move(g));
            dims_[{level.back().s, level.back().t}]++;
        }
    }
    if (!ps)
        throw ComputeError("Resolution::load: malformed payload");
    s_done_ = sdone;
    t_done_ = tdone;
    return true;
}

ChainLift::ChainLift(std::shared_ptr<Resolution> src, std::shared_ptr<Resolution> dst, RClass x)
    : src_(std::move(src)), dst_(std::move(dst)), x_(std::move(x))
{
    if (x_.res_id != src_->id())
        throw ComputeError("ChainLift: class does not live on the source resolution");
    s0_ = x_.bd.s;
    t0_ = x_.bd.t;
}

ChainLift::ChainLift(std::shared_ptr<Resolution> src, std::shared_ptr<Resolution> dst, int keep_lo,
                     int keep_hi)
    : src_(std::move(src)), dst_(std::move(dst)), module_map_(true), keep_lo_(keep_lo),
      keep_hi_(keep_hi)
{
}

const FreeElt& ChainLift::value(int s, uint32_t gen)
{
    auto key = std::make_pair(s, gen);
    auto it = values_.find(key);
    if (it != values_.end())
        return it->second;
    FreeElt v = compute(s, gen);
    return values_.emplace(key, std::move(v)).first->second;
}

FreeElt ChainLift::compute(int s, uint32_t gen)
{
    const ResGen& g = src_->gens(s)[gen];
    if (!module_map_) {
        if (s < s0_)
            throw ComputeError("ChainLift: level below the cocycle's filtration");
        if (s == s0_) {
            // base: x̂(g) · g0 of the destination
            FreeElt out;
            if (g.t == t0_) {
                auto at = src_->gens_at(s0_, t0_);
                for (size_t i = 0; i < at.size(); ++i)
                    if (at[i] == gen && x_.coords.get(i)) {
                        if (dst_->gens(0).empty())
                            throw ComputeError("ChainLift: destination has no bottom generator");
                        out.emplace_back(Milnor{}, 0);
                    }
            }
            return out;
        }
    } else if (s == 0) {
        // module map: cell kept -> matching generator of the destination
        int cell = int(g.dg[0].second);
        FreeElt out;
        if (cell >= keep_lo_ && (keep_hi_ < 0 || cell <= keep_hi_)) {
            // destination generator whose d_0 hits the same cell
            for (uint32_t h = 0; h < dst_->gens(0).size(); ++h)
                if (int(dst_->gens(0)[h].dg[0].second) == cell && dst_->gens(0)[h].t == g.t) {
                    out.emplace_back(Milnor{}, h);
                    return out;
                }
            // the cell is not a minimal generator of the destination: solve
            f2::BitVec rhs(dst_->module().has_cell(cell) ? 1 : 0);
            if (rhs.size() == 0)
                throw ComputeError("ChainLift: image cell missing downstream");
            rhs.set(0);
            auto sol = dst_->solver(0, g.t)->solve(rhs);
            if (!sol)
                throw ComputeError("ChainLift: module map has no lift at level 0");
            auto b = dst_->basis(0, g.t);
            return dst_->vec_to_elt(*sol, b);
        }
        return out;
    }
    // recursive step: solve d(value) = value(d g)
    int k = module_map_ ? s : s - s0_;
    int tt = g.t - t0_;
    FreeElt rhs;
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
    if (rhs.empty())
        return {};
    auto dstb = dst_->basis(k - 1, tt);
    f2::BitVec rv = dst_->elt_to_vec(rhs, dstb);
    auto sol = dst_->solver(k, tt)->solve(rv);
    if (!sol)
        throw ComputeError("ChainLift: no preimage (acyclicity violated?)");
    return dst_->vec_to_elt(*sol, dst_->basis(k, tt));
}

}  // namespace lamex
