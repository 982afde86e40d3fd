#include "lamex/complexes.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace lamex {

namespace {
    /* column order inside a bidegree: cell descending, word ascending */
    bool term_less(const std::pair<int, LambdaWord>& a, const std::pair<int, LambdaWord>& b)
    {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    }
}

ComplexSpec ComplexSpec::sphere(int shift)
{
    ComplexSpec s;
    s.kind = ComplexKind::Sphere;
    s.shift = shift;
    s.validate();
    return s;
}

ComplexSpec ComplexSpec::stunted(int lower, int upper)
{
    ComplexSpec s;
    s.kind = ComplexKind::Stunted;
    s.lower = lower;
    s.upper = upper;
    s.validate();
    return s;
}

ComplexSpec ComplexSpec::twisted(std::vector<int> cells,
                                 std::map<std::pair<int, int>, LambdaPolynomial> twists)
{
    ComplexSpec s;
    s.kind = ComplexKind::Cells;
    s.cells = std::move(cells);
    s.twists = std::move(twists);
    s.validate();
    return s;
}

std::vector<int> ComplexSpec::cells_at(int s, int t) const
{
    // (n; I) exists iff word degree t - n >= s >= 0, i.e. n <= t - s
    std::vector<int> out;
    int top = t - s;
    switch (kind) {
        case ComplexKind::Sphere:
            if (shift <= top)
                out.push_back(shift);
            break;
        case ComplexKind::Stunted: {
            int hi = upper < 0 ? top : std::min(upper, top);
            for (int n = hi; n >= lower; --n)
                out.push_back(n);
            break;
        }
        case ComplexKind::Cells:
            for (auto it = cells.rbegin(); it != cells.rend(); ++it)
                if (*it <= top)
                    out.push_back(*it);
            break;
    }
    return out;
}

int ComplexSpec::min_cell() const
{
    switch (kind) {
        case ComplexKind::Sphere: return shift;
        case ComplexKind::Stunted: return lower;
        case ComplexKind::Cells: return cells.empty() ? 0 : cells.front();
    }
    return 0;
}

void ComplexSpec::validate() const
{
    switch (kind) {
        case ComplexKind::Sphere:
            if (shift < 0)
                throw ConfigError("sphere shift must be >= 0");
            break;
        case ComplexKind::Stunted:
            if (lower < 1 || (upper >= 0 && upper < lower))
                throw ConfigError("stunted range requires 1 <= lower <= upper");
            break;
        case ComplexKind::Cells: {
            if (cells.empty())
                throw ConfigError("cell complex needs at least one cell");
            if (!std::is_sorted(cells.begin(), cells.end()) ||
                std::adjacent_find(cells.begin(), cells.end()) != cells.end())
                throw ConfigError("cells must be strictly ascending");
            if (cells.front() < 1)
                throw ConfigError("cells must have dimension >= 1");
            for (auto& [key, poly] : twists) {
                auto [from, to] = key;
                if (!std::binary_search(cells.begin(), cells.end(), from) ||
                    !std::binary_search(cells.begin(), cells.end(), to))
                    throw ConfigError("twist endpoints must be cells of the complex");
                if (to >= from)
                    throw ConfigError("twists must lower the cell index");
                for (const auto& w : poly) {
                    if (word_s(w) != 1 || word_t(w) != from - to)
                        throw ConfigError(fmt::format(
                            "twist {}->{} must have homological length 1 and degree {}",
                            from, to, from - to));
                }
            }
            break;
        }
    }
}

std::string ComplexSpec::id() const
{
    switch (kind) {
        case ComplexKind::Sphere:
            return fmt::format("S{}", shift);
        case ComplexKind::Stunted:
            return upper < 0 ? fmt::format("P{}-inf", lower) : fmt::format("P{}-{}", lower, upper);
        case ComplexKind::Cells: {
            std::string s = "X";
            for (size_t i = 0; i < cells.size(); ++i)
                s += (i ? "," : "") + std::to_string(cells[i]);
            for (auto& [key, poly] : twists) {
                s += fmt::format(";{}>{}:", key.first, key.second);
                for (size_t i = 0; i < poly.size(); ++i)
                    s += (i ? "+" : "") + std::to_string(int(poly[i][0]));
            }
            return s;
        }
    }
    return "?";
}

ComplexSpec builtin_complex(const std::string& name)
{
    if (name == "sphere" || name == "S0")
        return ComplexSpec::sphere(0);
    if (name == "C-eta-7")
        return ComplexSpec::twisted({7, 9}, {{{9, 7}, {parse_word("1")}}});
    if (name.size() > 1 && name[0] == 'S') {
        try {
            return ComplexSpec::sphere(std::stoi(name.substr(1)));
        } catch (const std::exception&) {
        }
    }
    if (name.size() > 1 && name[0] == 'P') {
        auto dash = name.find('-');
        if (dash != std::string::npos) {
            try {
                int lo = std::stoi(name.substr(1, dash - 1));
                std::string rest = name.substr(dash + 1);
                int hi = rest == "inf" ? -1 : std::stoi(rest);
                return ComplexSpec::stunted(lo, hi);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception&) {
            }
        }
    }
    throw ConfigError("unknown builtin complex '" + name +
                      "' (expected sphere, S<n>, P<n>-<m>, P<n>-inf, C-eta-7, or a spec file)");
}

ComplexSpec parse_complex_spec(const std::string& text)
{
    std::istringstream is(text);
    std::string line, kind;
    int shift = 0, lower = 1, upper = -1;
    std::vector<int> cells;
    std::map<std::pair<int, int>, LambdaPolynomial> twists;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        auto fail = [&](const std::string& msg) {
            throw ConfigError(fmt::format("complex spec line {}: {}", lineno, msg));
        };
        if (key == "kind") {
            if (!(ls >> kind))
                fail("missing kind");
        } else if (key == "shift") {
            if (!(ls >> shift))
                fail("bad shift");
        } else if (key == "lower") {
            if (!(ls >> lower))
                fail("bad lower");
        } else if (key == "upper") {
            std::string v;
            if (!(ls >> v))
                fail("bad upper");
            upper = (v == "inf") ? -1 : std::stoi(v);
        } else if (key == "cells") {
            int c;
            while (ls >> c)
                cells.push_back(c);
        } else if (key == "twist") {
            int from, to;
            std::string colon;
            if (!(ls >> from >> to >> colon) || colon != ":")
                fail("twist syntax: twist <from> <to> : <word>");
            std::string word_text;
            std::getline(ls, word_text);
            LambdaWord w = parse_word(word_text);
            twists[{from, to}].push_back(w);
            std::sort(twists[{from, to}].begin(), twists[{from, to}].end());
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (kind == "sphere")
        return ComplexSpec::sphere(shift);
    if (kind == "stunted")
        return ComplexSpec::stunted(lower, upper);
    if (kind == "cells")
        return ComplexSpec::twisted(std::move(cells), std::move(twists));
    throw ConfigError("complex spec: kind must be sphere, stunted, or cells");
}

ComplexSpec load_complex_spec(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open complex spec file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_complex_spec(ss.str());
}

/* shared admissible-basis cache */
namespace {
    std::shared_mutex g_adm_mx;
    std::unordered_map<uint64_t, std::shared_ptr<const LambdaPolynomial>> g_adm;

    std::shared_ptr<const LambdaPolynomial> admissible_cached(int s, int t)
    {
        uint64_t key = (uint64_t(s) << 32) | uint64_t(uint32_t(t));
        {
            std::shared_lock lk(g_adm_mx);
            auto it = g_adm.find(key);
            if (it != g_adm.end())
                return it->second;
        }
        auto val = std::make_shared<const LambdaPolynomial>(admissible_basis(s, t));
        std::unique_lock lk(g_adm_mx);
        return g_adm.emplace(key, std::move(val)).first->second;
    }

    std::shared_mutex g_basis_mx;
    std::unordered_map<std::string, std::shared_ptr<const BasisTable>> g_basis;
}

size_t BasisTable::index_of(int cell, const LambdaWord& w) const
{
    for (const auto& b : blocks) {
        if (b.cell != cell)
            continue;
        auto it = std::lower_bound(b.words->begin(), b.words->end(), w);
        if (it == b.words->end() || *it != w)
            return dim;
        return b.offset + size_t(it - b.words->begin());
    }
    return dim;
}

std::pair<int, const LambdaWord*> BasisTable::symbol(size_t col) const
{
    for (const auto& b : blocks)
        if (col >= b.offset && col < b.offset + b.words->size())
            return {b.cell, &(*b.words)[col - b.offset]};
    throw ComputeError("BasisTable::symbol: column out of range");
}

std::shared_ptr<const BasisTable> make_basis(const ComplexSpec& spec, int s, int t)
{
    std::string key = fmt::format("{}|{}|{}", spec.id(), s, t);
    {
        std::shared_lock lk(g_basis_mx);
        auto it = g_basis.find(key);
        if (it != g_basis.end())
            return it->second;
    }
    auto table = std::make_shared<BasisTable>();
    table->bd = {s, t};
    size_t offset = 0;
    for (int cell : spec.cells_at(s, t)) {
        auto words = admissible_cached(s, t - cell);
        if (words->empty())
            continue;
        table->blocks.push_back({cell, offset, words});
        offset += words->size();
    }
    table->dim = offset;
    std::unique_lock lk(g_basis_mx);
    return g_basis.emplace(key, std::move(table)).first->second;
}

namespace {
    uint64_t sat_add(uint64_t a, uint64_t b)
    {
        uint64_t c = a + b;
        const uint64_t cap = uint64_t(1) << 62;
        return c > cap ? cap : c;
    }

    /* admissible words of length s, index sum m, first index <= b */
    uint64_t count_adm(int s, int m, int b)
    {
        if (s == 0)
            return m == 0 ? 1 : 0;
        if (m < 0)
            return 0;
        b = std::min(b, m);
        static std::shared_mutex mx;
        static std::unordered_map<uint64_t, uint64_t> memo;
        uint64_t key = (uint64_t(s) << 40) | (uint64_t(m) << 20) | uint64_t(b);
        {
            std::shared_lock lk(mx);
            auto it = memo.find(key);
            if (it != memo.end())
                return it->second;
        }
        uint64_t total = 0;
        for (int i = 0; i <= b; ++i)
            total = sat_add(total, count_adm(s - 1, m - i, 2 * i));
        std::unique_lock lk(mx);
        memo.emplace(key, total);
        return total;
    }
}

uint64_t dim_estimate(const ComplexSpec& spec, int s, int t)
{
    if (s < 0)
        return 0;
    uint64_t total = 0;
    for (int cell : spec.cells_at(s, t)) {
        int m = t - cell - s;
        if (m >= 0)
            total = sat_add(total, count_adm(s, m, m));
    }
    return total;
}

Cochain Cochain::from_terms(Bidegree bd, std::vector<std::pair<int, LambdaWord>> terms)
{
    Cochain c;
    c.bd = bd;
    std::sort(terms.begin(), terms.end(), term_less);
    for (size_t a = 0; a < terms.size();) {
        size_t b = a + 1;
        while (b < terms.size() && terms[b] == terms[a])
            ++b;
        if ((b - a) & 1)
            c.terms.push_back(std::move(terms[a]));
        a = b;
    }
    return c;
}

Cochain cochain_add(const Cochain& a, const Cochain& b)
{
    if (a.terms.empty())
        return b;
    if (b.terms.empty())
        return a;
    if (a.bd != b.bd)
        throw ComputeError("cochain_add: bidegree mismatch");
    Cochain out;
    out.bd = a.bd;
    std::set_symmetric_difference(a.terms.begin(), a.terms.end(), b.terms.begin(), b.terms.end(),
                                  std::back_inserter(out.terms), term_less);
    return out;
}

std::string cochain_str(const Cochain& c)
{
    if (c.terms.empty())
        return "0";
    std::string out;
    for (size_t i = 0; i < c.terms.size(); ++i) {
        if (i)
            out += " + ";
        out += fmt::format("({})", c.terms[i].first);
        if (!c.terms[i].second.empty())
            out += " " + word_str(c.terms[i].second);
    }
    return out;
}

f2::BitVec cochain_to_vec(const Cochain& c, const BasisTable& basis)
{
    f2::BitVec v(basis.dim);
    for (const auto& [cell, w] : c.terms) {
        size_t i = basis.index_of(cell, w);
        if (i >= basis.dim)
            throw ComputeError("cochain term not in basis: " + cochain_str(c));
        v.flip(i);
    }
    return v;
}

Cochain vec_to_cochain(const f2::BitVec& v, const BasisTable& basis)
{
    std::vector<std::pair<int, LambdaWord>> terms;
    for (uint32_t i : v.support()) {
        auto [cell, w] = basis.symbol(i);
        terms.emplace_back(cell, *w);
    }
    return Cochain::from_terms(basis.bd, std::move(terms));
}

f2::SparseVec cochain_to_sparse(const Cochain& c, const BasisTable& basis)
{
    f2::SparseVec v;
    v.reserve(c.terms.size());
    for (const auto& [cell, w] : c.terms) {
        size_t i = basis.index_of(cell, w);
        if (i >= basis.dim)
            throw ComputeError("cochain term not in basis");
        v.push_back(uint32_t(i));
    }
    std::sort(v.begin(), v.end());
    return v;
}

Cochain symbol_differential(const ComplexSpec& spec, int cell, const LambdaWord& w)
{
    Bidegree bd{word_s(w) + 1, cell + word_t(w)};
    std::vector<std::pair<int, LambdaWord>> terms;
    // internal part: (cell; d w)
    for (auto& u : differential(w))
        terms.emplace_back(cell, u);
    switch (spec.kind) {
        case ComplexKind::Sphere:
            break;
        case ComplexKind::Stunted:
            // cell-lowering part from d(λ_cell): λ_a λ_b tail-normalized
            for (auto [a, b] : differential_letter(cell)) {
                if (a < spec.lower)
                    continue;
                LambdaWord bw;
                bw.reserve(w.size() + 1);
                bw.push_back((unsigned char)b);
                bw.append(w);
                for (auto& u : normalize(bw))
                    terms.emplace_back(a, u);
            }
            break;
        case ComplexKind::Cells:
            for (auto& [key, poly] : spec.twists) {
                if (key.first != cell)
                    continue;
                for (const auto& tw : poly) {
                    LambdaWord bw;
                    bw.reserve(w.size() + 1);
                    bw.append(tw);
                    bw.append(w);
                    for (auto& u : normalize(bw))
                        terms.emplace_back(key.second, u);
                }
            }
            break;
    }
    return Cochain::from_terms(bd, std::move(terms));
}

Cochain total_differential(const ComplexSpec& spec, const Cochain& c)
{
    Cochain out;
    out.bd = {c.bd.s + 1, c.bd.t};
    for (const auto& [cell, w] : c.terms)
        out = cochain_add(out, symbol_differential(spec, cell, w));
    out.bd = {c.bd.s + 1, c.bd.t};
    return out;
}

f2::BitMatrix differential_matrix(const ComplexSpec& spec, int s, int t)
{
    auto src = make_basis(spec, s, t);
    auto dst = make_basis(spec, s + 1, t);
    f2::BitMatrix m(src->dim, dst->dim);
    for (const auto& blk : src->blocks) {
        for (size_t j = 0; j < blk.words->size(); ++j) {
            Cochain d = symbol_differential(spec, blk.cell, (*blk.words)[j]);
            for (const auto& [cell, w] : d.terms) {
                size_t col = dst->index_of(cell, w);
                if (col >= dst->dim)
                    throw ComputeError("differential leaves basis range");
                m.flip(blk.offset + j, col);
            }
        }
    }
    return m;
}

Cochain right_multiply(const ComplexSpec& spec, const Cochain& c, const LambdaPolynomial& x)
{
    (void)spec;
    if (x.empty())
        return Cochain{};
    Bidegree xb = word_bidegree(x.front());
    Cochain out;
    out.bd = {c.bd.s + xb.s, c.bd.t + xb.t};
    std::vector<std::pair<int, LambdaWord>> terms;
    for (const auto& [cell, w] : c.terms)
        for (const auto& u : x) {
            LambdaWord prod;
            prod.reserve(w.size() + u.size());
            prod.append(w);
            prod.append(u);
            for (auto& nw : normalize(prod))
                terms.emplace_back(cell, nw);
        }
    auto r = Cochain::from_terms(out.bd, std::move(terms));
    r.bd = out.bd;
    return r;
}

Cochain CellRangeMap::apply(const Cochain& c) const
{
    Cochain out;
    out.bd = c.bd;
    for (const auto& [cell, w] : c.terms)
        if (cell >= keep_lo && (keep_hi < 0 || cell <= keep_hi))
            out.terms.emplace_back(cell, w);
    return out;
}

f2::BitMatrix CellRangeMap::matrix(int s, int t) const
{
    auto sb = make_basis(src, s, t);
    auto db = make_basis(dst, s, t);
    f2::BitMatrix m(sb->dim, db->dim);
    for (const auto& blk : sb->blocks) {
        if (blk.cell < keep_lo || (keep_hi >= 0 && blk.cell > keep_hi))
            continue;
        for (size_t j = 0; j < blk.words->size(); ++j) {
            size_t col = db->index_of(blk.cell, (*blk.words)[j]);
            if (col >= db->dim)
                throw ComputeError("truncation image symbol missing");
            m.flip(blk.offset + j, col);
        }
    }
    return m;
}

namespace {
    ComplexSpec truncate_spec(const ComplexSpec& spec, int lo, int hi /* -1 = spec upper */)
    {
        switch (spec.kind) {
            case ComplexKind::Sphere:
                if (spec.shift < lo || (hi >= 0 && spec.shift > hi))
                    throw ConfigError("truncation drops the only cell");
                return spec;
            case ComplexKind::Stunted: {
                int upper = hi < 0 ? spec.upper : hi;
                ComplexSpec out = ComplexSpec::stunted(std::max(spec.lower, lo), upper);
                return out;
            }
            case ComplexKind::Cells: {
                std::vector<int> cells;
                for (int c : spec.cells)
                    if (c >= lo && (hi < 0 || c <= hi))
                        cells.push_back(c);
                std::map<std::pair<int, int>, LambdaPolynomial> twists;
                for (auto& [key, poly] : spec.twists)
                    if (key.first >= lo && (hi < 0 || key.first <= hi) && key.second >= lo &&
                        (hi < 0 || key.second <= hi))
                        twists[key] = poly;
                if (cells.size() == 1 && twists.empty())
                    return ComplexSpec::sphere(cells[0]);
                return ComplexSpec::twisted(std::move(cells), std::move(twists));
            }
        }
        throw ComputeError("unreachable");
    }
}

CellRangeMap inclusion_map(const ComplexSpec& spec, int k)
{
    // the lower segment is differential-closed (the rule only lowers cells)
    CellRangeMap f;
    f.src = truncate_spec(spec, spec.min_cell(), k);
    f.dst = spec;
    f.keep_lo = spec.min_cell();
    f.keep_hi = k;
    return f;
}

CellRangeMap quotient_map(const ComplexSpec& spec, int k)
{
    CellRangeMap f;
    f.src = spec;
    f.dst = truncate_spec(spec, k, -1);
    f.keep_lo = k;
    f.keep_hi = -1;
    return f;
}

bool verify_chain_map(const CellRangeMap& f, int s, int t)
{
    auto sb = make_basis(f.src, s, t);
    for (const auto& blk : sb->blocks) {
        for (const auto& w : *blk.words) {
            Cochain sym;
            sym.bd = {s, t};
            sym.terms.emplace_back(blk.cell, w);
            Cochain lhs = f.apply(total_differential(f.src, sym));
            Cochain rhs = total_differential(f.dst, f.apply(sym));
            if (!(lhs == rhs))
                return false;
        }
    }
    return true;
}

LambdaPolynomial transfer_chain(const Cochain& c)
{
    LambdaPolynomial out;
    for (const auto& [cell, w] : c.terms) {
        LambdaWord full;
        full.reserve(w.size() + 1);
        full.push_back((unsigned char)cell);
        full.append(w);
        poly_add_inplace(out, normalize(full));
    }
    return out;
}

bool check_d_squared(const ComplexSpec& spec, int s, int t)
{
    auto basis = make_basis(spec, s, t);
    for (const auto& blk : basis->blocks)
        for (const auto& w : *blk.words) {
            Cochain sym;
            sym.bd = {s, t};
            sym.terms.emplace_back(blk.cell, w);
            if (!total_differential(spec, total_differential(spec, sym)).zero())
                return false;
        }
    return true;
}

}  // namespace lamex
