#include "lamex/lambda.hpp"

#include <algorithm>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace lamex {

Bidegree word_bidegree(const LambdaWord& w)
{
    return {word_s(w), word_t(w)};
}

bool is_admissible(const LambdaWord& w)
{
    for (size_t k = 0; k + 1 < w.size(); ++k)
        if (2 * int(w[k]) < int(w[k + 1]))
            return false;
    return true;
}

bool is_tail_admissible(const LambdaWord& w)
{
    for (size_t k = 1; k + 1 < w.size(); ++k)
        if (2 * int(w[k]) < int(w[k + 1]))
            return false;
    return true;
}

LambdaPolynomial poly_add(const LambdaPolynomial& a, const LambdaPolynomial& b)
{
    LambdaPolynomial out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void poly_add_inplace(LambdaPolynomial& a, const LambdaPolynomial& b)
{
    if (b.empty())
        return;
    a = poly_add(a, b);
}

LambdaPolynomial admissible_basis(int s, int t)
{
    if (s < 0 || t < s)
        return {};
    int deg = t - s;  // index sum
    if (deg > 255)
        throw ComputeError("admissible_basis: internal degree exceeds byte range");
    LambdaPolynomial out;
    LambdaWord cur;
    // lexicographic order falls out of ascending recursion on each index
    auto rec = [&](auto&& self, int remaining, int slots) -> void {
        if (slots == 0) {
            if (remaining == 0)
                out.push_back(cur);
            return;
        }
        int hi = cur.empty() ? remaining : std::min(remaining, 2 * int(cur.back()));
        for (int i = 0; i <= hi; ++i) {
            cur.push_back((unsigned char)i);
            self(self, remaining - i, slots - 1);
            cur.pop_back();
        }
    };
    rec(rec, deg, s);
    return out;
}

/* Relation table: λ_i λ_j (j > 2i) = Σ_k C(n-1-k, k) λ_{i+n-k} λ_{2i+1+k}
 * with n = j - 2i - 1. Output pairs are admissible. Insert-only cache. */
namespace {
    using Pair = std::pair<int, int>;
    std::shared_mutex g_rel_mx;
    std::unordered_map<uint32_t, std::vector<Pair>> g_rel;

    const std::vector<Pair>& pair_expand(int i, int j)
    {
        uint32_t key = uint32_t(i) << 16 | uint32_t(j);
        {
            std::shared_lock lk(g_rel_mx);
            auto it = g_rel.find(key);
            if (it != g_rel.end())
                return it->second;
        }
        int n = j - 2 * i - 1;
        std::vector<Pair> val;
        for (int k = 0; n - 1 - k >= k; ++k)
            if (binom2(n - 1 - k, k))
                val.emplace_back(i + n - k, 2 * i + 1 + k);
        std::unique_lock lk(g_rel_mx);
        return g_rel.emplace(key, std::move(val)).first->second;
    }

    std::shared_mutex g_dl_mx;
    std::unordered_map<int, std::vector<Pair>> g_dl;
}  // namespace

/* d(λ_n) = Σ_{j>=1} C(n-j, j) λ_{n-j} λ_{j-1}; always admissible. */
const std::vector<std::pair<int, int>>& differential_letter(int n)
{
    {
        std::shared_lock lk(g_dl_mx);
        auto it = g_dl.find(n);
        if (it != g_dl.end())
            return it->second;
    }
    std::vector<Pair> val;
    for (int j = 1; n - j >= j; ++j)
        if (binom2(n - j, j))
            val.emplace_back(n - j, j - 1);
    std::unique_lock lk(g_dl_mx);
    return g_dl.emplace(n, std::move(val)).first->second;
}

LambdaPolynomial normalize(const LambdaWord& w)
{
    LambdaPolynomial result;
    std::vector<LambdaWord> stack{w};
    LambdaPolynomial buf;
    while (!stack.empty()) {
        LambdaWord u = std::move(stack.back());
        stack.pop_back();
        // leftmost inadmissible pair
        size_t pos = u.size();
        for (size_t k = 0; k + 1 < u.size(); ++k)
            if (2 * int(u[k]) < int(u[k + 1])) {
                pos = k;
                break;
            }
        if (pos == u.size()) {
            buf.push_back(std::move(u));
            continue;
        }
        for (auto [a, b] : pair_expand(int(u[pos]), int(u[pos + 1]))) {
            LambdaWord v = u;
            v[pos] = (unsigned char)a;
            v[pos + 1] = (unsigned char)b;
            stack.push_back(std::move(v));
        }
    }
    std::sort(buf.begin(), buf.end());
    // GF(2): cancel duplicate words pairwise
    for (size_t a = 0; a < buf.size();) {
        size_t b = a + 1;
        while (b < buf.size() && buf[b] == buf[a])
            ++b;
        if ((b - a) & 1)
            result.push_back(std::move(buf[a]));
        a = b;
    }
    return result;
}

LambdaPolynomial normalize(const LambdaPolynomial& p)
{
    LambdaPolynomial out;
    for (const auto& w : p)
        poly_add_inplace(out, normalize(w));
    return out;
}

LambdaPolynomial tail_normalize(const LambdaWord& w)
{
    if (w.empty())
        throw ComputeError("tail_normalize: empty word has no leading index");
    LambdaPolynomial tails = normalize(w.substr(1));
    LambdaPolynomial out;
    out.reserve(tails.size());
    for (const auto& tail : tails) {
        LambdaWord v;
        v.reserve(tail.size() + 1);
        v.push_back(w[0]);
        v.append(tail);
        out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    return out;
}

LambdaPolynomial differential(const LambdaWord& w)
{
    LambdaPolynomial out;
    for (size_t p = 0; p < w.size(); ++p) {
        for (auto [a, b] : differential_letter(int(w[p]))) {
            LambdaWord v;
            v.reserve(w.size() + 1);
            v.append(w, 0, p);
            v.push_back((unsigned char)a);
            v.push_back((unsigned char)b);
            v.append(w, p + 1, LambdaWord::npos);
            poly_add_inplace(out, normalize(v));
        }
    }
    return out;
}

LambdaPolynomial differential(const LambdaPolynomial& p)
{
    LambdaPolynomial out;
    for (const auto& w : p)
        poly_add_inplace(out, differential(w));
    return out;
}

LambdaPolynomial multiply(const LambdaWord& u, const LambdaWord& v)
{
    LambdaWord w;
    w.reserve(u.size() + v.size());
    w.append(u);
    w.append(v);
    return normalize(w);
}

LambdaPolynomial multiply(const LambdaPolynomial& u, const LambdaPolynomial& v)
{
    LambdaPolynomial out;
    for (const auto& a : u)
        for (const auto& b : v)
            poly_add_inplace(out, multiply(a, b));
    return out;
}

std::string word_str(const LambdaWord& w)
{
    if (w.empty())
        return "()";
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i)
            out += ' ';
        out += std::to_string(int(w[i]));
    }
    return out;
}

LambdaWord parse_word(const std::string& text)
{
    LambdaWord w;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        if (tok == "()")
            continue;
        size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw ConfigError("bad lambda index '" + tok + "'");
        }
        if (used != tok.size() || v < 0 || v > 255)
            throw ConfigError("bad lambda index '" + tok + "'");
        w.push_back((unsigned char)v);
    }
    return w;
}

std::string poly_str(const LambdaPolynomial& p)
{
    if (p.empty())
        return "0";
    std::string out;
    for (size_t i = 0; i < p.size(); ++i) {
        if (i)
            out += " + ";
        out += word_str(p[i]);
    }
    return out;
}

}  // namespace lamex
