#pragma once

#include "lamex/common.hpp"

#include <string>
#include <vector>

namespace lamex {

/* A monomial λ_{i_1}···λ_{i_s} in the mod-2 Lambda algebra, stored as the
 * index sequence (one byte per index; internal degrees stay below 256).
 * Lexicographic comparison of the byte strings is the canonical word order. */
using LambdaWord = std::basic_string<unsigned char>;

/* GF(2) sum of words: sorted, duplicate-free (eager cancellation). All terms
 * of a polynomial produced by the operations below share one bidegree. */
using LambdaPolynomial = std::vector<LambdaWord>;

inline int word_s(const LambdaWord& w)
{
    return int(w.size());
}
inline int word_t(const LambdaWord& w)
{
    int t = int(w.size());
    for (unsigned char c : w)
        t += c;
    return t;
}
Bidegree word_bidegree(const LambdaWord& w);

/* 2 i_k >= i_{k+1} for all consecutive pairs */
bool is_admissible(const LambdaWord& w);
/* indices 2..s admissible; the leading index is exempt */
bool is_tail_admissible(const LambdaWord& w);

/* GF(2) sum (symmetric difference, keeps the sorted invariant) */
LambdaPolynomial poly_add(const LambdaPolynomial& a, const LambdaPolynomial& b);
void poly_add_inplace(LambdaPolynomial& a, const LambdaPolynomial& b);

/* Admissible words of length s and internal degree t, lexicographically
 * ordered. Empty when none exist; (0,0) yields the empty word. */
LambdaPolynomial admissible_basis(int s, int t);

/* Admissible expansion of the word in the Lambda algebra. Idempotent on
 * admissible input. */
LambdaPolynomial normalize(const LambdaWord& w);
LambdaPolynomial normalize(const LambdaPolynomial& p);

/* Straighten only the tail (indices 2..s); the leading index is never part
 * of a rewrite. Errors on the empty word. */
LambdaPolynomial tail_normalize(const LambdaWord& w);

/* d(λ_n) as a list of index pairs (a, b) meaning λ_a λ_b */
const std::vector<std::pair<int, int>>& differential_letter(int n);

/* The Lambda differential, admissible output; extends linearly. */
LambdaPolynomial differential(const LambdaWord& w);
LambdaPolynomial differential(const LambdaPolynomial& p);

/* normalize(u·v) */
LambdaPolynomial multiply(const LambdaWord& u, const LambdaWord& v);
LambdaPolynomial multiply(const LambdaPolynomial& u, const LambdaPolynomial& v);

/* Textual word syntax: whitespace-separated decimal indices ("3 5 7"); the
 * empty word prints as "()". */
std::string word_str(const LambdaWord& w);
LambdaWord parse_word(const std::string& text);
std::string poly_str(const LambdaPolynomial& p);

}  // namespace lamex
