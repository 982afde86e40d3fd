#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lamex {

using int1d = std::vector<int>;
using uint32_1d = std::vector<uint32_t>;

/* Error raised on malformed user input (specs, fixtures, CLI expressions). */
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Error raised when a computation cannot proceed (bad ranges, cache mismatch,
 * internal identity violated). */
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Raised when a computation would exceed its configured memory/size budget. */
struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Bidegree (s,t): s = homological filtration, t = internal degree. */
struct Bidegree {
    int s = 0;
    int t = 0;
    friend bool operator==(const Bidegree&, const Bidegree&) = default;
    friend auto operator<=>(const Bidegree&, const Bidegree&) = default;
    int stem() const { return t - s; }
};

/* C(a,b) mod 2 by the Lucas criterion. Zero for negative arguments. */
inline bool binom2(long long a, long long b)
{
    if (b < 0 || a < 0 || b > a)
        return false;
    return ((a - b) & b) == 0;
}

}  // namespace lamex
