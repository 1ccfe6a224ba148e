#pragma once

// Internal 128-bit float alias for the oscillatory transient sums, whose
// beta^((j-i)/2) prefactor amplifies cancellation beyond what double can
// absorb. On x86 this is GCC/Clang __float128 via libquadmath; on aarch64
// long double is already IEEE binary128.

#if defined(__x86_64__) || defined(__i386__)

#include <quadmath.h>

namespace predict::detail {

using quad = __float128;

inline quad q_sin(quad x) { return sinq(x); }
inline quad q_cos(quad x) { return cosq(x); }
inline quad q_sqrt(quad x) { return sqrtq(x); }
inline quad q_pow(quad x, quad y) { return powq(x, y); }
inline quad q_fabs(quad x) { return fabsq(x); }
constexpr quad q_pi() { return M_PIq; }

}  // namespace predict::detail

#else

#include <cmath>

namespace predict::detail {

using quad = long double;

inline quad q_sin(quad x) { return std::sin(x); }
inline quad q_cos(quad x) { return std::cos(x); }
inline quad q_sqrt(quad x) { return std::sqrt(x); }
inline quad q_pow(quad x, quad y) { return std::pow(x, y); }
inline quad q_fabs(quad x) { return std::fabs(x); }
constexpr quad q_pi() { return 3.141592653589793238462643383279502884L; }

}  // namespace predict::detail

#endif
