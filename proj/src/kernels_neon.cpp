// NEON lane for aarch64 (float64x2_t is A64-only). Baseline on that
// architecture, so no runtime feature check is needed.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "predict/kernels.hpp"

namespace predict::kernels {

namespace {

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

double sum_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
    double acc = hsum(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i];
    return acc;
}

double abs_sum_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vabsq_f64(vld1q_f64(a + i)));
        acc1 = vaddq_f64(acc1, vabsq_f64(vld1q_f64(a + i + 2)));
    }
    for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vabsq_f64(vld1q_f64(a + i)));
    double acc = hsum(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += std::fabs(a[i]);
    return acc;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double acc = hsum(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_abs_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc1 = vaddq_f64(acc1, vabdq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double acc = hsum(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

void axpy_neon(double* y, double a, const double* x, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
        vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), av, vld1q_f64(x + i + 2)));
    }
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_with_sq_neon(double* lin, double* sq, double w, const double* x, std::size_t n) {
    const float64x2_t wv = vdupq_n_f64(w);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const float64x2_t wx = vmulq_f64(wv, xv);
        vst1q_f64(lin + i, vaddq_f64(vld1q_f64(lin + i), wx));
        vst1q_f64(sq + i, vfmaq_f64(vld1q_f64(sq + i), wx, xv));
    }
    for (; i < n; ++i) {
        const double wx = w * x[i];
        lin[i] += wx;
        sq[i] += wx * x[i];
    }
}

void rotate_pair_neon(double* a, double* b, double c, double s, std::size_t n) {
    const float64x2_t cv = vdupq_n_f64(c);
    const float64x2_t sv = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t av = vld1q_f64(a + i);
        const float64x2_t bv = vld1q_f64(b + i);
        vst1q_f64(a + i, vfmsq_f64(vmulq_f64(cv, av), sv, bv));
        vst1q_f64(b + i, vfmaq_f64(vmulq_f64(cv, bv), sv, av));
    }
    for (; i < n; ++i) {
        const double ai = a[i];
        const double bi = b[i];
        a[i] = c * ai - s * bi;
        b[i] = s * ai + c * bi;
    }
}

constexpr KernelOps kNeon = {
    "neon",            sum_neon,  abs_sum_neon,      dot_neon,
    sum_abs_diff_neon, axpy_neon, axpy_with_sq_neon, rotate_pair_neon,
};

}  // namespace

const KernelOps* neon_lane() { return &kNeon; }

}  // namespace predict::kernels

#endif  // aarch64
