#include "predict/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "predict/errors.hpp"

namespace predict::kernels {

namespace {

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double abs_sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i]);
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_with_sq_scalar(double* lin, double* sq, double w, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double wx = w * x[i];
        lin[i] += wx;
        sq[i] += wx * x[i];
    }
}

void rotate_pair_scalar(double* a, double* b, double c, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ai = a[i];
        const double bi = b[i];
        a[i] = c * ai - s * bi;
        b[i] = s * ai + c * bi;
    }
}

constexpr KernelOps kScalar = {
    "scalar",         sum_scalar,  abs_sum_scalar,     dot_scalar,
    sum_abs_diff_scalar, axpy_scalar, axpy_with_sq_scalar, rotate_pair_scalar,
};

const KernelOps* detect_best() {
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        if (const KernelOps* l = lane("avx2")) return l;
    }
#endif
    if (const KernelOps* l = lane("neon")) return l;
    return &kScalar;
}

const KernelOps* select_lane() {
    if (const char* env = std::getenv("PREDICT_KERNELS")) {
        const KernelOps* forced = lane(env);
        if (forced == nullptr) {
            throw ConfigError(std::string("PREDICT_KERNELS=") + env +
                              " is not an available kernel lane");
        }
        return forced;
    }
    return detect_best();
}

}  // namespace

#if defined(__x86_64__) || defined(__i386__)
const KernelOps* avx2_lane_if_supported();  // kernels_avx2.cpp
#endif
#if defined(__aarch64__)
const KernelOps* neon_lane();  // kernels_neon.cpp
#endif

const KernelOps& scalar_ops() { return kScalar; }

const KernelOps* lane(const std::string& name) {
    if (name == "scalar") return &kScalar;
#if defined(__x86_64__) || defined(__i386__)
    if (name == "avx2") return avx2_lane_if_supported();
#endif
#if defined(__aarch64__)
    if (name == "neon") return neon_lane();
#endif
    return nullptr;
}

std::vector<const KernelOps*> available_lanes() {
    std::vector<const KernelOps*> lanes{&kScalar};
    for (const char* name : {"avx2", "neon"}) {
        if (const KernelOps* l = lane(name)) lanes.push_back(l);
    }
    return lanes;
}

const KernelOps& ops() {
    static const KernelOps* active = select_lane();
    return *active;
}

void vec_mat(double* out, const double* v, const double* m, std::size_t rows, std::size_t cols) {
    std::memset(out, 0, cols * sizeof(double));
    const KernelOps& k = ops();
    for (std::size_t r = 0; r < rows; ++r) {
        if (v[r] != 0.0) k.axpy(out, v[r], m + r * cols, cols);
    }
}

void mat_mul(double* c, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        vec_mat(c + i * n, a + i * n, b, n, n);
    }
}

}  // namespace predict::kernels
