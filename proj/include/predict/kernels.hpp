#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Dense double-precision inner loops shared by every module: reductions over
// pmf arrays, weighted accumulation of posterior rows, and Jacobi rotations.
// Each operation has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at runtime. The variants
// are equivalence-tested against the scalar lane; results may differ by a
// few ulps due to reassociation, never beyond.

namespace predict::kernels {

struct KernelOps {
    const char* name;
    // sum of a[0..n)
    double (*sum)(const double* a, std::size_t n);
    // sum of |a[i]|
    double (*abs_sum)(const double* a, std::size_t n);
    // dot product
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum of |a[i] - b[i]|
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // lin[i] += w * x[i]; sq[i] += w * x[i] * x[i]
    void (*axpy_with_sq)(double* lin, double* sq, double w, const double* x, std::size_t n);
    // plane rotation: a'[i] = c*a[i] - s*b[i]; b'[i] = s*a[i] + c*b[i]
    void (*rotate_pair)(double* a, double* b, double c, double s, std::size_t n);
};

// Active lane. Resolved once: PREDICT_KERNELS env var ("scalar", "avx2",
// "neon") if set, otherwise the best lane the CPU supports.
const KernelOps& ops();

// Scalar reference lane, always available (oracle for equivalence tests).
const KernelOps& scalar_ops();

// Lane by name; nullptr if this build/CPU does not provide it.
const KernelOps* lane(const std::string& name);

// Every lane usable on this machine (scalar first).
std::vector<const KernelOps*> available_lanes();

// out[0..cols) = v[0..rows) * M (row-major rows x cols). out is overwritten.
void vec_mat(double* out, const double* v, const double* m, std::size_t rows, std::size_t cols);

// c = a * b for row-major n x n matrices (c must not alias a or b).
void mat_mul(double* c, const double* a, const double* b, std::size_t n);

}  // namespace predict::kernels
