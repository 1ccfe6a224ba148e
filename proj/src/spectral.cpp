#include "predict/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) acc += a[i * n + j] * a[i * n + j];
    }
    return std::sqrt(2.0 * acc);
}

// Cyclic Jacobi on symmetric a (row-major, destroyed); eigenvectors
// accumulate in v as columns.
void jacobi(std::vector<double>& a, std::vector<double>& v, std::size_t n) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    if (n == 1) return;

    const auto& k = kernels::ops();
    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a, n) < 1e-12) return;
        for (std::size_t p = 0; p < n - 1; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                // Rotate rows p and q, then columns via symmetry.
                k.rotate_pair(a.data() + p * n, a.data() + q * n, c, s, n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                k.rotate_pair(v.data() + p * n, v.data() + q * n, c, s, n);
            }
        }
    }
    if (off_diagonal_norm(a, n) >= 1e-12) {
        throw NumericalValidationError("Jacobi eigensolver did not converge");
    }
}

}  // namespace

SpectralDecomposition spectral_decompose(const MarkovChain& chain) {
    if (!chain.reversible()) throw NotReversible("spectral decomposition requires detailed balance");
    const std::size_t n = chain.states();
    const std::vector<double>& pi = chain.stationary();

    // S = D^(1/2) P D^(-1/2); symmetric under detailed balance. Average the
    // two algebraically equal off-diagonal expressions to keep S exactly
    // symmetric under rounding.
    std::vector<double> s(n * n);
    std::vector<double> sqrt_pi(n);
    for (std::size_t i = 0; i < n; ++i) sqrt_pi[i] = std::sqrt(pi[i]);
    for (std::size_t x = 0; x < n; ++x) {
        s[x * n + x] = chain.p(x, x);
        for (std::size_t y = x + 1; y < n; ++y) {
            const double a = sqrt_pi[x] / sqrt_pi[y] * chain.p(x, y);
            const double b = sqrt_pi[y] / sqrt_pi[x] * chain.p(y, x);
            const double avg = 0.5 * (a + b);
            s[x * n + y] = avg;
            s[y * n + x] = avg;
        }
    }

    // Row rotations on an identity seed accumulate V^T, so eigenvector j of
    // the symmetrized matrix sits in row j of `vectors`.
    std::vector<double> vectors;
    jacobi(s, vectors, n);

    SpectralDecomposition out;
    out.states = n;
    out.pi = pi;
    out.eigenvalues.resize(n);
    out.eigenfunctions.resize(n * n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> raw_values(n);
    for (std::size_t j = 0; j < n; ++j) raw_values[j] = s[j * n + j];

    // Eigenfunctions f_j(x) = v_j(x) / sqrt(pi(x)); already pi-orthonormal.
    std::vector<double> funcs(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        double* f = funcs.data() + j * n;
        for (std::size_t x = 0; x < n; ++x) f[x] = vectors[j * n + x] / sqrt_pi[x];
        // Deterministic sign: the largest-magnitude component is positive.
        std::size_t imax = 0;
        for (std::size_t x = 1; x < n; ++x) {
            if (std::fabs(f[x]) > std::fabs(f[imax])) imax = x;
        }
        if (f[imax] < 0.0) {
            for (std::size_t x = 0; x < n; ++x) f[x] = -f[x];
        }
    }

    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (std::fabs(raw_values[a] - raw_values[b]) > 1e-12) return raw_values[a] > raw_values[b];
        return funcs[a * n] > funcs[b * n];
    });

    for (std::size_t rank = 0; rank < n; ++rank) {
        const std::size_t j = order[rank];
        out.eigenvalues[rank] = raw_values[j];
        std::copy(funcs.begin() + static_cast<long>(j * n), funcs.begin() + static_cast<long>((j + 1) * n),
                  out.eigenfunctions.begin() + static_cast<long>(rank * n));
    }

    out.lambda_star = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        out.lambda_star = std::max(out.lambda_star, std::fabs(out.eigenvalues[j]));
    }
    out.spectral_gap = 1.0 - out.lambda_star;
    return out;
}

double mixing_tv_bound_full(const SpectralDecomposition& spec, std::size_t x, long L) {
    if (x >= spec.states) throw InvalidParameter("state out of range");
    double acc = 0.0;
    for (std::size_t j = 1; j < spec.states; ++j) {
        const double fx = spec.f(j, x);
        acc += std::pow(spec.eigenvalues[j] * spec.eigenvalues[j], static_cast<double>(L)) * fx * fx;
    }
    return 0.5 * std::sqrt(acc);
}

double mixing_tv_bound_gap(const SpectralDecomposition& spec, std::size_t x, long L) {
    if (x >= spec.states) throw InvalidParameter("state out of range");
    return 0.5 * std::pow(spec.lambda_star, static_cast<double>(L)) *
           std::sqrt(std::max(0.0, 1.0 / spec.pi[x] - 1.0));
}

}  // namespace predict
