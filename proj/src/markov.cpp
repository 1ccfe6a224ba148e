#include "predict/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr std::size_t kDirectSolveLimit = 512;

// Gaussian elimination with partial pivoting; a is n x n row-major,
// b length n. Solution written into b.
void solve_linear(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        }
        if (a[pivot * n + col] == 0.0) throw NumericalValidationError("singular stationary system");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] * inv;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * b[c];
        b[ri] = acc / a[ri * n + ri];
    }
}

// Stationary distribution from pi (P - I) = 0 with one equation replaced
// by the normalization sum(pi) = 1.
std::vector<double> stationary_direct(const std::vector<double>& p, std::size_t n) {
    std::vector<double> a(n * n);
    std::vector<double> b(n, 0.0);
    // Row r of the system: sum_x pi(x) (P(x,r) - delta(x,r)) = 0.
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t x = 0; x < n; ++x) {
            a[r * n + x] = p[x * n + r] - (x == r ? 1.0 : 0.0);
        }
    }
    for (std::size_t x = 0; x < n; ++x) a[(n - 1) * n + x] = 1.0;
    b[n - 1] = 1.0;
    solve_linear(a, b, n);
    for (double& v : b) v = std::max(0.0, v);
    const double total = kernels::ops().sum(b.data(), n);
    for (double& v : b) v /= total;
    return b;
}

struct PowerIterationResult {
    std::vector<double> pi;
    double residual;
    bool converged;
};

PowerIterationResult stationary_power(const std::vector<double>& p, std::size_t n) {
    std::vector<double> v(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    double residual = 1.0;
    constexpr std::size_t kMaxIterations = 1'000'000;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        kernels::vec_mat(next.data(), v.data(), p.data(), n, n);
        residual = kernels::ops().sum_abs_diff(next.data(), v.data(), n);
        v.swap(next);
        if (residual < 1e-12) {
            const double total = kernels::ops().sum(v.data(), n);
            for (double& x : v) x /= total;
            return {std::move(v), residual, true};
        }
    }
    return {std::move(v), residual, false};
}

}  // namespace

MarkovChain::MarkovChain(const std::vector<std::vector<double>>& rows) {
    states_ = rows.size();
    transition_.reserve(states_ * states_);
    for (const auto& r : rows) {
        if (r.size() != states_) throw NotStochastic("transition matrix is not square");
        transition_.insert(transition_.end(), r.begin(), r.end());
    }
    validate_and_build();
}

MarkovChain::MarkovChain(std::size_t states, std::vector<double> row_major)
    : states_(states), transition_(std::move(row_major)) {
    if (transition_.size() != states_ * states_) {
        throw NotStochastic("transition matrix size does not match state count");
    }
    validate_and_build();
}

void MarkovChain::validate_and_build() {
    const std::size_t n = states_;
    if (n == 0) throw NotStochastic("empty transition matrix");

    for (std::size_t x = 0; x < n; ++x) {
        double sum = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            const double v = transition_[x * n + y];
            if (!(v >= 0.0) || !std::isfinite(v)) throw NotStochastic("negative or non-finite entry");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > kRowSumTolerance) {
            throw NotStochastic("row " + std::to_string(x) + " sums to " + std::to_string(sum));
        }
        for (std::size_t y = 0; y < n; ++y) transition_[x * n + y] /= sum;
    }

    // Irreducibility: strong connectivity over edges with positive mass.
    auto reachable = [&](bool reverse) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const double w = reverse ? transition_[v * n + u] : transition_[u * n + v];
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reachable(false) || !reachable(true)) throw Reducible("chain is not irreducible");

    // Period = gcd over edges (u,v) of depth(u) + 1 - depth(v) on a BFS tree.
    {
        std::vector<long> depth(n, -1);
        std::queue<std::size_t> q;
        depth[0] = 0;
        q.push(0);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v = 0; v < n; ++v) {
                if (transition_[u * n + v] > 0.0 && depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    q.push(v);
                }
            }
        }
        long g = 0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = 0; v < n; ++v) {
                if (transition_[u * n + v] > 0.0) {
                    g = std::gcd(g, std::labs(depth[u] + 1 - depth[v]));
                }
            }
        }
        if (g != 1) throw Periodic("chain has period " + std::to_string(g));
    }

    if (n <= kDirectSolveLimit) {
        stationary_ = stationary_direct(transition_, n);
        // Robustness check: an independently computed fixed point must agree.
        const PowerIterationResult pit = stationary_power(transition_, n);
        if (pit.converged) {
            double max_diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                max_diff = std::max(max_diff, std::fabs(pit.pi[i] - stationary_[i]));
            }
            if (max_diff > 1e-10) {
                throw NumericalValidationError(
                    "direct and power-iteration stationary distributions disagree by " +
                    std::to_string(max_diff));
            }
        }
    } else {
        const PowerIterationResult pit = stationary_power(transition_, n);
        if (!pit.converged) {
            throw NumericalValidationError("power iteration did not reach residual 1e-12");
        }
        stationary_ = pit.pi;
    }

    // pi P = pi residual check (construction invariant).
    std::vector<double> check(n);
    kernels::vec_mat(check.data(), stationary_.data(), transition_.data(), n, n);
    if (kernels::ops().sum_abs_diff(check.data(), stationary_.data(), n) > 1e-9) {
        throw NumericalValidationError("stationary distribution fails pi P = pi");
    }
}

DiscretePmf MarkovChain::stationary_pmf() const { return DiscretePmf(0, stationary_); }

bool MarkovChain::reversible(double tol) const {
    for (std::size_t x = 0; x < states_; ++x) {
        for (std::size_t y = x + 1; y < states_; ++y) {
            const double lhs = stationary_[x] * p(x, y);
            const double rhs = stationary_[y] * p(y, x);
            if (std::fabs(lhs - rhs) > tol) return false;
        }
    }
    return true;
}

std::vector<double> MarkovChain::matrix_power(long L) const {
    if (L < 0) throw InvalidParameter("negative matrix power");
    const std::size_t n = states_;
    std::vector<double> result(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) result[i * n + i] = 1.0;
    std::vector<double> base = transition_;
    std::vector<double> scratch(n * n);
    unsigned long e = static_cast<unsigned long>(L);
    while (e > 0) {
        if (e & 1UL) {
            kernels::mat_mul(scratch.data(), result.data(), base.data(), n);
            result.swap(scratch);
        }
        e >>= 1UL;
        if (e > 0) {
            kernels::mat_mul(scratch.data(), base.data(), base.data(), n);
            base.swap(scratch);
        }
    }
    return result;
}

std::vector<double> MarkovChain::l_step_row(std::size_t x, long L) const {
    if (x >= states_) throw InvalidParameter("state out of range");
    const std::vector<double> p_l = matrix_power(L);
    return {p_l.begin() + static_cast<long>(x * states_),
            p_l.begin() + static_cast<long>((x + 1) * states_)};
}

DiscretePmf MarkovChain::l_step(std::size_t x, long L) const {
    return DiscretePmf::from_weights(0, l_step_row(x, L));
}

TransientScan::TransientScan(const MarkovChain& chain, std::size_t x)
    : chain_(&chain), row_(chain.states(), 0.0), scratch_(chain.states()) {
    if (x >= chain.states()) throw InvalidParameter("state out of range");
    row_[x] = 1.0;
}

void TransientScan::step() {
    kernels::vec_mat(scratch_.data(), row_.data(), chain_->transition().data(), chain_->states(),
                     chain_->states());
    row_.swap(scratch_);
    ++lead_;
}

void TransientScan::advance_to(long L) {
    if (L < lead_) throw InvalidParameter("TransientScan cannot rewind");
    while (lead_ < L) step();
}

}  // namespace predict
