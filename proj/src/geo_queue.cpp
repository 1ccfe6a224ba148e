#include "predict/geo_queue.hpp"

#include <cmath>
#include <vector>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"
#include "predict/quadrature.hpp"
#include "quad_real.hpp"

namespace predict {

namespace {

constexpr double kBetaOneTolerance = 1e-9;

// Powers of gamma_k for every k at once; gamma_k >= 0 always, so integer
// binary powering in quad is exact enough and cheap.
detail::quad quad_pow_int(detail::quad base, unsigned long e) {
    detail::quad acc = 1;
    while (e > 0) {
        if (e & 1UL) acc *= base;
        base *= base;
        e >>= 1UL;
    }
    return acc;
}

// Fluctuation part of the closed-form transient, P^L(i,j) - pi(j):
//   (2/(K+1)) beta^((j-i)/2) sum_k gamma_k^L / (1 - 2 sqrt(beta) cos th_k + beta)
//       [sin(i th_k) - sqrt(beta) sin((i+1) th_k)]
//       [sin(j th_k) - sqrt(beta) sin((j+1) th_k)]
// accumulated in binary128: the prefactor reaches beta^(-K/2), so the sum
// must cancel far below the size of its terms; double's 16 digits are not
// enough for far (i,j) pairs.
double transient_fluctuation(const GeoQueueParams& p, long i, long j, long L) {
    using detail::quad;
    const long K = p.capacity;
    const quad alpha = p.alpha;
    const quad mu = p.mu;
    const quad ab = 1 - alpha;
    const quad mb = 1 - mu;
    const quad beta = alpha * mb / (mu * ab);
    const quad sqrt_beta = detail::q_sqrt(beta);
    const quad drift = 2 * detail::q_sqrt(alpha * mu * ab * mb);
    const quad base = alpha * mu + ab * mb;

    quad sum = 0;
    for (long k = 1; k <= K; ++k) {
        const quad theta = detail::q_pi() * static_cast<quad>(k) / static_cast<quad>(K + 1);
        const quad cos_theta = detail::q_cos(theta);
        const quad gamma = base + drift * cos_theta;
        const quad denom = 1 - 2 * sqrt_beta * cos_theta + beta;
        const quad bracket_i =
            detail::q_sin(static_cast<quad>(i) * theta) - sqrt_beta * detail::q_sin(static_cast<quad>(i + 1) * theta);
        const quad bracket_j =
            detail::q_sin(static_cast<quad>(j) * theta) - sqrt_beta * detail::q_sin(static_cast<quad>(j + 1) * theta);
        sum += quad_pow_int(gamma, static_cast<unsigned long>(L)) / denom * bracket_i * bracket_j;
    }
    const quad prefactor = quad(2) / static_cast<quad>(K + 1) *
                           detail::q_pow(beta, static_cast<quad>(j - i) / 2);
    return static_cast<double>(prefactor * sum);
}

}  // namespace

GeoQueueParams::GeoQueueParams(double alpha_, double mu_, long capacity_)
    : alpha(alpha_), mu(mu_), capacity(capacity_) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidParameter("alpha must lie in (0,1)");
    if (!(mu > 0.0) || !(mu < 1.0)) throw InvalidParameter("mu must lie in (0,1)");
    if (capacity < 1) throw InvalidParameter("capacity must be >= 1");
}

GeoQueueParams GeoQueueParams::from_rho(double rho, double mu, long capacity) {
    if (!(rho > 0.0)) throw InvalidParameter("rho must be > 0");
    return GeoQueueParams(rho * mu, mu, capacity);
}

bool GeoQueueParams::beta_is_one() const { return std::fabs(beta() - 1.0) < kBetaOneTolerance; }

double GeoQueueParams::chi() const { return geo_stationary(*this).mean(); }

MarkovChain geo_transition_matrix(const GeoQueueParams& p) {
    const long K = p.capacity;
    const std::size_t n = static_cast<std::size_t>(K + 1);
    const double up = p.alpha * (1.0 - p.mu);
    const double down = p.mu * (1.0 - p.alpha);
    std::vector<double> t(n * n, 0.0);
    for (long i = 0; i <= K; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * n;
        double self = 1.0;
        if (i < K) {
            t[row + static_cast<std::size_t>(i) + 1] = up;
            self -= up;
        }
        if (i > 0) {
            t[row + static_cast<std::size_t>(i) - 1] = down;
            self -= down;
        }
        t[row + static_cast<std::size_t>(i)] = self;
    }
    return MarkovChain(n, std::move(t));
}

DiscretePmf geo_stationary(const GeoQueueParams& p) {
    const long K = p.capacity;
    std::vector<double> w(static_cast<std::size_t>(K + 1));
    if (p.beta_is_one()) {
        std::fill(w.begin(), w.end(), 1.0);
    } else {
        const double beta = p.beta();
        if (beta < 1.0) {
            double v = 1.0;
            for (long y = 0; y <= K; ++y, v *= beta) w[static_cast<std::size_t>(y)] = v;
        } else {
            // Work from the top to keep weights bounded for beta > 1.
            double v = 1.0;
            for (long y = K; y >= 0; --y, v /= beta) w[static_cast<std::size_t>(y)] = v;
        }
    }
    return DiscretePmf::from_weights(0, std::move(w));
}

double geo_stationary_at(const GeoQueueParams& p, long y) {
    if (y < 0 || y > p.capacity) return 0.0;
    return geo_stationary(p).at(y);
}

double geo_transient(const GeoQueueParams& p, long i, long j, long L) {
    if (i < 0 || i > p.capacity || j < 0 || j > p.capacity) {
        throw InvalidParameter("state out of range");
    }
    if (L < 0) throw InvalidParameter("lead time must be >= 0");
    return geo_stationary_at(p, j) + transient_fluctuation(p, i, j, L);
}

std::vector<double> geo_transient_matrix(const GeoQueueParams& p, long L) {
    using detail::quad;
    if (L < 0) throw InvalidParameter("lead time must be >= 0");
    const long K = p.capacity;
    const std::size_t n = static_cast<std::size_t>(K + 1);
    const quad alpha = p.alpha;
    const quad mu = p.mu;
    const quad ab = 1 - alpha;
    const quad mb = 1 - mu;
    const quad beta = alpha * mb / (mu * ab);
    const quad sqrt_beta = detail::q_sqrt(beta);
    const quad drift = 2 * detail::q_sqrt(alpha * mu * ab * mb);
    const quad base = alpha * mu + ab * mb;

    // Bracket table bracket[s][k] = sin(s th_k) - sqrt(beta) sin((s+1) th_k)
    // via the Chebyshev recurrence, plus gamma_k^L / denom_k per frequency.
    std::vector<quad> bracket(n * static_cast<std::size_t>(K));
    std::vector<quad> weight(static_cast<std::size_t>(K));
    for (long k = 1; k <= K; ++k) {
        const quad theta = detail::q_pi() * static_cast<quad>(k) / static_cast<quad>(K + 1);
        const quad cos_theta = detail::q_cos(theta);
        weight[static_cast<std::size_t>(k - 1)] =
            quad_pow_int(base + drift * cos_theta, static_cast<unsigned long>(L)) /
            (1 - 2 * sqrt_beta * cos_theta + beta);
        const quad two_cos = 2 * cos_theta;
        quad sin_prev = 0;                    // sin(0)
        quad sin_cur = detail::q_sin(theta);  // sin(theta)
        for (long s = 0; s <= K; ++s) {
            bracket[static_cast<std::size_t>(s) * K + static_cast<std::size_t>(k - 1)] =
                sin_prev - sqrt_beta * sin_cur;
            const quad sin_next = two_cos * sin_cur - sin_prev;
            sin_prev = sin_cur;
            sin_cur = sin_next;
        }
    }

    const DiscretePmf pi = geo_stationary(p);
    std::vector<double> out(n * n);
    for (long i = 0; i <= K; ++i) {
        for (long j = 0; j <= K; ++j) {
            quad sum = 0;
            const quad* bi = bracket.data() + static_cast<std::size_t>(i) * K;
            const quad* bj = bracket.data() + static_cast<std::size_t>(j) * K;
            for (long k = 0; k < K; ++k) sum += weight[(std::size_t)k] * bi[k] * bj[k];
            const quad prefactor = quad(2) / static_cast<quad>(K + 1) *
                                   detail::q_pow(beta, static_cast<quad>(j - i) / 2);
            out[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] =
                pi.at(j) + static_cast<double>(prefactor * sum);
        }
    }
    return out;
}

DiscretePmf geo_sojourn_posterior(const GeoQueueParams& p, long y) {
    if (y < 0 || y > p.capacity) throw InvalidParameter("state out of range");
    return negative_binomial_pmf(NbConvention::trials, static_cast<double>(y + 1), p.mu);
}

ObservableModel geo_observable_model(const GeoQueueParams& p) {
    std::vector<DiscretePmf> posteriors;
    posteriors.reserve(static_cast<std::size_t>(p.capacity + 1));
    for (long y = 0; y <= p.capacity; ++y) posteriors.push_back(geo_sojourn_posterior(p, y));
    return ObservableModel(geo_transition_matrix(p), std::move(posteriors));
}

double geo_predictability_approx(const GeoQueueParams& p, long x, long L) {
    if (x < 0 || x > p.capacity) throw InvalidParameter("state out of range");
    if (L < 0) throw InvalidParameter("lead time must be >= 0");
    const double beta = p.beta();
    if (beta >= 1.0) throw UnstableQueue("large-K approximation requires beta < 1");

    const double alpha = p.alpha;
    const double mu = p.mu;
    const double ab = 1.0 - alpha;
    const double mb = 1.0 - mu;
    const double sqrt_beta = std::sqrt(beta);
    const double root = std::sqrt(alpha * mu * ab * mb);
    const double g = alpha * mu + ab * mb + 2.0 * root;
    const double kappa = root / g;

    const double xd = static_cast<double>(x);
    const double ld = static_cast<double>(L);
    auto integrand = [&](double r) {
        const double denom = 1.0 - 2.0 * sqrt_beta * std::cos(r) + beta;
        return std::sin(r) * std::sin(xd * r) / (denom * denom) * std::exp(-ld * kappa * r * r);
    };
    const double integral = simpson_adaptive(integrand, 0.0, M_PI, 1e-12, 4096);

    const double prefactor = std::pow(beta, (1.0 - xd) / 2.0) / M_PI *
                             (1.0 - sqrt_beta) * (1.0 - sqrt_beta) * std::pow(g, ld);
    return std::max(0.0, prefactor * integral);
}

double geo_blocking_predictability(const GeoQueueParams& p, long x, long L) {
    if (x < 0 || x > p.capacity) throw InvalidParameter("state out of range");
    if (L < 0) throw InvalidParameter("lead time must be >= 0");
    return std::fabs(transient_fluctuation(p, x, p.capacity, L));
}

double geo_predictability_closed_form(const GeoQueueParams& p, const ObservableModel& model,
                                      long x, long L) {
    const std::size_t n = model.states();
    if (n != static_cast<std::size_t>(p.capacity + 1)) {
        throw InvalidParameter("model does not match queue capacity");
    }
    std::vector<double> fluctuation(n);
    for (long y = 0; y <= p.capacity; ++y) {
        fluctuation[static_cast<std::size_t>(y)] = transient_fluctuation(p, x, y, L);
    }
    std::vector<double> acc(model.span(), 0.0);
    const auto& k = kernels::ops();
    for (std::size_t y = 0; y < n; ++y) {
        if (fluctuation[y] != 0.0) {
            k.axpy(acc.data(), fluctuation[y], model.posterior_grid().data() + y * model.span(),
                   model.span());
        }
    }
    return std::min(1.0, 0.5 * k.abs_sum(acc.data(), model.span()));
}

double geo_predictability_printed(const GeoQueueParams& p, long x, long L) {
    // Posterior indexed NB(z; y, mu) and the state sum starting at y = 1,
    // exactly as printed. Kept for comparison against the pipeline value.
    const long K = p.capacity;
    std::vector<DiscretePmf> posteriors;
    posteriors.reserve(static_cast<std::size_t>(K));
    long lo = 1, hi = 1;
    for (long y = 1; y <= K; ++y) {
        posteriors.push_back(negative_binomial_pmf(NbConvention::trials, static_cast<double>(y), p.mu));
        lo = std::min(lo, posteriors.back().offset());
        hi = std::max(hi, posteriors.back().support_end());
    }
    const std::size_t span = static_cast<std::size_t>(hi - lo + 1);
    std::vector<double> acc(span, 0.0);
    const auto& k = kernels::ops();
    for (long y = 1; y <= K; ++y) {
        const DiscretePmf& r = posteriors[static_cast<std::size_t>(y - 1)];
        const double w = transient_fluctuation(p, x, y, L);
        k.axpy(acc.data() + (r.offset() - lo), w, r.mass().data(), r.size());
    }
    return 0.5 * k.abs_sum(acc.data(), span);
}

double geo_ce_predictability_from_weights(const GeoQueueParams& p, const ObservableModel& model,
                                          const double* weights) {
    const DiscretePmf& m = model.marginal();
    const long z_lo = m.offset();
    const long z_hi = m.support_end();

    // Integer log-gamma table out to the largest needed argument; forecast
    // tail values are evaluated on demand so truncated posterior storage
    // cannot fabricate zeros.
    std::vector<double> lg(static_cast<std::size_t>(z_hi) + 2);
    for (std::size_t i = 1; i < lg.size(); ++i) lg[i] = std::lgamma(static_cast<double>(i));
    const double log_mu = std::log(p.mu);
    const double log_mb = std::log1p(-p.mu);

    double acc = 0.0;
    for (long z = z_lo; z <= z_hi; ++z) {
        const double mz = m.at(z);
        if (mz <= 0.0) continue;
        double fz = 0.0;
        const long y_max = std::min<long>(p.capacity, z - 1);
        for (long y = 0; y <= y_max; ++y) {
            const double w = weights[static_cast<std::size_t>(y)];
            if (w <= 0.0) continue;
            // NB(y+1, mu) trials pmf at z.
            const double log_pmf = lg[static_cast<std::size_t>(z)] - lg[static_cast<std::size_t>(y + 1)] -
                                   lg[static_cast<std::size_t>(z - y)] + static_cast<double>(y + 1) * log_mu +
                                   static_cast<double>(z - y - 1) * log_mb;
            fz += w * std::exp(log_pmf);
        }
        if (fz <= 0.0) {
            throw AbsoluteContinuityViolation("forecast has no mass at z=" + std::to_string(z));
        }
        acc += mz * std::log(mz / fz);
    }
    return std::max(0.0, acc);
}

double geo_ce_predictability(const GeoQueueParams& p, const ObservableModel& model, long x, long L) {
    const std::vector<double> w = model.chain().l_step_row(static_cast<std::size_t>(x), L);
    return geo_ce_predictability_from_weights(p, model, w.data());
}

}  // namespace predict
