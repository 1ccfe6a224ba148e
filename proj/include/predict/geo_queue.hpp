#pragma once

#include "predict/markov.hpp"
#include "predict/observable.hpp"
#include "predict/pmf.hpp"

namespace predict {

// Discrete-time single-server queue: Bernoulli(alpha) arrivals,
// geometric(mu) services, buffer capacity K (states 0..K).
struct GeoQueueParams {
    double alpha = 0.0;  // arrival probability per slot
    double mu = 0.0;     // service completion probability per slot
    long capacity = 0;   // K

    GeoQueueParams(double alpha_, double mu_, long capacity_);
    static GeoQueueParams from_rho(double rho, double mu, long capacity);

    double rho() const { return alpha / mu; }
    // beta = alpha (1-mu) / (mu (1-alpha)); the stationary distribution is
    // geometric in beta.
    double beta() const { return alpha * (1.0 - mu) / (mu * (1.0 - alpha)); }
    // Expected stationary queue length, from the exact finite-K pmf.
    double chi() const;
    bool beta_is_one() const;
};

// Birth-death transition matrix with up-probability alpha(1-mu) and
// down-probability mu(1-alpha); self-loops absorb the complement exactly.
MarkovChain geo_transition_matrix(const GeoQueueParams& p);

// pi(y) = (1-beta)/(1-beta^(K+1)) beta^y; uniform in the beta = 1 limit.
DiscretePmf geo_stationary(const GeoQueueParams& p);
double geo_stationary_at(const GeoQueueParams& p, long y);

// Closed-form P^L(i,j): stationary term plus the spectral fluctuation sum
// (gamma_k = alpha mu + (1-alpha)(1-mu) + 2 sqrt(...) cos(k pi/(K+1))).
// Matches the matrix power to 1e-8.
double geo_transient(const GeoQueueParams& p, long i, long j, long L);

// All (K+1)^2 closed-form entries at once (row-major), sharing the
// per-frequency bracket table; equal to per-entry evaluation.
std::vector<double> geo_transient_matrix(const GeoQueueParams& p, long L);

// Sojourn of a packet that finds y in the system: NB(y+1, mu) in the trials
// convention, support starting at y + 1.
DiscretePmf geo_sojourn_posterior(const GeoQueueParams& p, long y);

// The queue as an observable model: queue length is the state, sojourn time
// the performance variable. State K carries the hypothetical-admission
// posterior NB(K+1, mu); blocking is handled separately below.
ObservableModel geo_observable_model(const GeoQueueParams& p);

// Large-K approximation of sojourn predictability:
// (beta^((1-x)/2)/pi) (1-sqrt(beta))^2 g^L  *
//   integral_0^pi sin r sin(x r) / (1 - 2 sqrt(beta) cos r + beta)^2 e^(-L kappa r^2) dr,
// with g = alpha mu + (1-alpha)(1-mu) + 2 sqrt(alpha mu (1-alpha)(1-mu)).
// Intended regime: large K, x far from chi, large L. Throws UnstableQueue
// when beta >= 1.
double geo_predictability_approx(const GeoQueueParams& p, long x, long L);

// Predictability of blocking: |P^L(x, K) - pi(K)| via the closed forms.
double geo_blocking_predictability(const GeoQueueParams& p, long x, long L);

// The generic predictability sum evaluated with closed-form transient
// weights instead of matrix powers (posteriors NB(y+1, mu) for y = 0..K).
// Cross-validates the two machineries end to end.
double geo_predictability_closed_form(const GeoQueueParams& p, const ObservableModel& model,
                                      long x, long L);

// The sum exactly as printed alongside the queue predictability theorem:
// y running from 1 with posterior NB(z; y, mu). Diagnostics only — its
// deviation from the pipeline value is reported, not reconciled.
double geo_predictability_printed(const GeoQueueParams& p, long x, long L);

// Cross-entropy between marginal and forecast with posterior tails
// evaluated on demand (no truncation), so the value exists whenever the
// forecast genuinely covers the marginal support (L >= x).
double geo_ce_predictability(const GeoQueueParams& p, const ObservableModel& model, long x, long L);
double geo_ce_predictability_from_weights(const GeoQueueParams& p, const ObservableModel& model,
                                          const double* weights);

}  // namespace predict
