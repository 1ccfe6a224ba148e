#include "predict/observable.hpp"

#include <algorithm>
#include <cmath>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

ObservableModel::ObservableModel(MarkovChain chain, std::vector<DiscretePmf> posteriors)
    : chain_(std::move(chain)), posteriors_(std::move(posteriors)) {
    if (posteriors_.size() != chain_.states()) {
        throw InvalidParameter("posterior count does not match state count");
    }
    lo_ = posteriors_[0].offset();
    hi_ = posteriors_[0].support_end();
    for (const auto& r : posteriors_) {
        lo_ = std::min(lo_, r.offset());
        hi_ = std::max(hi_, r.support_end());
    }
    span_ = static_cast<std::size_t>(hi_ - lo_ + 1);

    grid_.assign(chain_.states() * span_, 0.0);
    for (std::size_t y = 0; y < posteriors_.size(); ++y) {
        const DiscretePmf& r = posteriors_[y];
        std::copy(r.mass().begin(), r.mass().end(),
                  grid_.begin() + static_cast<long>(y * span_) + (r.offset() - lo_));
    }

    marginal_raw_ = mixture_raw(chain_.stationary().data());
    marginal_ = DiscretePmf::from_weights(lo_, marginal_raw_);
}

std::vector<double> ObservableModel::mixture_raw(const double* weights) const {
    std::vector<double> out(span_);
    kernels::vec_mat(out.data(), weights, grid_.data(), chain_.states(), span_);
    return out;
}

DiscretePmf ObservableModel::mixture(const double* weights) const {
    return DiscretePmf::from_weights(lo_, mixture_raw(weights));
}

DiscretePmf ObservableModel::forecast(std::size_t x, long L) const {
    if (x >= chain_.states()) throw InvalidParameter("state out of range");
    const std::vector<double> w = chain_.l_step_row(x, L);
    return mixture(w.data());
}

double ObservableModel::predictability_from_weights(const double* weights) const {
    const std::vector<double> f = mixture_raw(weights);
    return std::min(1.0,
                    0.5 * kernels::ops().sum_abs_diff(f.data(), marginal_raw_.data(), span_));
}

double ObservableModel::predictability_theorem_from_weights(const double* weights) const {
    const std::size_t n = chain_.states();
    std::vector<double> signed_weights(n);
    for (std::size_t y = 0; y < n; ++y) signed_weights[y] = weights[y] - chain_.stationary()[y];
    std::vector<double> acc(span_, 0.0);
    const auto& k = kernels::ops();
    for (std::size_t y = 0; y < n; ++y) {
        if (signed_weights[y] != 0.0) k.axpy(acc.data(), signed_weights[y], grid_.data() + y * span_, span_);
    }
    return std::min(1.0, 0.5 * k.abs_sum(acc.data(), span_));
}

double ObservableModel::predictability(std::size_t x, long L) const {
    if (x >= chain_.states()) throw InvalidParameter("state out of range");
    const std::vector<double> w = chain_.l_step_row(x, L);
    return predictability_from_weights(w.data());
}

double ObservableModel::predictability_theorem(std::size_t x, long L) const {
    if (x >= chain_.states()) throw InvalidParameter("state out of range");
    const std::vector<double> w = chain_.l_step_row(x, L);
    return predictability_theorem_from_weights(w.data());
}

double ObservableModel::ce_predictability(std::size_t x, long L) const {
    return cross_entropy_divergence(marginal_, forecast(x, L));
}

std::optional<long> ObservableModel::epsilon_horizon(std::size_t x, double epsilon, long l_max,
                                                     HorizonReading reading) const {
    if (x >= chain_.states()) throw InvalidParameter("state out of range");
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0,1)");
    if (l_max < 1) throw InvalidParameter("l_max must be >= 1");

    TransientScan scan(chain_, x);
    long last_above = -1;
    for (long L = 0; L <= l_max; ++L) {
        if (L > 0) scan.step();
        const double d = predictability_from_weights(scan.weights().data());
        // Boundary equality D(L) = epsilon counts as "still predictable";
        // the slack keeps that decision stable under rounding.
        if (d >= epsilon - 1e-12) {
            last_above = L;
        } else if (reading == HorizonReading::prefix) {
            return last_above < 0 ? std::nullopt : std::optional<long>(last_above);
        }
    }
    if (last_above == l_max) {
        throw HorizonExceedsScan("predictability still >= epsilon at l_max=" + std::to_string(l_max));
    }
    return last_above < 0 ? std::nullopt : std::optional<long>(last_above);
}

double ObservableModel::delayed_predictability(std::size_t x, long L, long d) const {
    if (d < 0) throw InvalidParameter("delay must be >= 0");
    return predictability(x, L + d);
}

std::size_t AggregationMap::coarse_states() const {
    std::size_t mx = 0;
    for (std::size_t a : map) mx = std::max(mx, a);
    return map.empty() ? 0 : mx + 1;
}

bool AggregationMap::contiguous() const {
    // Each coarse state must cover one unbroken run of fine states.
    std::size_t runs = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (i == 0 || map[i] != map[i - 1]) ++runs;
    }
    return runs == coarse_states();
}

AggregationMap AggregationMap::blocks(std::size_t fine_states, std::size_t width) {
    if (width == 0) throw InvalidParameter("aggregation block width must be >= 1");
    AggregationMap m;
    m.map.resize(fine_states);
    for (std::size_t i = 0; i < fine_states; ++i) m.map[i] = i / width;
    return m;
}

ObservableModel aggregate(const ObservableModel& model, const AggregationMap& map) {
    const std::size_t n = model.states();
    if (map.map.size() != n) throw InvalidParameter("aggregation map size does not match states");
    const std::size_t m = map.coarse_states();
    std::vector<double> coarse_pi(m, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        if (map.map[x] >= m) throw InvalidParameter("aggregation map entry out of range");
        coarse_pi[map.map[x]] += model.chain().stationary()[x];
    }
    for (std::size_t a = 0; a < m; ++a) {
        if (coarse_pi[a] <= 0.0) {
            throw NotSurjective("coarse state " + std::to_string(a) + " has no preimage");
        }
    }

    // P_bar(a,b) = sum_{x in a, y in b} pi(x) P(x,y) / pi(a)
    std::vector<double> coarse_p(m * m, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t a = map.map[x];
        const double w = model.chain().stationary()[x];
        for (std::size_t y = 0; y < n; ++y) {
            coarse_p[a * m + map.map[y]] += w * model.chain().p(x, y);
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) coarse_p[a * m + b] /= coarse_pi[a];
    }

    // r_bar_a = sum_{y in a} pi(y) r_y / pi(a)
    std::vector<DiscretePmf> coarse_posteriors;
    coarse_posteriors.reserve(m);
    const auto& k = kernels::ops();
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<double> acc(model.span(), 0.0);
        for (std::size_t y = 0; y < n; ++y) {
            if (map.map[y] == a) {
                k.axpy(acc.data(), model.chain().stationary()[y],
                       model.posterior_grid().data() + y * model.span(), model.span());
            }
        }
        coarse_posteriors.push_back(DiscretePmf::from_weights(model.support_lo(), std::move(acc)));
    }

    MarkovChain coarse_chain(m, std::move(coarse_p));
    // The lumped chain's own stationary distribution must be the block sums.
    for (std::size_t a = 0; a < m; ++a) {
        if (std::fabs(coarse_chain.stationary()[a] - coarse_pi[a]) > 1e-9) {
            throw NumericalValidationError("aggregated stationary distribution mismatch");
        }
    }
    return ObservableModel(std::move(coarse_chain), std::move(coarse_posteriors));
}

}  // namespace predict
