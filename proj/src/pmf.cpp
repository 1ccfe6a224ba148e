#include "predict/pmf.hpp"

#include <algorithm>
#include <cmath>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kTrimThreshold = 1e-15;
constexpr double kTailTarget = 1e-10;

// Rescale to total one, then trim sub-1e-15 dust off both ends of the
// normalized mass and rescale once more.
std::pair<long, std::vector<double>> canonicalize(long offset, std::vector<double> mass) {
    const double pre_total = kernels::ops().sum(mass.data(), mass.size());
    if (!(pre_total > 0.0)) throw InvalidParameter("pmf has no mass");
    for (double& v : mass) v /= pre_total;

    std::size_t lo = 0;
    std::size_t hi = mass.size();
    while (lo < hi && mass[lo] < kTrimThreshold) ++lo;
    while (hi > lo && mass[hi - 1] < kTrimThreshold) --hi;
    if (lo == hi) throw InvalidParameter("pmf has no mass after trimming");
    std::vector<double> kept(mass.begin() + static_cast<long>(lo), mass.begin() + static_cast<long>(hi));
    const double total = kernels::ops().sum(kept.data(), kept.size());
    for (double& v : kept) v /= total;
    return {offset + static_cast<long>(lo), std::move(kept)};
}

}  // namespace

DiscretePmf DiscretePmf::point_mass(long value) {
    DiscretePmf p;
    p.offset_ = value;
    p.mass_ = {1.0};
    return p;
}

DiscretePmf::DiscretePmf(long offset, std::vector<double> mass) {
    if (mass.empty()) throw InvalidParameter("pmf mass is empty");
    for (double v : mass) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("pmf entry negative or non-finite");
    }
    const double total = kernels::ops().sum(mass.data(), mass.size());
    if (std::fabs(total - 1.0) > kSumTolerance) {
        throw InvalidParameter("pmf mass sums to " + std::to_string(total) + ", not 1");
    }
    auto [off, kept] = canonicalize(offset, std::move(mass));
    offset_ = off;
    mass_ = std::move(kept);
}

DiscretePmf DiscretePmf::from_weights(long offset, std::vector<double> weights) {
    if (weights.empty()) throw InvalidParameter("pmf weights are empty");
    for (double v : weights) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("weight negative or non-finite");
    }
    const double total = kernels::ops().sum(weights.data(), weights.size());
    if (!(total > 0.0)) throw InvalidParameter("weights sum to zero");
    auto [off, kept] = canonicalize(offset, std::move(weights));
    DiscretePmf p;
    p.offset_ = off;
    p.mass_ = std::move(kept);
    return p;
}

double DiscretePmf::at(long z) const {
    const long idx = z - offset_;
    if (idx < 0 || idx >= static_cast<long>(mass_.size())) return 0.0;
    return mass_[static_cast<std::size_t>(idx)];
}

double DiscretePmf::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        acc += static_cast<double>(offset_ + static_cast<long>(i)) * mass_[i];
    }
    return acc;
}

double tv_distance(const DiscretePmf& p, const DiscretePmf& q) {
    const auto& k = kernels::ops();
    const long olo = std::max(p.offset(), q.offset());
    const long ohi = std::min(p.support_end(), q.support_end());

    double acc = 0.0;
    if (olo > ohi) {
        // Disjoint supports: all mass differs.
        acc = k.sum(p.mass().data(), p.size()) + k.sum(q.mass().data(), q.size());
    } else {
        const std::size_t overlap = static_cast<std::size_t>(ohi - olo + 1);
        acc = k.sum_abs_diff(p.mass().data() + (olo - p.offset()),
                             q.mass().data() + (olo - q.offset()), overlap);
        // Ranges covered by only one of the two.
        acc += k.sum(p.mass().data(), static_cast<std::size_t>(olo - p.offset()));
        acc += k.sum(q.mass().data(), static_cast<std::size_t>(olo - q.offset()));
        acc += k.sum(p.mass().data() + (ohi + 1 - p.offset()),
                     static_cast<std::size_t>(p.support_end() - ohi));
        acc += k.sum(q.mass().data() + (ohi + 1 - q.offset()),
                     static_cast<std::size_t>(q.support_end() - ohi));
    }
    return std::min(1.0, 0.5 * acc);
}

double cross_entropy_divergence(const DiscretePmf& marginal, const DiscretePmf& forecast) {
    double acc = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        const double m = marginal.mass()[i];
        if (m <= 0.0) continue;
        const long z = marginal.offset() + static_cast<long>(i);
        const double f = forecast.at(z);
        if (f <= 0.0) {
            throw AbsoluteContinuityViolation("marginal has mass at z=" + std::to_string(z) +
                                              " where forecast has none");
        }
        acc += m * std::log(m / f);
    }
    // Non-negative by Gibbs' inequality; clear rounding residue.
    return std::max(0.0, acc);
}

DiscretePmf convolve(const DiscretePmf& p, const DiscretePmf& q) {
    std::vector<double> out(p.size() + q.size() - 1, 0.0);
    const auto& k = kernels::ops();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.mass()[i] != 0.0) k.axpy(out.data() + i, p.mass()[i], q.mass().data(), q.size());
    }
    return DiscretePmf::from_weights(p.offset() + q.offset(), std::move(out));
}

namespace {

struct NbEval {
    double shape, log_p, log_q, lgamma_shape;
    NbConvention convention;
    long z0;

    NbEval(NbConvention conv, double shape_, double success_prob) : shape(shape_), convention(conv) {
        if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidParameter("NB shape must be > 0");
        if (!(success_prob > 0.0) || !(success_prob < 1.0)) {
            throw InvalidParameter("NB success probability must lie in (0,1)");
        }
        log_p = std::log(success_prob);
        log_q = std::log1p(-success_prob);
        lgamma_shape = std::lgamma(shape);
        z0 = conv == NbConvention::trials ? static_cast<long>(std::ceil(shape)) : 0;
    }

    double log_pmf(long z) const {
        const double zd = static_cast<double>(z);
        if (convention == NbConvention::trials) {
            // C(z-1, r-1) p^r q^(z-r)
            return std::lgamma(zd) - lgamma_shape - std::lgamma(zd - shape + 1.0) + shape * log_p +
                   (zd - shape) * log_q;
        }
        // Gamma(z+r) / (Gamma(r) z!) p^r q^z
        return std::lgamma(zd + shape) - lgamma_shape - std::lgamma(zd + 1.0) + shape * log_p +
               zd * log_q;
    }
};

}  // namespace

DiscretePmf negative_binomial_pmf(NbConvention convention, double shape, double success_prob,
                                  long z_hint) {
    const NbEval nb(convention, shape, success_prob);
    std::vector<double> mass;
    if (z_hint > nb.z0) mass.reserve(static_cast<std::size_t>(z_hint - nb.z0 + 1));
    double cum = 0.0;
    long z = nb.z0;
    constexpr long kHardCap = 50'000'000;
    while (true) {
        const double v = std::exp(nb.log_pmf(z));
        mass.push_back(v);
        cum += v;
        if (1.0 - cum < kTailTarget) break;
        ++z;
        if (z - nb.z0 > kHardCap) throw InvalidParameter("NB truncation did not converge");
    }

    DiscretePmf out = DiscretePmf::from_weights(nb.z0, std::move(mass));
    out.truncation_point = z;
    out.truncated_tail = std::max(0.0, 1.0 - cum);
    return out;
}

double negative_binomial_pdf(NbConvention convention, double shape, double success_prob, long z) {
    const NbEval nb(convention, shape, success_prob);
    if (z < nb.z0) return 0.0;
    return std::exp(nb.log_pmf(z));
}

}  // namespace predict
