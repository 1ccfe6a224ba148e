#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace predict {

// Finite probability mass function over a contiguous integer support.
// mass()[i] is the probability of the value offset() + i. Canonical form:
// entries are non-negative, sum to one, and the support carries no
// leading/trailing dust below 1e-15. Immutable after construction.
class DiscretePmf {
public:
    // Probability one at `value`.
    static DiscretePmf point_mass(long value);

    // Requires |sum - 1| <= 1e-9 (then rescales to exactly one) and
    // non-negative entries; throws InvalidParameter otherwise.
    DiscretePmf(long offset, std::vector<double> mass);

    // Normalizes arbitrary non-negative weights with positive total
    // (mixtures, empirical counts).
    static DiscretePmf from_weights(long offset, std::vector<double> weights);

    long offset() const { return offset_; }
    const std::vector<double>& mass() const { return mass_; }
    std::size_t size() const { return mass_.size(); }
    // Largest support point.
    long support_end() const { return offset_ + static_cast<long>(mass_.size()) - 1; }
    // Probability of the value z (0 outside the stored support).
    double at(long z) const;

    double mean() const;

    // First z beyond which mass was dropped when an unbounded distribution
    // was truncated, and the mass dropped. Diagnostics only; does not
    // participate in equality or serialization.
    std::optional<long> truncation_point;
    double truncated_tail = 0.0;

private:
    DiscretePmf() = default;
    long offset_ = 0;
    std::vector<double> mass_;
};

// Total variation distance, supports aligned by absolute value. Symmetric,
// in [0, 1], and 1 exactly when the supports are disjoint.
double tv_distance(const DiscretePmf& p, const DiscretePmf& q);

// Kullback-Leibler divergence of `marginal` from `forecast`:
// sum_z m(z) log(m(z)/f(z)). Terms with m(z) = 0 contribute nothing;
// m(z) > 0 where f(z) = 0 throws AbsoluteContinuityViolation.
double cross_entropy_divergence(const DiscretePmf& marginal, const DiscretePmf& forecast);

// Distribution of the sum of independent variables.
DiscretePmf convolve(const DiscretePmf& p, const DiscretePmf& q);

enum class NbConvention {
    // Number of Bernoulli trials up to and including the r-th success;
    // support starts at ceil(r) (at r for integer shapes).
    trials,
    // Number of failures before the r-th success; support starts at 0.
    // Admits real-valued shapes.
    failures,
};

// Negative binomial pmf, computed through log-gamma and truncated at the
// first z where the remaining tail is below 1e-10, then renormalized.
// `z_hint` merely reserves capacity.
DiscretePmf negative_binomial_pmf(NbConvention convention, double shape, double success_prob,
                                  long z_hint = -1);

// Single raw pmf value (no truncation or renormalization). Used where a
// truncated support would fabricate zeros, e.g. cross-entropy tails.
double negative_binomial_pdf(NbConvention convention, double shape, double success_prob, long z);

}  // namespace predict
