#include "predict/bounds.hpp"

#include <cmath>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

double r_statistic(const ObservableModel& model) {
    const std::size_t n = model.states();
    const std::size_t span = model.span();
    std::vector<double> lin(span, 0.0);
    std::vector<double> sq(span, 0.0);
    const auto& k = kernels::ops();
    for (std::size_t y = 0; y < n; ++y) {
        k.axpy_with_sq(lin.data(), sq.data(), model.chain().stationary()[y],
                       model.posterior_grid().data() + y * span, span);
    }
    double r = 0.0;
    for (std::size_t i = 0; i < span; ++i) {
        // Where the marginal carries no mass both sums vanish; skip.
        if (lin[i] >= 1e-15) r += sq[i] / lin[i];
    }
    return r;
}

namespace {

double posterior_factor(const ObservableModel& model) {
    return std::sqrt(2.0) * std::sqrt(std::max(0.0, r_statistic(model) - 1.0));
}

}  // namespace

double predictability_ub_spectral_full(const ObservableModel& model,
                                       const SpectralDecomposition& spec, std::size_t x, long L) {
    return mixing_tv_bound_full(spec, x, L) * posterior_factor(model);
}

double predictability_ub_spectral_gap(const ObservableModel& model,
                                      const SpectralDecomposition& spec, std::size_t x, long L) {
    return mixing_tv_bound_gap(spec, x, L) * posterior_factor(model);
}

double predictability_ub_chain_tv_from_weights(const ObservableModel& model,
                                               const double* weights) {
    const std::size_t n = model.states();
    return std::min(
        1.0, 0.5 * kernels::ops().sum_abs_diff(weights, model.chain().stationary().data(), n));
}

double predictability_ub_chain_tv(const ObservableModel& model, std::size_t x, long L) {
    const std::vector<double> w = model.chain().l_step_row(x, L);
    return predictability_ub_chain_tv_from_weights(model, w.data());
}

double chain_tv_half_variant(const ObservableModel& model, std::size_t x, long L) {
    return 0.5 * predictability_ub_chain_tv(model, x, L);
}

BoundReport bound_report(const ObservableModel& model, const SpectralDecomposition& spec,
                         std::size_t x, long L) {
    BoundReport rep;
    rep.r_statistic = r_statistic(model);
    const double factor = std::sqrt(2.0) * std::sqrt(std::max(0.0, rep.r_statistic - 1.0));
    rep.ub_spectral_full = mixing_tv_bound_full(spec, x, L) * factor;
    rep.ub_spectral_gap = mixing_tv_bound_gap(spec, x, L) * factor;
    const std::vector<double> w = model.chain().l_step_row(x, L);
    rep.ub_chain_tv = predictability_ub_chain_tv_from_weights(model, w.data());
    rep.exact = model.predictability_from_weights(w.data());
    rep.chain_tv_condition =
        rep.r_statistic > 1.5 && rep.r_statistic <= static_cast<double>(model.states()) + 1e-9;
    return rep;
}

}  // namespace predict
