#pragma once

#include "predict/observable.hpp"
#include "predict/spectral.hpp"

namespace predict {

// Posterior-overlap statistic R = sum_z (sum_y pi(y) r_y(z)^2) / (sum_y pi(y) r_y(z)).
// 1 when all posteriors coincide, K for disjoint point masses.
double r_statistic(const ObservableModel& model);

// Spectral predictability bounds: the chain mixing bound times
// sqrt(2) * sqrt(R - 1).
double predictability_ub_spectral_full(const ObservableModel& model,
                                       const SpectralDecomposition& spec, std::size_t x, long L);
double predictability_ub_spectral_gap(const ObservableModel& model,
                                      const SpectralDecomposition& spec, std::size_t x, long L);

// Data-processing bound: TV(P^L(x, .), pi). Valid for every R.
double predictability_ub_chain_tv(const ObservableModel& model, std::size_t x, long L);
double predictability_ub_chain_tv_from_weights(const ObservableModel& model,
                                               const double* weights);

// Half that value — the variant with the extra 1/2 in front of an already
// halved TV sum. Not a valid bound (point-mass posteriors violate it);
// computed only so diagnostics can show where it fails.
double chain_tv_half_variant(const ObservableModel& model, std::size_t x, long L);

struct BoundReport {
    double r_statistic = 0.0;
    double ub_spectral_full = 0.0;
    double ub_spectral_gap = 0.0;
    double ub_chain_tv = 0.0;
    double exact = 0.0;
    // 3/2 < R <= K, the applicability condition stated alongside the
    // chain-TV bound; the bound itself is reported unconditionally.
    bool chain_tv_condition = false;
};

BoundReport bound_report(const ObservableModel& model, const SpectralDecomposition& spec,
                         std::size_t x, long L);

}  // namespace predict
