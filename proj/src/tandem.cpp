#include "predict/tandem.hpp"

#include <algorithm>

#include "predict/errors.hpp"
#include "predict/kernels.hpp"

namespace predict {

namespace {
constexpr double kConvolutionTailTarget = 1e-10;
}

void TandemSystem::validate() const {
    if (hops.empty()) throw InvalidParameter("tandem system needs at least one hop");
    if (observed.size() != hops.size() || observed_states.size() != hops.size()) {
        throw InvalidParameter("tandem mask/state lengths do not match hop count");
    }
    for (std::size_t m = 0; m < hops.size(); ++m) {
        if (observed[m] && observed_states[m] >= hops[m].states()) {
            throw InvalidParameter("observed state out of range at hop " + std::to_string(m));
        }
    }
}

DiscretePmf convolve_trimmed(const DiscretePmf& p, const DiscretePmf& q) {
    std::vector<double> out(p.size() + q.size() - 1, 0.0);
    const auto& k = kernels::ops();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.mass()[i] != 0.0) k.axpy(out.data() + i, p.mass()[i], q.mass().data(), q.size());
    }
    double tail = 0.0;
    std::size_t end = out.size();
    while (end > 1 && tail + out[end - 1] < kConvolutionTailTarget) {
        tail += out[end - 1];
        --end;
    }
    out.resize(end);
    return DiscretePmf::from_weights(p.offset() + q.offset(), std::move(out));
}

DiscretePmf tandem_forecast(const TandemSystem& sys, long L) {
    sys.validate();
    DiscretePmf acc = sys.observed[0] ? sys.hops[0].forecast(sys.observed_states[0], L)
                                      : sys.hops[0].marginal();
    for (std::size_t m = 1; m < sys.hop_count(); ++m) {
        const DiscretePmf next = sys.observed[m] ? sys.hops[m].forecast(sys.observed_states[m], L)
                                                 : sys.hops[m].marginal();
        acc = convolve_trimmed(acc, next);
    }
    return acc;
}

DiscretePmf tandem_marginal(const TandemSystem& sys) {
    sys.validate();
    DiscretePmf acc = sys.hops[0].marginal();
    for (std::size_t m = 1; m < sys.hop_count(); ++m) {
        acc = convolve_trimmed(acc, sys.hops[m].marginal());
    }
    return acc;
}

double tandem_predictability(const TandemSystem& sys, long L) {
    return tv_distance(tandem_forecast(sys, L), tandem_marginal(sys));
}

double tandem_predictability_ub(const TandemSystem& sys, long L) {
    sys.validate();
    double acc = 0.0;
    for (std::size_t m = 0; m < sys.hop_count(); ++m) {
        if (sys.observed[m]) acc += sys.hops[m].predictability(sys.observed_states[m], L);
    }
    return std::min(1.0, acc);
}

}  // namespace predict
