#include "predict/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "predict/errors.hpp"

namespace predict {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per-state cumulative distributions for O(log n) inverse sampling.
struct RowSampler {
    std::vector<double> cdf;  // rows x n, row-major
    std::size_t n;

    explicit RowSampler(const std::vector<double>& row_major, std::size_t rows, std::size_t cols)
        : cdf(rows * cols), n(cols) {
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                acc += row_major[r * cols + c];
                cdf[r * cols + c] = acc;
            }
            cdf[r * cols + cols - 1] = 1.0;
        }
    }

    std::size_t draw(std::size_t row, double u) const {
        const double* begin = cdf.data() + row * n;
        return static_cast<std::size_t>(std::upper_bound(begin, begin + n, u) - begin);
    }
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xda942042e4dd58b5ULL))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ + counter_++ * kGolden); }

EmpiricalPmf sample_forecast_empirical(const ObservableModel& model, std::size_t x, long L,
                                       const SimConfig& cfg) {
    if (x >= model.states()) throw InvalidParameter("state out of range");
    if (cfg.samples < 1) throw InvalidParameter("samples must be >= 1");

    const std::size_t n = model.states();
    const RowSampler chain_cdf(model.chain().transition(), n, n);

    // Posterior CDFs per state on each posterior's own support.
    std::vector<std::vector<double>> post_cdf(n);
    for (std::size_t y = 0; y < n; ++y) {
        const auto& mass = model.posterior(y).mass();
        post_cdf[y].resize(mass.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < mass.size(); ++i) {
            acc += mass[i];
            post_cdf[y][i] = acc;
        }
        post_cdf[y].back() = 1.0;
    }

    std::vector<double> counts(model.span(), 0.0);
    for (std::uint64_t i = 0; i < cfg.samples; ++i) {
        CounterRng rng(cfg.seed, cfg.stream_id * 0x10000000000ULL + i);
        std::size_t state = x;
        for (long step = 0; step < L; ++step) state = chain_cdf.draw(state, rng.next_double());
        const auto& cdf = post_cdf[state];
        const double u = rng.next_double();
        const std::size_t zi = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const long z = model.posterior(state).offset() + static_cast<long>(zi);
        counts[static_cast<std::size_t>(z - model.support_lo())] += 1.0;
    }
    return {DiscretePmf::from_weights(model.support_lo(), std::move(counts)), cfg.samples};
}

QueueTrajectory simulate_geo_queue(const GeoQueueParams& p, std::uint64_t horizon_slots,
                                   const SimConfig& cfg, std::size_t record_slots) {
    if (horizon_slots < 1) throw InvalidParameter("horizon must be >= 1");
    const std::size_t cap = static_cast<std::size_t>(p.capacity);

    QueueTrajectory out;
    out.state_histogram.assign(cap + 1, 0);
    out.transition_counts.assign((cap + 1) * (cap + 1), 0);
    out.sojourn_by_state.assign(cap + 1, {});
    out.slots.reserve(std::min<std::uint64_t>(record_slots, horizon_slots));

    CounterRng rng(cfg.seed, cfg.stream_id);

    // FIFO ring of arrival slots plus the state each packet found.
    std::vector<std::uint64_t> arrival_slot(cap + 1);
    std::vector<std::uint32_t> found_state(cap + 1);
    std::size_t head = 0, count = 0;
    auto ring_push = [&](std::uint64_t slot, std::uint32_t found) {
        const std::size_t tail = (head + count) % (cap + 1);
        arrival_slot[tail] = slot;
        found_state[tail] = found;
        ++count;
    };

    const std::uint64_t total = cfg.burn_in + horizon_slots;
    for (std::uint64_t slot = 0; slot < total; ++slot) {
        const bool measured = slot >= cfg.burn_in;
        const std::size_t state_before = count;

        const bool arrival = rng.next_double() < p.alpha;
        const bool found_full = arrival && state_before == cap;

        // Service acts on the head of line; a packet that arrived to an
        // empty queue is the head already.
        bool pending_admission = arrival && found_full;
        if (arrival && !found_full) ring_push(slot, static_cast<std::uint32_t>(state_before));

        bool departure = false;
        if (count > 0 && rng.next_double() < p.mu) {
            departure = true;
            const std::uint64_t sojourn = slot - arrival_slot[head] + 1;
            const std::uint32_t found = found_state[head];
            head = (head + 1) % (cap + 1);
            --count;
            if (measured) {
                auto& hist = out.sojourn_by_state[found];
                if (hist.size() <= sojourn) hist.resize(sojourn + 1, 0);
                ++hist[sojourn];
                ++out.departures;
            }
        }

        bool dropped = false;
        if (pending_admission) {
            if (count <= cap - 1) {
                ring_push(slot, static_cast<std::uint32_t>(state_before));
            } else {
                dropped = true;
            }
        }

        if (measured) {
            ++out.total_slots;
            if (arrival) ++out.arrivals;
            if (found_full) ++out.arrivals_finding_full;
            if (dropped) ++out.dropped;
            ++out.state_histogram[state_before];
            out.transition_counts[state_before * (cap + 1) + count] += 1;
            if (out.slots.size() < record_slots) {
                out.slots.push_back({static_cast<std::uint32_t>(count), arrival, found_full, departure});
            }
        }
    }
    return out;
}

double empirical_blocking_forecast(const GeoQueueParams& p, std::size_t x, long L,
                                   const SimConfig& cfg) {
    const MarkovChain chain = geo_transition_matrix(p);
    if (x >= chain.states()) throw InvalidParameter("state out of range");
    if (cfg.samples < 1) throw InvalidParameter("samples must be >= 1");
    const std::size_t n = chain.states();
    const RowSampler cdf(chain.transition(), n, n);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < cfg.samples; ++i) {
        CounterRng rng(cfg.seed, cfg.stream_id * 0x10000000000ULL + i);
        std::size_t state = x;
        for (long step = 0; step < L; ++step) state = cdf.draw(state, rng.next_double());
        if (state == n - 1) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cfg.samples);
}

}  // namespace predict
