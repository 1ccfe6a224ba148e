#pragma once

#include <cstdint>
#include <vector>

#include "predict/geo_queue.hpp"
#include "predict/observable.hpp"
#include "predict/pmf.hpp"

namespace predict {

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t samples = 1;
    std::uint64_t burn_in = 0;
    std::uint64_t stream_id = 0;
};

// Counter-based generator: output i of stream s is splitmix64 applied to a
// per-(seed, stream) key plus the counter. Stateless across samples, so a
// fixed substream assignment gives bit-identical results no matter how the
// sample loop is partitioned.
class CounterRng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-counter";

    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

struct EmpiricalPmf {
    DiscretePmf pmf;
    std::uint64_t samples = 0;
};

// Walks the chain L steps from x and draws from the landing state's
// posterior, cfg.samples times. Sample i uses substream (stream_id, i), so
// the result is independent of any parallel partitioning.
EmpiricalPmf sample_forecast_empirical(const ObservableModel& model, std::size_t x, long L,
                                       const SimConfig& cfg);

// Slot-level Geo/Geo/1/K record. Per-slot rows are kept only for the first
// `record_slots`; counters and histograms cover the whole horizon.
struct QueueTrajectory {
    struct Slot {
        std::uint32_t queue_length;  // at slot end
        bool arrival;
        bool blocked;  // arrival encountered a full queue
        bool departure;
    };
    std::vector<Slot> slots;

    std::uint64_t total_slots = 0;
    std::uint64_t arrivals = 0;
    // Arrivals that found the queue in state K at the slot boundary (the
    // blocking-probability estimator under Bernoulli-arrival PASTA).
    std::uint64_t arrivals_finding_full = 0;
    // Arrivals actually lost: the queue was full and no departure freed a
    // seat within the slot.
    std::uint64_t dropped = 0;
    std::uint64_t departures = 0;

    // Queue length at slot boundaries (before each slot), length K+1.
    std::vector<std::uint64_t> state_histogram;
    // Transition counts between slot-boundary states, (K+1) x (K+1).
    std::vector<std::uint64_t> transition_counts;
    // sojourn_by_state[y][t] counts admitted packets that found y in the
    // system and spent t slots (arrival slot inclusive).
    std::vector<std::vector<std::uint64_t>> sojourn_by_state;
};

// Within a slot: the arrival is decided first (and counts as blocked if the
// queue is at K); the head of line then completes service with probability
// mu; an arrival that found the queue full takes the freed seat when the
// departure happens. A packet arriving to an empty queue is serviceable in
// its arrival slot; sojourn counts that slot, so it is never below 1 and
// the sojourn of a packet finding y in the system is NB(y+1, mu). The
// boundary-state process then reproduces the queue's transition matrix
// exactly.
QueueTrajectory simulate_geo_queue(const GeoQueueParams& p, std::uint64_t horizon_slots,
                                   const SimConfig& cfg, std::size_t record_slots = 0);

// Fraction of L-step chain walks from x that land in state K.
double empirical_blocking_forecast(const GeoQueueParams& p, std::size_t x, long L,
                                   const SimConfig& cfg);

}  // namespace predict
