#pragma once

#include <cstdint>
#include <vector>

#include "swhawkes/core.hpp"

namespace swhawkes {

// Piecewise-constant hidden path of the continuous-time chain.  Segment i
// covers [jump_times[i], jump_times[i+1]) and the last one runs to horizon.
struct StatePath {
    std::vector<double> jump_times;  // ascending, first is 0
    std::vector<int> states;         // one 0-based label per segment
    double horizon = 1.0;

    int n_segments() const { return static_cast<int>(states.size()); }
    double segment_end(int i) const {
        return i + 1 < n_segments() ? jump_times[i + 1] : horizon;
    }
};

struct SimOutput {
    EventSequence events;
    StatePath z_path;
    std::uint64_t seed = 0;
};

struct DiscreteSample {
    std::vector<long long> counts;
    std::vector<int> z;  // 0-based hidden states
};

StatePath sample_ctmc(const std::vector<double>& p0,
                      const std::vector<std::vector<double>>& rates, double horizon,
                      std::uint64_t seed);

// Ogata thinning with the segment-local bound m_{Z(t)} + A(t), refreshed at
// events, at chain jumps, and after every rejected candidate.  Throws
// ExplosionGuard past max_events.
SimOutput sample_switching_hawkes(const ContinuousParams& c, double horizon,
                                  std::uint64_t seed,
                                  long long max_events = 10'000'000);

DiscreteSample sample_discrete(const DiscreteParams& theta, int n, std::uint64_t seed);

// n = max(1, round(coef_c * N)) half-open bins ((k-1)d, kd], first bin closed
// at 0, so the counts partition the events exactly.
BinnedSeries discretize(const EventSequence& events, double coef_c);

// Majority-occupancy state per bin; ties go to the lower state index.
std::vector<int> bin_state_majority(const StatePath& z, int n);

}  // namespace swhawkes
