#include "swhawkes/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "swhawkes/rng.hpp"

namespace swhawkes {

StatePath sample_ctmc(const std::vector<double>& p0,
                      const std::vector<std::vector<double>>& rates, double horizon,
                      std::uint64_t seed) {
    if (!(horizon > 0.0))
        throw Error(ErrorCode::InvalidRange, "horizon must be positive");
    ContinuousParams check;
    check.p0 = p0;
    check.rates = rates;
    check.m.assign(p0.size(), 0.0);
    check.a = 0.0;
    check.b = 1.0;
    validate(check);

    Rng rng(seed);
    const int q = static_cast<int>(p0.size());
    StatePath path;
    path.horizon = horizon;
    int state = rng.categorical(p0);
    path.jump_times.push_back(0.0);
    path.states.push_back(state);

    double t = 0.0;
    std::vector<double> move(q);
    while (true) {
        const double out_rate = -rates[state][state];
        if (out_rate <= 0.0) break;  // absorbing: holds to the horizon
        t += rng.exponential(out_rate);
        if (t >= horizon) break;
        for (int next = 0; next < q; ++next)
            move[next] = next == state ? 0.0 : rates[state][next] / out_rate;
        state = rng.categorical(move);
        path.jump_times.push_back(t);
        path.states.push_back(state);
    }
    return path;
}

SimOutput sample_switching_hawkes(const ContinuousParams& c, double horizon,
                                  std::uint64_t seed, long long max_events) {
    validate(c);
    if (!(horizon > 0.0))
        throw Error(ErrorCode::InvalidRange, "horizon must be positive");

    SimOutput out;
    out.seed = seed;
    out.z_path = sample_ctmc(c.p0, c.rates, horizon, derive_seed(seed, {1}));
    out.events.horizon = horizon;

    Rng rng(derive_seed(seed, {2}));
    double excitation = 0.0;  // sum of a * exp(-b (t - T_l)) over past events
    for (int seg = 0; seg < out.z_path.n_segments(); ++seg) {
        const double baseline = c.m[out.z_path.states[seg]];
        double t = out.z_path.jump_times[seg];
        const double t_end = out.z_path.segment_end(seg);
        while (t < t_end) {
            const double bound = baseline + excitation;
            if (bound <= 0.0) {
                t = t_end;
                break;
            }
            const double wait = rng.exponential(bound);
            if (t + wait >= t_end) {
                excitation *= std::exp(-c.b * (t_end - t));
                t = t_end;
                break;
            }
            t += wait;
            excitation *= std::exp(-c.b * wait);
            const double intensity = baseline + excitation;
            if (rng.uniform() * bound <= intensity) {
                out.events.times.push_back(t);
                excitation += c.a;
                if (static_cast<long long>(out.events.times.size()) > max_events)
                    throw Error(ErrorCode::ExplosionGuard,
                                "event count exceeded the cap; parameters look "
                                "supercritical or mis-scaled");
            }
        }
    }
    return out;
}

DiscreteSample sample_discrete(const DiscreteParams& theta, int n, std::uint64_t seed) {
    validate(theta);
    if (n < 1) throw Error(ErrorCode::InvalidRange, "need at least one bin");

    Rng rng(seed);
    DiscreteSample s;
    s.counts.resize(n);
    s.z.resize(n);
    double u = 0.0;
    s.z[0] = rng.categorical(theta.nu);
    s.counts[0] = rng.poisson(theta.mu[s.z[0]]);
    for (int k = 1; k < n; ++k) {
        u = theta.alpha * static_cast<double>(s.counts[k - 1]) + theta.beta * u;
        s.z[k] = rng.categorical(theta.pi[s.z[k - 1]]);
        s.counts[k] = rng.poisson(theta.mu[s.z[k]] + u);
    }
    return s;
}

BinnedSeries discretize(const EventSequence& events, double coef_c) {
    validate(events);
    if (events.times.empty())
        throw Error(ErrorCode::EmptySequence, "cannot discretize an empty sequence");
    if (!(coef_c > 0.0))
        throw Error(ErrorCode::InvalidRange, "discretization coefficient must be positive");

    const auto n_events = static_cast<double>(events.times.size());
    const auto n = std::max<long long>(1, std::llround(coef_c * n_events));
    BinnedSeries y;
    y.delta = events.horizon / static_cast<double>(n);
    y.counts.assign(n, 0);
    for (double t : events.times) {
        auto bin = static_cast<long long>(std::ceil(t / y.delta)) - 1;
        bin = std::clamp<long long>(bin, 0, n - 1);
        ++y.counts[bin];
    }
    return y;
}

std::vector<int> bin_state_majority(const StatePath& z, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidRange, "need at least one bin");
    int q = 0;
    for (int s : z.states) q = std::max(q, s + 1);
    const double delta = z.horizon / n;

    std::vector<int> labels(n);
    std::vector<double> occupancy(q);
    int seg = 0;  // first segment that may overlap the current bin
    for (int bin = 0; bin < n; ++bin) {
        const double lo = bin * delta;
        const double hi = bin + 1 == n ? z.horizon : (bin + 1) * delta;
        std::fill(occupancy.begin(), occupancy.end(), 0.0);
        while (seg < z.n_segments() && z.jump_times[seg] < hi) {
            const double overlap =
                std::min(hi, z.segment_end(seg)) - std::max(lo, z.jump_times[seg]);
            if (overlap > 0.0) occupancy[z.states[seg]] += overlap;
            if (z.segment_end(seg) > hi) break;  // straddles into the next bin
            ++seg;
        }
        int best = 0;
        for (int s = 1; s < q; ++s)
            if (occupancy[s] > occupancy[best]) best = s;
        labels[bin] = best;
    }
    return labels;
}

}  // namespace swhawkes
