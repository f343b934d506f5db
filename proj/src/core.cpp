#include "swhawkes/core.hpp"

#include <cmath>
#include <limits>

namespace swhawkes {

namespace {

constexpr double kSimplexTol = 1e-12;

bool is_simplex(const std::vector<double>& p) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= -kSimplexTol && v <= 1.0 + kSimplexTol)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= kSimplexTol * std::max<size_t>(1, p.size());
}

}  // namespace

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSimplex: return "InvalidSimplex";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::Supercritical: return "Supercritical";
        case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
        case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
        case ErrorCode::NegativeRate: return "NegativeRate";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnsupportedQStar: return "UnsupportedQStar";
        case ErrorCode::ExplosionGuard: return "ExplosionGuard";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

ContinuousParams ContinuousParams::scaled(double intensity) const {
    ContinuousParams out = *this;
    for (double& v : out.m) v *= intensity;
    return out;
}

void validate(const DiscreteParams& theta) {
    const int q = theta.n_states();
    if (q < 1) throw Error(ErrorCode::InvalidRange, "need at least one state");
    if (static_cast<int>(theta.nu.size()) != q ||
        static_cast<int>(theta.pi.size()) != q)
        throw Error(ErrorCode::LengthMismatch, "nu/pi dimensions disagree with mu");
    for (const auto& row : theta.pi)
        if (static_cast<int>(row.size()) != q)
            throw Error(ErrorCode::LengthMismatch, "pi is not square");

    if (!is_simplex(theta.nu))
        throw Error(ErrorCode::InvalidSimplex, "nu is not a probability vector");
    for (const auto& row : theta.pi)
        if (!is_simplex(row))
            throw Error(ErrorCode::InvalidSimplex, "pi row is not a probability vector");

    for (double v : theta.mu)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidRange, "mu must be nonnegative");
    if (!(theta.alpha >= 0.0) || !std::isfinite(theta.alpha))
        throw Error(ErrorCode::InvalidRange, "alpha must be nonnegative");
    if (!(theta.beta >= 0.0 && theta.beta < 1.0))
        throw Error(ErrorCode::InvalidRange, "beta must lie in [0, 1)");
    if (theta.branching_ratio() >= 1.0)
        throw Error(ErrorCode::Supercritical, "alpha/(1-beta) must be below 1");
}

void validate(const ContinuousParams& c) {
    const int q = c.n_states();
    if (q < 1) throw Error(ErrorCode::InvalidRange, "need at least one state");
    if (static_cast<int>(c.p0.size()) != q || static_cast<int>(c.rates.size()) != q)
        throw Error(ErrorCode::LengthMismatch, "p0/rates dimensions disagree with m");
    if (!is_simplex(c.p0))
        throw Error(ErrorCode::InvalidSimplex, "p0 is not a probability vector");
    for (int i = 0; i < q; ++i) {
        if (static_cast<int>(c.rates[i].size()) != q)
            throw Error(ErrorCode::LengthMismatch, "rate matrix is not square");
        double sum = 0.0;
        for (int j = 0; j < q; ++j) {
            if (i != j && c.rates[i][j] < 0.0)
                throw Error(ErrorCode::InvalidRange, "off-diagonal rate is negative");
            sum += c.rates[i][j];
        }
        if (std::abs(sum) > 1e-12 * std::max(1.0, std::abs(c.rates[i][i])))
            throw Error(ErrorCode::InvalidRange, "rate matrix row does not sum to 0");
    }
    for (double v : c.m)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidRange, "m must be nonnegative");
    if (!(c.a >= 0.0)) throw Error(ErrorCode::InvalidRange, "a must be nonnegative");
    if (!(c.b > 0.0)) throw Error(ErrorCode::InvalidRange, "b must be positive");
    if (c.a / c.b >= 1.0)
        throw Error(ErrorCode::Supercritical, "a/b must be below 1");
}

void validate(const EventSequence& events) {
    if (!(events.horizon > 0.0))
        throw Error(ErrorCode::InvalidRange, "horizon must be positive");
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : events.times) {
        if (!(t >= 0.0 && t <= events.horizon))
            throw Error(ErrorCode::InvalidRange, "event time outside [0, horizon]");
        if (!(t > prev))
            throw Error(ErrorCode::InvalidRange, "event times must be strictly increasing");
        prev = t;
    }
}

DiscKernel cont_to_disc(const ContinuousParams& c, double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonPositiveDelta, "bin width must be positive");
    DiscKernel k;
    k.mu.reserve(c.m.size());
    for (double v : c.m) k.mu.push_back(v * delta);
    const double decay = std::exp(-c.b * delta);
    k.alpha = c.a / c.b * (1.0 - decay);
    k.beta = decay;
    return k;
}

ContKernel disc_to_cont(const std::vector<double>& mu, double alpha, double beta,
                        double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonPositiveDelta, "bin width must be positive");
    if (!(beta > 0.0 && beta < 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "beta must lie in (0, 1)");
    ContKernel k;
    k.b = -std::log(beta) / delta;
    k.a = alpha * k.b / (1.0 - beta);
    k.m.reserve(mu.size());
    for (double v : mu) k.m.push_back(v / delta);
    return k;
}

AuxiliaryPath auxiliary_path(const BinnedSeries& y, double alpha, double beta) {
    if (!(alpha >= 0.0))
        throw Error(ErrorCode::InvalidRange, "alpha must be nonnegative");
    if (!(beta >= 0.0 && beta < 1.0))
        throw Error(ErrorCode::InvalidRange, "beta must lie in [0, 1)");
    AuxiliaryPath path;
    path.u.resize(y.counts.size(), 0.0);
    for (size_t k = 1; k < y.counts.size(); ++k)
        path.u[k] = alpha * static_cast<double>(y.counts[k - 1]) + beta * path.u[k - 1];
    return path;
}

double log_poisson_pmf(long long x, double lambda) {
    if (x < 0) throw Error(ErrorCode::InvalidRange, "count must be nonnegative");
    if (!(lambda >= 0.0))
        throw Error(ErrorCode::NegativeRate, "poisson rate must be nonnegative");
    if (lambda == 0.0)
        return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    const double xd = static_cast<double>(x);
    return xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0);
}

}  // namespace swhawkes
