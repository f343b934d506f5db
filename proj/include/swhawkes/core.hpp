#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace swhawkes {

enum class ErrorCode {
    InvalidSimplex,
    InvalidRange,
    Supercritical,
    NonPositiveDelta,
    BetaOutOfRange,
    NegativeRate,
    EmptySequence,
    TooLarge,
    NumericalUnderflow,
    LengthMismatch,
    UnsupportedQStar,
    ExplosionGuard,
    IoError,
    ParseError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Parameters of the discrete-time switching Hawkes model: hidden chain
// (nu, pi), per-state baselines mu, and the shared memory pair (alpha, beta).
struct DiscreteParams {
    std::vector<double> nu;               // initial distribution, length Q
    std::vector<std::vector<double>> pi;  // Q x Q row-stochastic transitions
    std::vector<double> mu;               // baseline rate per state, events per bin
    double alpha = 0.0;                   // first-lag memory weight, >= 0
    double beta = 0.0;                    // geometric decay, in [0, 1)

    int n_states() const { return static_cast<int>(mu.size()); }
    double branching_ratio() const { return alpha / (1.0 - beta); }
};

// Parameters of the continuous-time switching Hawkes process.  scaled(L)
// multiplies the baseline vector m only: the branching ratio a/b stays put,
// so L controls the expected number of events proportionally.
struct ContinuousParams {
    std::vector<double> p0;                  // initial distribution, length Q*
    std::vector<std::vector<double>> rates;  // Q* x Q* rate matrix, rows sum to 0
    std::vector<double> m;                   // baseline intensities, events per unit time
    double a = 0.0;                          // excitation jump size
    double b = 1.0;                          // exponential decay rate, > 0

    int n_states() const { return static_cast<int>(m.size()); }
    double branching_ratio() const { return a / b; }
    ContinuousParams scaled(double intensity) const;
};

struct EventSequence {
    std::vector<double> times;  // strictly increasing, all in [0, horizon]
    double horizon = 1.0;
};

struct BinnedSeries {
    std::vector<long long> counts;
    double delta = 1.0;  // bin width

    int size() const { return static_cast<int>(counts.size()); }
};

// U_k = alpha * Y_{k-1} + beta * U_{k-1}, U_1 = 0.  Carries one value per bin.
struct AuxiliaryPath {
    std::vector<double> u;
};

void validate(const DiscreteParams& theta);
void validate(const ContinuousParams& c);
void validate(const EventSequence& events);

// Discrete kernel triple produced by the continuous -> discrete map.
struct DiscKernel {
    std::vector<double> mu;
    double alpha = 0.0;
    double beta = 0.0;
};

// Continuous kernel triple produced by the inverse map.
struct ContKernel {
    std::vector<double> m;
    double a = 0.0;
    double b = 1.0;
};

// mu = m*delta, alpha = (a/b)(1 - e^{-b delta}), beta = e^{-b delta}.
DiscKernel cont_to_disc(const ContinuousParams& c, double delta);

// Inverse of cont_to_disc: b = -ln(beta)/delta, a = alpha*b/(1-beta), m = mu/delta.
ContKernel disc_to_cont(const std::vector<double>& mu, double alpha, double beta,
                        double delta);

AuxiliaryPath auxiliary_path(const BinnedSeries& y, double alpha, double beta);

// log P(x; lambda) for the Poisson pmf, stable via lgamma.  P(0; 0) = 1 and
// P(x > 0; 0) = 0, so rates driven to zero stay well-defined.
double log_poisson_pmf(long long x, double lambda);

}  // namespace swhawkes
