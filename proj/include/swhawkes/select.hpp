#pragma once

#include <string>
#include <vector>

#include "swhawkes/core.hpp"
#include "swhawkes/inference.hpp"

namespace swhawkes {

enum class ModelKind { PoissonHomog, PoissonHMM, HawkesHomog, HawkesHMM };

const char* to_string(ModelKind kind);

// AIC on the maximized scale: log_lik minus the parameter count.  The Hawkes
// HMM count is Q^2 + 2; the benchmark variants drop the unused parameters.
double aic(double log_lik, int n_states, ModelKind kind);

struct FitOutcome {
    int n_states = 0;
    bool ok = false;
    FitReport report;
    double aic_value = 0.0;
    std::string status;  // "ok" or the failure reason
};

struct SelectionResult {
    std::vector<FitOutcome> per_q;  // Q = 1..q_max in order
    int q_hat = 0;                  // argmax AIC, ties to the smaller Q
};

SelectionResult select_q(const BinnedSeries& y, int q_max, const EMConfig& cfg);

// Per-bin argmax of the posterior; ties to the lower state index.
std::vector<int> map_decode(const std::vector<double>& tau, int n, int n_states);

// Most probable hidden path in log space with the time-varying emissions;
// backtracking ties resolve to the lower index.
std::vector<int> viterbi(const BinnedSeries& y, const DiscreteParams& theta);

struct Alignment {
    double accuracy = 0.0;
    std::vector<int> perm;  // perm[predicted] = matched true label
};

// Best match proportion over all label permutations (exhaustive, Q <= 6);
// ties resolve to the lexicographically smallest permutation.
Alignment aligned_accuracy(const std::vector<int>& z_hat,
                           const std::vector<int>& z_true, int n_states);

}  // namespace swhawkes
