#pragma once

#include <cstdint>
#include <vector>

#include "swhawkes/core.hpp"

namespace swhawkes {

// Smoothed state marginals tau[k][q] = P(Z_k = q | Y) and pairwise marginals
// eta[k][q][l] = P(Z_k = q, Z_{k+1} = l | Y), stored flat.
struct Posterior {
    int n = 0;
    int n_states = 0;
    std::vector<double> tau;  // n * Q
    std::vector<double> eta;  // (n-1) * Q * Q
    double log_lik = 0.0;

    double tau_at(int k, int q) const { return tau[k * n_states + q]; }
    double eta_at(int k, int q, int l) const {
        return eta[(k * n_states + q) * n_states + l];
    }
};

struct EMConfig {
    int max_iter = 500;
    double tau_tol = 1e-6;       // stopping rule on max |tau change|
    double lik_tol = 1e-8;       // relative log-lik stabilization (see fit_em)
    int mstep_max_steps = 50;
    double mstep_grad_tol = 1e-8;
    std::uint64_t seed = 1;
    bool pin_alpha_zero = false;  // Poisson-HMM mode: alpha = beta = 0 exactly
    int n_starts = 1;
    double ratio_cap = 0.999;     // upper cap on alpha/(1-beta) during ascent
};

struct FitReport {
    DiscreteParams theta_hat;
    double log_lik = 0.0;
    double aic = 0.0;
    int n_iter = 0;
    bool converged = false;
    int n = 0;
    int n_states = 0;
    std::vector<double> tau;  // n * Q, posterior at theta_hat
    DiscreteParams init_theta;
    double delta = 1.0;
};

struct ForwardResult {
    int n = 0;
    int n_states = 0;
    std::vector<double> filter;  // n * Q, P(Z_k = q | Y_1..Y_k)
    double log_lik = 0.0;
};

// Filtering recursion with time-varying emissions P(Y_k; mu_l + U_k), where l
// is the destination state.  Normalizers accumulate the marginal log-lik.
ForwardResult forward(const BinnedSeries& y, const AuxiliaryPath& u,
                      const DiscreteParams& theta);

Posterior backward_smooth(const ForwardResult& fwd, const DiscreteParams& theta);

// Complete log-likelihood of one hidden path (U recomputed from theta).
double complete_log_lik(const BinnedSeries& y, const DiscreteParams& theta,
                        const std::vector<int>& z);

// Enumeration over all Q^n hidden paths; guard n <= 12 and Q^n <= 1e6.
double exact_log_lik(const BinnedSeries& y, const DiscreteParams& theta);

// Expected complete log-likelihood under the given posterior.  Returns -inf
// (never throws) when a positive-probability term hits log 0.
double q_function(const DiscreteParams& theta, const Posterior& post,
                  const BinnedSeries& y);

struct QGrad {
    std::vector<double> d_mu;
    double d_alpha = 0.0;
    double d_beta = 0.0;
};

// Gradient of q_function in (mu, alpha, beta), with the auxiliary-path
// sensitivities dU/dalpha and dU/dbeta carried in one forward sweep.
QGrad grad_q(const DiscreteParams& theta, const Posterior& post,
             const BinnedSeries& y);

// Closed-form nu/pi update plus reparameterized gradient ascent on
// (mu, alpha, beta); never decreases the q_function (GEM).
DiscreteParams m_step(const Posterior& post, const BinnedSeries& y,
                      const DiscreteParams& current, const EMConfig& cfg);

// alpha/beta from a homogeneous (Q=1) fit, nu/pi/mu from a quantile-seeded
// Poisson-HMM fit; deterministic given cfg.seed (jitter stream).
DiscreteParams init_params(const BinnedSeries& y, int n_states, const EMConfig& cfg);

FitReport fit_em(const BinnedSeries& y, int n_states, const EMConfig& cfg);
FitReport fit_em_with_init(const BinnedSeries& y, const DiscreteParams& theta0,
                           const EMConfig& cfg);

}  // namespace swhawkes
