#include "swhawkes/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "swhawkes/rng.hpp"

namespace swhawkes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMuFloor = 1e-10;  // keeps log-emissions finite during ascent

double count_mean(const BinnedSeries& y) {
    double s = 0.0;
    for (long long v : y.counts) s += static_cast<double>(v);
    return s / static_cast<double>(y.counts.size());
}

double count_sd(const BinnedSeries& y) {
    const double m = count_mean(y);
    double s = 0.0;
    for (long long v : y.counts) {
        const double d = static_cast<double>(v) - m;
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(y.counts.size()));
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Emission part of the q_function, up to the additive lgamma(y!) constant.
// This is the objective of the gradient ascent; the dropped constant cancels
// in every comparison the ascent makes.
double emission_objective(const BinnedSeries& y, const Posterior& post,
                          const std::vector<double>& mu, double alpha, double beta) {
    const int n = y.size();
    const int q_num = static_cast<int>(mu.size());
    double acc = 0.0;
    double u = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) u = alpha * static_cast<double>(y.counts[k - 1]) + beta * u;
        const auto yk = static_cast<double>(y.counts[k]);
        for (int q = 0; q < q_num; ++q) {
            const double tau = post.tau_at(k, q);
            if (tau == 0.0) continue;
            const double lambda = mu[q] + u;
            if (lambda <= 0.0) {
                if (yk > 0.0) return kNegInf;
                continue;  // P(0; 0) = 1
            }
            acc += tau * (yk * std::log(lambda) - lambda);
        }
    }
    return acc;
}

struct EmissionGrad {
    std::vector<double> d_mu;
    double d_alpha = 0.0;
    double d_beta = 0.0;
};

EmissionGrad emission_gradient(const BinnedSeries& y, const Posterior& post,
                               const std::vector<double>& mu, double alpha,
                               double beta) {
    const int n = y.size();
    const int q_num = static_cast<int>(mu.size());
    EmissionGrad g;
    g.d_mu.assign(q_num, 0.0);
    double u = 0.0, du_da = 0.0, du_db = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            const auto y_prev = static_cast<double>(y.counts[k - 1]);
            du_da = y_prev + beta * du_da;
            du_db = u + beta * du_db;
            u = alpha * y_prev + beta * u;
        }
        const auto yk = static_cast<double>(y.counts[k]);
        double slope_sum = 0.0;  // sum_q tau (y/lambda - 1)
        for (int q = 0; q < q_num; ++q) {
            const double tau = post.tau_at(k, q);
            if (tau == 0.0) continue;
            const double lambda = mu[q] + u;
            const double ratio = yk > 0.0 ? yk / lambda : 0.0;
            const double slope = tau * (ratio - 1.0);
            g.d_mu[q] += slope;
            slope_sum += slope;
        }
        g.d_alpha += du_da * slope_sum;
        g.d_beta += du_db * slope_sum;
    }
    return g;
}

// Unconstrained coordinates for the ascent: log mu per state, logit of the
// branching ratio r = alpha/(1-beta) relative to its cap, and logit beta.
struct AscentSpace {
    int q_num;
    double cap;

    std::vector<double> to_x(const std::vector<double>& mu, double alpha,
                             double beta) const {
        std::vector<double> x(q_num + 2);
        for (int q = 0; q < q_num; ++q) x[q] = std::log(std::max(mu[q], kMuFloor));
        const double ratio =
            std::clamp(alpha / (1.0 - beta), 1e-9, cap * (1.0 - 1e-12));
        x[q_num] = logit(ratio / cap);
        x[q_num + 1] = logit(std::clamp(beta, 1e-9, 1.0 - 1e-9));
        return x;
    }

    void to_theta(const std::vector<double>& x, std::vector<double>& mu,
                  double& alpha, double& beta) const {
        mu.resize(q_num);
        for (int q = 0; q < q_num; ++q)
            mu[q] = std::max(kMuFloor, std::exp(std::min(x[q], 50.0)));
        const double ratio = cap * sigmoid(x[q_num]);
        beta = sigmoid(x[q_num + 1]);
        alpha = ratio * (1.0 - beta);
    }

    std::vector<double> pull_back(const std::vector<double>& x,
                                  const EmissionGrad& g) const {
        std::vector<double> gx(q_num + 2);
        std::vector<double> mu;
        double alpha, beta;
        to_theta(x, mu, alpha, beta);
        const double ratio = cap * sigmoid(x[q_num]);
        for (int q = 0; q < q_num; ++q) gx[q] = g.d_mu[q] * mu[q];
        const double dratio = ratio * (1.0 - ratio / cap);
        gx[q_num] = g.d_alpha * (1.0 - beta) * dratio;
        gx[q_num + 1] = (g.d_beta - g.d_alpha * ratio) * beta * (1.0 - beta);
        return gx;
    }
};

// Backtracking gradient ascent on the emission objective.  Accepts only
// improving steps, so the enclosing EM iteration is a GEM.
void ascend_kernel(const BinnedSeries& y, const Posterior& post,
                   const EMConfig& cfg, std::vector<double>& mu, double& alpha,
                   double& beta) {
    const AscentSpace space{static_cast<int>(mu.size()), cfg.ratio_cap};
    std::vector<double> x = space.to_x(mu, alpha, beta);
    space.to_theta(x, mu, alpha, beta);  // snap to the feasible interior
    double value = emission_objective(y, post, mu, alpha, beta);
    double step = 1.0;

    std::vector<double> x_try(x.size());
    std::vector<double> mu_try;
    std::vector<double> x_prev, g_prev;
    for (int it = 0; it < cfg.mstep_max_steps; ++it) {
        const EmissionGrad g = emission_gradient(y, post, mu, alpha, beta);
        std::vector<double> gx = space.pull_back(x, g);
        double gnorm = 0.0;
        for (double v : gx) gnorm = std::max(gnorm, std::abs(v));
        if (!(gnorm > cfg.mstep_grad_tol)) break;

        // Barzilai-Borwein step as the line-search starting point; it copes
        // with the narrow (ratio, beta) valley far better than a unit step
        if (!x_prev.empty()) {
            double sy = 0.0, yy = 0.0;
            for (size_t i = 0; i < x.size(); ++i) {
                const double dx = x[i] - x_prev[i];
                const double dg = gx[i] - g_prev[i];
                sy += dx * dg;
                yy += dg * dg;
            }
            if (yy > 0.0 && std::abs(sy) > 0.0)
                step = std::clamp(std::abs(sy) / yy, 1e-8, 1e4);
        }
        x_prev = x;
        g_prev = gx;

        const double scale = gnorm > 2.0 / step ? 2.0 / (step * gnorm) : 1.0;
        double slope = 0.0;
        for (double v : gx) slope += v * v * scale;

        double t = step;
        double gain = -1.0;
        for (int halving = 0; halving < 60; ++halving) {
            for (size_t i = 0; i < x.size(); ++i) x_try[i] = x[i] + t * scale * gx[i];
            double a_try, b_try;
            space.to_theta(x_try, mu_try, a_try, b_try);
            const double v_try = emission_objective(y, post, mu_try, a_try, b_try);
            if (v_try >= value + 1e-4 * t * slope) {
                gain = v_try - value;
                x = x_try;
                mu = mu_try;
                alpha = a_try;
                beta = b_try;
                value = v_try;
                break;
            }
            t *= 0.5;
        }
        // no improving step, or progress below double resolution
        if (gain <= 0.0) break;
    }
}

struct EmState {
    DiscreteParams theta;
    Posterior post;
    double log_lik = kNegInf;
    int n_iter = 0;
    bool converged = false;
};

EmState run_em(const BinnedSeries& y, const DiscreteParams& theta0,
               const EMConfig& cfg) {
    EmState st;
    st.theta = theta0;
    std::vector<double> tau_prev;
    double ll_prev = kNegInf;
    for (int it = 0;; ++it) {
        const AuxiliaryPath u = auxiliary_path(y, st.theta.alpha, st.theta.beta);
        const ForwardResult fwd = forward(y, u, st.theta);
        st.post = backward_smooth(fwd, st.theta);
        st.log_lik = fwd.log_lik;
        if (!tau_prev.empty()) {
            double dtau = 0.0;
            for (size_t i = 0; i < tau_prev.size(); ++i)
                dtau = std::max(dtau, std::abs(st.post.tau[i] - tau_prev[i]));
            const double dll = std::abs(st.log_lik - ll_prev);
            // The tau rule alone is vacuous at Q = 1 (tau is identically one),
            // so convergence also waits for the log-lik to stabilize.
            if (dtau <= cfg.tau_tol &&
                dll <= cfg.lik_tol * (1.0 + std::abs(st.log_lik))) {
                st.converged = true;
                break;
            }
        }
        if (it >= cfg.max_iter) break;
        tau_prev = st.post.tau;
        ll_prev = st.log_lik;
        st.theta = m_step(st.post, y, st.theta, cfg);
        st.n_iter = it + 1;
    }
    return st;
}

int model_dof(int q, bool pinned) { return pinned ? q * q : q * q + 2; }

DiscreteParams sticky_quantile_init(const BinnedSeries& y, int q_num, Rng& rng) {
    std::vector<double> sorted(y.counts.begin(), y.counts.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const double sd = count_sd(y);

    DiscreteParams theta;
    theta.nu.assign(q_num, 1.0 / q_num);
    theta.pi.assign(q_num, std::vector<double>(q_num, q_num > 1 ? 0.1 / (q_num - 1) : 1.0));
    for (int q = 0; q < q_num && q_num > 1; ++q) theta.pi[q][q] = 0.9;
    theta.mu.resize(q_num);
    for (int q = 0; q < q_num; ++q) {
        const double p = (q + 0.5) / q_num;
        const double pos = std::clamp(p * n - 0.5, 0.0, n - 1.0);
        const auto lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double quant = sorted[lo] + (pos - static_cast<double>(lo)) *
                                              (sorted[hi] - sorted[lo]);
        // uniform jitter of +-0.05*(sd + 0.1) breaks ties on constant series
        const double jitter = (rng.uniform() - 0.5) * 0.1 * (sd + 0.1);
        theta.mu[q] = std::max(1e-6, quant + jitter);
    }
    theta.alpha = 0.0;
    theta.beta = 0.0;
    return theta;
}

}  // namespace

ForwardResult forward(const BinnedSeries& y, const AuxiliaryPath& u,
                      const DiscreteParams& theta) {
    const int n = y.size();
    const int q_num = theta.n_states();
    if (static_cast<int>(u.u.size()) != n)
        throw Error(ErrorCode::LengthMismatch, "auxiliary path length mismatch");

    ForwardResult res;
    res.n = n;
    res.n_states = q_num;
    res.filter.assign(static_cast<size_t>(n) * q_num, 0.0);
    std::vector<double> logw(q_num);
    std::vector<double> pred(q_num);

    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            for (int q = 0; q < q_num; ++q)
                logw[q] = (theta.nu[q] > 0.0 ? std::log(theta.nu[q]) : kNegInf) +
                          log_poisson_pmf(y.counts[0], theta.mu[q] + u.u[0]);
        } else {
            const double* prev = &res.filter[static_cast<size_t>(k - 1) * q_num];
            for (int l = 0; l < q_num; ++l) {
                double s = 0.0;
                for (int q = 0; q < q_num; ++q) s += prev[q] * theta.pi[q][l];
                pred[l] = s;
            }
            for (int l = 0; l < q_num; ++l)
                logw[l] = (pred[l] > 0.0 ? std::log(pred[l]) : kNegInf) +
                          log_poisson_pmf(y.counts[k], theta.mu[l] + u.u[k]);
        }
        const double shift = *std::max_element(logw.begin(), logw.end());
        if (shift == kNegInf)
            throw Error(ErrorCode::NumericalUnderflow,
                        "all states have zero emission probability at bin " +
                            std::to_string(k));
        double norm = 0.0;
        double* row = &res.filter[static_cast<size_t>(k) * q_num];
        for (int q = 0; q < q_num; ++q) {
            row[q] = std::exp(logw[q] - shift);
            norm += row[q];
        }
        for (int q = 0; q < q_num; ++q) row[q] /= norm;
        res.log_lik += shift + std::log(norm);
    }
    return res;
}

Posterior backward_smooth(const ForwardResult& fwd, const DiscreteParams& theta) {
    const int n = fwd.n;
    const int q_num = fwd.n_states;
    Posterior post;
    post.n = n;
    post.n_states = q_num;
    post.log_lik = fwd.log_lik;
    post.tau.assign(static_cast<size_t>(n) * q_num, 0.0);
    post.eta.assign(n > 1 ? static_cast<size_t>(n - 1) * q_num * q_num : 0, 0.0);

    for (int q = 0; q < q_num; ++q)
        post.tau[static_cast<size_t>(n - 1) * q_num + q] =
            fwd.filter[static_cast<size_t>(n - 1) * q_num + q];

    std::vector<double> gate(q_num);
    for (int k = n - 2; k >= 0; --k) {
        const double* fk = &fwd.filter[static_cast<size_t>(k) * q_num];
        const double* tau_next = &post.tau[static_cast<size_t>(k + 1) * q_num];
        double* tau_k = &post.tau[static_cast<size_t>(k) * q_num];
        double* eta_k = &post.eta[static_cast<size_t>(k) * q_num * q_num];
        for (int l = 0; l < q_num; ++l) {
            double g = 0.0;
            for (int q = 0; q < q_num; ++q) g += fk[q] * theta.pi[q][l];
            gate[l] = g;
        }
        for (int q = 0; q < q_num; ++q) {
            double row_sum = 0.0;
            for (int l = 0; l < q_num; ++l) {
                const double e = gate[l] > 0.0
                                     ? fk[q] * theta.pi[q][l] * tau_next[l] / gate[l]
                                     : 0.0;
                eta_k[q * q_num + l] = e;
                row_sum += e;
            }
            tau_k[q] = row_sum;
        }
    }
    return post;
}

double complete_log_lik(const BinnedSeries& y, const DiscreteParams& theta,
                        const std::vector<int>& z) {
    const int n = y.size();
    if (static_cast<int>(z.size()) != n)
        throw Error(ErrorCode::LengthMismatch, "path length mismatch");
    const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
    double ll = theta.nu[z[0]] > 0.0 ? std::log(theta.nu[z[0]]) : kNegInf;
    ll += log_poisson_pmf(y.counts[0], theta.mu[z[0]] + u.u[0]);
    for (int k = 1; k < n; ++k) {
        const double p = theta.pi[z[k - 1]][z[k]];
        ll += p > 0.0 ? std::log(p) : kNegInf;
        ll += log_poisson_pmf(y.counts[k], theta.mu[z[k]] + u.u[k]);
    }
    return ll;
}

double exact_log_lik(const BinnedSeries& y, const DiscreteParams& theta) {
    const int n = y.size();
    const int q_num = theta.n_states();
    if (n > 12 || std::pow(static_cast<double>(q_num), n) > 1e6)
        throw Error(ErrorCode::TooLarge, "path enumeration limited to Q^n <= 1e6");

    const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
    std::vector<double> emit(static_cast<size_t>(n) * q_num);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < q_num; ++q)
            emit[static_cast<size_t>(k) * q_num + q] =
                log_poisson_pmf(y.counts[k], theta.mu[q] + u.u[k]);

    std::vector<int> z(n, 0);
    double best = kNegInf;
    double scaled_sum = 0.0;
    while (true) {
        double ll = theta.nu[z[0]] > 0.0 ? std::log(theta.nu[z[0]]) : kNegInf;
        ll += emit[z[0]];
        for (int k = 1; k < n; ++k) {
            const double p = theta.pi[z[k - 1]][z[k]];
            ll += (p > 0.0 ? std::log(p) : kNegInf) +
                  emit[static_cast<size_t>(k) * q_num + z[k]];
        }
        if (ll != kNegInf) {
            if (ll <= best) {
                scaled_sum += std::exp(ll - best);
            } else {
                scaled_sum = scaled_sum * std::exp(best - ll) + 1.0;
                best = ll;
            }
        }
        int pos = n - 1;
        while (pos >= 0 && z[pos] == q_num - 1) z[pos--] = 0;
        if (pos < 0) break;
        ++z[pos];
    }
    return best == kNegInf ? kNegInf : best + std::log(scaled_sum);
}

double q_function(const DiscreteParams& theta, const Posterior& post,
                  const BinnedSeries& y) {
    const int n = y.size();
    const int q_num = theta.n_states();
    double acc = 0.0;
    for (int q = 0; q < q_num; ++q) {
        const double tau = post.tau_at(0, q);
        if (tau == 0.0) continue;
        acc += theta.nu[q] > 0.0 ? tau * std::log(theta.nu[q]) : kNegInf;
    }
    for (int k = 0; k + 1 < n; ++k)
        for (int q = 0; q < q_num; ++q)
            for (int l = 0; l < q_num; ++l) {
                const double e = post.eta_at(k, q, l);
                if (e == 0.0) continue;
                acc += theta.pi[q][l] > 0.0 ? e * std::log(theta.pi[q][l]) : kNegInf;
            }
    const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < q_num; ++q) {
            const double tau = post.tau_at(k, q);
            if (tau == 0.0) continue;
            acc += tau * log_poisson_pmf(y.counts[k], theta.mu[q] + u.u[k]);
        }
    return acc;
}

QGrad grad_q(const DiscreteParams& theta, const Posterior& post,
             const BinnedSeries& y) {
    const EmissionGrad g =
        emission_gradient(y, post, theta.mu, theta.alpha, theta.beta);
    QGrad out;
    out.d_mu = g.d_mu;
    out.d_alpha = g.d_alpha;
    out.d_beta = g.d_beta;
    return out;
}

DiscreteParams m_step(const Posterior& post, const BinnedSeries& y,
                      const DiscreteParams& current, const EMConfig& cfg) {
    const int n = y.size();
    const int q_num = current.n_states();
    DiscreteParams theta = current;

    for (int q = 0; q < q_num; ++q) theta.nu[q] = post.tau_at(0, q);

    for (int q = 0; q < q_num; ++q) {
        double row_sum = 0.0;
        std::vector<double> row(q_num, 0.0);
        for (int k = 0; k + 1 < n; ++k)
            for (int l = 0; l < q_num; ++l) row[l] += post.eta_at(k, q, l);
        for (double v : row) row_sum += v;
        if (row_sum > 0.0) {
            for (int l = 0; l < q_num; ++l) theta.pi[q][l] = row[l] / row_sum;
        } else {
            // state never visited: any row-stochastic choice maximizes Q
            for (int l = 0; l < q_num; ++l) theta.pi[q][l] = 1.0 / q_num;
        }
    }

    if (cfg.pin_alpha_zero) {
        theta.alpha = 0.0;
        theta.beta = 0.0;
        for (int q = 0; q < q_num; ++q) {
            double wsum = 0.0, wy = 0.0;
            for (int k = 0; k < n; ++k) {
                const double tau = post.tau_at(k, q);
                wsum += tau;
                wy += tau * static_cast<double>(y.counts[k]);
            }
            if (wsum > 0.0) theta.mu[q] = std::max(kMuFloor, wy / wsum);
        }
    } else {
        ascend_kernel(y, post, cfg, theta.mu, theta.alpha, theta.beta);
    }
    return theta;
}

DiscreteParams init_params(const BinnedSeries& y, int n_states, const EMConfig& cfg) {
    if (n_states < 1) throw Error(ErrorCode::InvalidRange, "need at least one state");
    const double mean = count_mean(y);

    double alpha0 = 0.0, beta0 = 0.0;
    if (!cfg.pin_alpha_zero) {
        DiscreteParams seed;
        seed.nu = {1.0};
        seed.pi = {{1.0}};
        seed.mu = {std::max(1e-6, mean * 0.7)};
        seed.alpha = 0.15;
        seed.beta = 0.5;
        const FitReport homog = fit_em_with_init(y, seed, cfg);
        alpha0 = homog.theta_hat.alpha;
        beta0 = homog.theta_hat.beta;
        if (n_states == 1) return homog.theta_hat;
    } else if (n_states == 1) {
        DiscreteParams theta;
        theta.nu = {1.0};
        theta.pi = {{1.0}};
        theta.mu = {std::max(kMuFloor, mean)};
        return theta;
    }

    Rng rng(cfg.seed);
    DiscreteParams hmm0 = sticky_quantile_init(y, n_states, rng);
    EMConfig pinned = cfg;
    pinned.pin_alpha_zero = true;
    const FitReport poisson_fit = fit_em_with_init(y, hmm0, pinned);

    DiscreteParams theta = poisson_fit.theta_hat;
    theta.alpha = alpha0;
    theta.beta = beta0;
    validate(theta);
    return theta;
}

FitReport fit_em_with_init(const BinnedSeries& y, const DiscreteParams& theta0,
                           const EMConfig& cfg) {
    if (y.counts.empty())
        throw Error(ErrorCode::EmptySequence, "cannot fit an empty series");
    if (!(cfg.tau_tol > 0.0) || !(cfg.lik_tol > 0.0) ||
        !(cfg.mstep_grad_tol > 0.0) || cfg.max_iter < 0 || cfg.mstep_max_steps < 1)
        throw Error(ErrorCode::InvalidRange, "EM tolerances must be positive");
    validate(theta0);
    const EmState st = run_em(y, theta0, cfg);

    FitReport report;
    report.theta_hat = st.theta;
    report.log_lik = st.log_lik;
    report.aic =
        st.log_lik - model_dof(st.theta.n_states(), cfg.pin_alpha_zero);
    report.n_iter = st.n_iter;
    report.converged = st.converged;
    report.n = y.size();
    report.n_states = st.theta.n_states();
    report.tau = st.post.tau;
    report.init_theta = theta0;
    report.delta = y.delta;
    return report;
}

FitReport fit_em(const BinnedSeries& y, int n_states, const EMConfig& cfg) {
    if (y.counts.empty())
        throw Error(ErrorCode::EmptySequence, "cannot fit an empty series");
    FitReport best;
    bool have = false;
    for (int r = 0; r < std::max(1, cfg.n_starts); ++r) {
        EMConfig c = cfg;
        c.seed = r == 0 ? cfg.seed : derive_seed(cfg.seed, {777, static_cast<std::uint64_t>(r)});
        const DiscreteParams theta0 = init_params(y, n_states, c);
        FitReport rep = fit_em_with_init(y, theta0, c);
        if (!have || rep.log_lik > best.log_lik) {
            best = std::move(rep);
            have = true;
        }
    }
    return best;
}

}  // namespace swhawkes
