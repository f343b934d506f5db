#include "swhawkes/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace swhawkes {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::PoissonHomog: return "poisson";
        case ModelKind::PoissonHMM: return "poisson-hmm";
        case ModelKind::HawkesHomog: return "hawkes";
        case ModelKind::HawkesHMM: return "hawkes-hmm";
    }
    return "unknown";
}

double aic(double log_lik, int n_states, ModelKind kind) {
    if (n_states < 1) throw Error(ErrorCode::InvalidRange, "need at least one state");
    int dof = 0;
    switch (kind) {
        case ModelKind::PoissonHomog: dof = 1; break;
        case ModelKind::PoissonHMM: dof = n_states * n_states; break;
        case ModelKind::HawkesHomog: dof = 3; break;
        case ModelKind::HawkesHMM: dof = n_states * n_states + 2; break;
    }
    return log_lik - dof;
}

SelectionResult select_q(const BinnedSeries& y, int q_max, const EMConfig& cfg) {
    if (q_max < 1) throw Error(ErrorCode::InvalidRange, "q_max must be at least 1");
    SelectionResult sel;
    sel.per_q.reserve(q_max);
    for (int q = 1; q <= q_max; ++q) {
        FitOutcome out;
        out.n_states = q;
        try {
            out.report = fit_em(y, q, cfg);
            const ModelKind kind =
                cfg.pin_alpha_zero ? ModelKind::PoissonHMM : ModelKind::HawkesHMM;
            out.aic_value = aic(out.report.log_lik, q, kind);
            out.ok = true;
            out.status = "ok";
        } catch (const Error& e) {
            out.ok = false;
            out.status = e.what();
        }
        sel.per_q.push_back(std::move(out));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const FitOutcome& out : sel.per_q)
        if (out.ok && out.aic_value > best) {
            best = out.aic_value;
            sel.q_hat = out.n_states;
        }
    if (sel.q_hat == 0)
        throw Error(ErrorCode::NumericalUnderflow, "every candidate fit failed");
    return sel;
}

std::vector<int> map_decode(const std::vector<double>& tau, int n, int n_states) {
    std::vector<int> z(n);
    for (int k = 0; k < n; ++k) {
        const double* row = &tau[static_cast<size_t>(k) * n_states];
        int best = 0;
        for (int q = 1; q < n_states; ++q)
            if (row[q] > row[best]) best = q;
        z[k] = best;
    }
    return z;
}

std::vector<int> viterbi(const BinnedSeries& y, const DiscreteParams& theta) {
    validate(theta);
    const int n = y.size();
    const int q_num = theta.n_states();
    const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> log_pi(static_cast<size_t>(q_num) * q_num);
    for (int q = 0; q < q_num; ++q)
        for (int l = 0; l < q_num; ++l)
            log_pi[static_cast<size_t>(q) * q_num + l] =
                theta.pi[q][l] > 0.0 ? std::log(theta.pi[q][l]) : neg_inf;

    std::vector<double> score(q_num), next(q_num);
    std::vector<int> back(static_cast<size_t>(n) * q_num, 0);
    for (int q = 0; q < q_num; ++q)
        score[q] = (theta.nu[q] > 0.0 ? std::log(theta.nu[q]) : neg_inf) +
                   log_poisson_pmf(y.counts[0], theta.mu[q] + u.u[0]);
    for (int k = 1; k < n; ++k) {
        for (int l = 0; l < q_num; ++l) {
            double best = neg_inf;
            int arg = 0;
            for (int q = 0; q < q_num; ++q) {
                const double cand = score[q] + log_pi[static_cast<size_t>(q) * q_num + l];
                if (cand > best) {
                    best = cand;
                    arg = q;
                }
            }
            next[l] = best + log_poisson_pmf(y.counts[k], theta.mu[l] + u.u[k]);
            back[static_cast<size_t>(k) * q_num + l] = arg;
        }
        score.swap(next);
    }

    std::vector<int> path(n);
    int arg = 0;
    for (int q = 1; q < q_num; ++q)
        if (score[q] > score[arg]) arg = q;
    path[n - 1] = arg;
    for (int k = n - 1; k > 0; --k)
        path[k - 1] = back[static_cast<size_t>(k) * q_num + path[k]];
    return path;
}

Alignment aligned_accuracy(const std::vector<int>& z_hat,
                           const std::vector<int>& z_true, int n_states) {
    if (z_hat.size() != z_true.size())
        throw Error(ErrorCode::LengthMismatch, "decoded and true paths differ in length");
    if (z_hat.empty())
        throw Error(ErrorCode::EmptySequence, "nothing to score");
    if (n_states < 1 || n_states > 6)
        throw Error(ErrorCode::InvalidRange, "permutation search supports 1 <= Q <= 6");
    std::vector<long long> confusion(static_cast<size_t>(n_states) * n_states, 0);
    for (size_t k = 0; k < z_hat.size(); ++k) {
        if (z_hat[k] < 0 || z_hat[k] >= n_states || z_true[k] < 0 ||
            z_true[k] >= n_states)
            throw Error(ErrorCode::InvalidRange, "state label out of range");
        ++confusion[static_cast<size_t>(z_hat[k]) * n_states + z_true[k]];
    }

    std::vector<int> perm(n_states);
    std::iota(perm.begin(), perm.end(), 0);
    Alignment best;
    best.accuracy = -1.0;
    do {
        long long hits = 0;
        for (int j = 0; j < n_states; ++j)
            hits += confusion[static_cast<size_t>(j) * n_states + perm[j]];
        const double acc = static_cast<double>(hits) / static_cast<double>(z_hat.size());
        if (acc > best.accuracy) {  // strict: first (lexicographic) max wins
            best.accuracy = acc;
            best.perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace swhawkes
