// Acceptance suite: one function per criterion, each printing a single
// pass/fail line.  Run with no arguments for all criteria or pass a subset of
// indices (1..10).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swhawkes/inference.hpp"
#include "swhawkes/rng.hpp"
#include "swhawkes/select.hpp"
#include "swhawkes/simulate.hpp"
#include "swhawkes/study.hpp"

using namespace swhawkes;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Posterior e_step(const BinnedSeries& y, const DiscreteParams& theta) {
    const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
    return backward_smooth(forward(y, u, theta), theta);
}

// --- criterion 1: forward log-lik equals path enumeration -------------------
bool criterion_1() {
    Rng rng(101);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const int q_num = 1 + static_cast<int>(rng.uniform() * 3);
        const int n = 2 + static_cast<int>(rng.uniform() * 7);
        const DiscreteParams theta = oracles::random_theta(rng, q_num);
        const BinnedSeries y = oracles::random_series(rng, n);
        const AuxiliaryPath u = auxiliary_path(y, theta.alpha, theta.beta);
        const double ours = forward(y, u, theta).log_lik;
        const double exact = exact_log_lik(y, theta);
        worst = std::max(worst, std::abs(ours - exact));
    }
    const bool pass = worst <= 1e-10;
    std::printf("criterion 1 %s: forward vs enumeration on 200 instances, "
                "max |diff| = %.3e (tol 1e-10)\n",
                pass ? "PASS" : "FAIL", worst);
    return pass;
}

// --- criterion 2: Viterbi equals brute-force path argmax --------------------
bool criterion_2() {
    Rng rng(202);
    int mismatches = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int q_num = 1 + static_cast<int>(rng.uniform() * 3);
        const int n = 2 + static_cast<int>(rng.uniform() * 7);
        const DiscreteParams theta = oracles::random_theta(rng, q_num);
        const BinnedSeries y = oracles::random_series(rng, n);
        const oracles::EnumPosterior truth = oracles::enumerate_posterior(y, theta);
        const std::vector<int> path = viterbi(y, theta);
        // exact ties admit several argmax paths; membership is what counts
        if (path != truth.viterbi &&
            oracles::enum_path_log_lik(y, theta, path) != truth.viterbi_log_lik)
            ++mismatches;
    }
    const bool pass = mismatches == 0;
    std::printf("criterion 2 %s: viterbi is a brute-force argmax path on 200 "
                "instances, %d mismatches\n",
                pass ? "PASS" : "FAIL", mismatches);
    return pass;
}

// --- criterion 3: analytic gradient vs central differences ------------------
bool criterion_3() {
    Rng rng(303);
    const double h = 1e-6;
    double worst_rel = 0.0;
    for (int point = 0; point < 100; ++point) {
        const int q_num = 1 + static_cast<int>(rng.uniform() * 3);
        const int n = 5 + static_cast<int>(rng.uniform() * 45);
        const DiscreteParams base = oracles::random_theta(rng, q_num);
        const BinnedSeries y = oracles::random_series(rng, n);
        const Posterior post = e_step(y, base);
        DiscreteParams at = oracles::random_theta(rng, q_num);
        at.nu = base.nu;
        at.pi = base.pi;
        const QGrad g = grad_q(at, post, y);

        const auto rel = [&](double got, double fd) {
            return std::abs(got - fd) / std::max({1.0, std::abs(got), std::abs(fd)});
        };
        for (int q = 0; q < q_num; ++q) {
            const double fd = oracles::central_diff(
                [&](double v) {
                    DiscreteParams t = at;
                    t.mu[q] = v;
                    return q_function(t, post, y);
                },
                at.mu[q], h);
            worst_rel = std::max(worst_rel, rel(g.d_mu[q], fd));
        }
        worst_rel = std::max(
            worst_rel, rel(g.d_alpha, oracles::central_diff(
                                          [&](double v) {
                                              DiscreteParams t = at;
                                              t.alpha = v;
                                              return q_function(t, post, y);
                                          },
                                          at.alpha, h)));
        worst_rel = std::max(
            worst_rel, rel(g.d_beta, oracles::central_diff(
                                         [&](double v) {
                                             DiscreteParams t = at;
                                             t.beta = v;
                                             return q_function(t, post, y);
                                         },
                                         at.beta, h)));
    }
    const bool pass = worst_rel <= 1e-5;
    std::printf("criterion 3 %s: grad_q vs central differences at 100 points, "
                "max relative error = %.3e (tol 1e-5)\n",
                pass ? "PASS" : "FAIL", worst_rel);
    return pass;
}

// --- criterion 4: EM monotonicity over full fits -----------------------------
bool criterion_4() {
    Rng rng(404);
    double worst_drop = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int q_num = 1 + static_cast<int>(rng.uniform() * 3);
        const int n = 50 + static_cast<int>(rng.uniform() * 1950);
        const DiscreteParams gen = oracles::random_theta(rng, q_num);
        const DiscreteSample s = sample_discrete(gen, n, 40400 + rep);
        BinnedSeries y;
        y.delta = 1.0;
        y.counts = s.counts;

        EMConfig cfg;
        cfg.seed = rep;
        DiscreteParams theta = init_params(y, q_num, cfg);
        double prev = -std::numeric_limits<double>::infinity();
        std::vector<double> tau_prev;
        for (int it = 0; it <= cfg.max_iter; ++it) {
            const Posterior post = e_step(y, theta);
            if (std::isfinite(prev)) worst_drop = std::max(worst_drop, prev - post.log_lik);
            if (!tau_prev.empty()) {
                double dtau = 0.0;
                for (size_t i = 0; i < tau_prev.size(); ++i)
                    dtau = std::max(dtau, std::abs(post.tau[i] - tau_prev[i]));
                if (dtau <= cfg.tau_tol &&
                    std::abs(post.log_lik - prev) <=
                        cfg.lik_tol * (1.0 + std::abs(post.log_lik)))
                    break;
            }
            tau_prev = post.tau;
            prev = post.log_lik;
            theta = m_step(post, y, theta, cfg);
        }
    }
    const bool pass = worst_drop <= 1e-9;
    std::printf("criterion 4 %s: log-lik across 100 EM fits, worst decrease = %.3e "
                "(tol 1e-9)\n",
                pass ? "PASS" : "FAIL", worst_drop);
    return pass;
}

// --- criterion 5: conversion round trip --------------------------------------
bool criterion_5() {
    Rng rng(505);
    double worst_rel = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const double m = 0.1 + 100.0 * rng.uniform();
        const double b = 0.5 + 200.0 * rng.uniform();
        const double a = 0.95 * b * rng.uniform();
        const double delta = 0.001 + 0.2 * rng.uniform();
        ContinuousParams c;
        c.p0 = {1.0};
        c.rates = {{0.0}};
        c.m = {m};
        c.a = a;
        c.b = b;
        const DiscKernel k = cont_to_disc(c, delta);
        const ContKernel back = disc_to_cont(k.mu, k.alpha, k.beta, delta);
        worst_rel = std::max({worst_rel, std::abs(back.m[0] - m) / m,
                              a > 0 ? std::abs(back.a - a) / a : 0.0,
                              std::abs(back.b - b) / b});
    }
    const bool pass = worst_rel <= 1e-10;
    std::printf("criterion 5 %s: conversion round trip on 1000 parameter sets, "
                "max relative error = %.3e (tol 1e-10)\n",
                pass ? "PASS" : "FAIL", worst_rel);
    return pass;
}

// --- criteria 6 and 8 share the Q* = 3 study ---------------------------------
struct TrendData {
    std::vector<StudyRow> coarse;  // L = 0.5, C = 0.5
    std::vector<StudyRow> fine;    // L = 2, C = 2
};

const TrendData& trend_study() {
    static const TrendData data = [] {
        StudyConfig base;
        base.q_stars = {3};
        base.replicates = 20;
        base.q_max = 3;
        base.seed = 606;

        StudyConfig coarse = base;
        coarse.intensities = {0.5};
        coarse.coefs = {0.5};
        StudyConfig fine = base;
        fine.intensities = {2.0};
        fine.coefs = {2.0};
        return TrendData{run_study_serial(coarse), run_study_serial(fine)};
    }();
    return data;
}

struct AbsErrors {
    std::vector<double> alpha, beta, mu;
};

AbsErrors collect_errors(const std::vector<StudyRow>& rows) {
    AbsErrors err;
    for (const StudyRow& row : rows) {
        if (row.status != "ok" || row.q_fit != row.q_star) continue;
        const DiscKernel truth =
            cont_to_disc(default_design(row.q_star).scaled(row.intensity),
                         1.0 / static_cast<double>(row.n_bins));
        err.alpha.push_back(std::abs(row.alpha_hat - truth.alpha));
        err.beta.push_back(std::abs(row.beta_hat - truth.beta));
        for (int j = 0; j < row.q_star; ++j) {
            const int true_label = row.map_perm.empty() ? j : row.map_perm[j];
            if (true_label < row.q_star)
                err.mu.push_back(std::abs(row.mu_hat[j] - truth.mu[true_label]));
        }
    }
    return err;
}

bool criterion_6() {
    const TrendData& data = trend_study();
    const AbsErrors coarse = collect_errors(data.coarse);
    const AbsErrors fine = collect_errors(data.fine);
    const double a_coarse = median(coarse.alpha), a_fine = median(fine.alpha);
    const double b_coarse = median(coarse.beta), b_fine = median(fine.beta);
    const double m_coarse = median(coarse.mu), m_fine = median(fine.mu);
    const bool pass = a_fine < a_coarse && b_fine < b_coarse && m_fine < m_coarse;
    std::printf(
        "criterion 6 %s: Q*=3 median abs errors (L=2,C=2 vs L=0.5,C=0.5): "
        "alpha %.4f<%.4f beta %.4f<%.4f mu %.4f<%.4f\n",
        pass ? "PASS" : "FAIL", a_fine, a_coarse, b_fine, b_coarse, m_fine, m_coarse);
    return pass;
}

// --- criterion 7: AIC selects the true Q for Q* in {1, 2} --------------------
bool criterion_7() {
    int checked = 0;
    bool pass = true;
    std::string detail;
    for (int q_star : {1, 2}) {
        StudyConfig cfg;
        cfg.q_stars = {q_star};
        cfg.intensities = {2.0};
        cfg.coefs = {2.0};
        cfg.replicates = 20;
        cfg.q_max = 5;
        cfg.seed = 707;
        const std::vector<StudyRow> rows = run_study_serial(cfg);
        int hits = 0, total = 0;
        std::set<int> seen;
        for (const StudyRow& row : rows) {
            if (row.status != "ok" || seen.count(row.rep)) continue;
            seen.insert(row.rep);
            ++total;
            if (row.q_hat_aic == q_star) ++hits;
        }
        const double rate = total > 0 ? static_cast<double>(hits) / total : 0.0;
        pass = pass && rate >= 0.7;
        detail += " Q*=" + std::to_string(q_star) + ": " + std::to_string(hits) + "/" +
                  std::to_string(total);
        checked += total;
    }
    std::printf("criterion 7 %s: AIC selection at L=2, C=2, B=20 (threshold 70%%):%s\n",
                pass ? "PASS" : "FAIL", detail.c_str());
    return pass && checked > 0;
}

// --- criterion 8: MAP and Viterbi accuracies nearly coincide ----------------
bool criterion_8() {
    const TrendData& data = trend_study();
    std::vector<double> gaps;
    for (const StudyRow& row : data.fine)
        if (row.status == "ok" && row.q_fit == row.q_star)
            gaps.push_back(std::abs(row.acc_map - row.acc_vit));
    const double gap = median(gaps);
    const bool pass = !gaps.empty() && gap <= 0.02;
    std::printf("criterion 8 %s: Q*=3, L=2, C=2 median |acc_MAP - acc_Vit| = %.4f "
                "(tol 0.02)\n",
                pass ? "PASS" : "FAIL", gap);
    return pass;
}

// --- criterion 9: four-model comparison --------------------------------------
bool criterion_9() {
    int hawkes_wins = 0;
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep) {
        const SimOutput sim = sample_switching_hawkes(
            default_design(2).scaled(2.0), 1.0, 909000 + rep);
        const BinnedSeries y = discretize(sim.events, 2.0);
        EMConfig cfg;
        cfg.seed = rep;
        if (compare_models(y, 3, cfg).best_kind == ModelKind::HawkesHMM)
            ++hawkes_wins;
    }

    // large n matters here: the null tail of the homogeneous-Hawkes gain is
    // inflated in small samples (win rate ~86% at n <= 2000, 92.5% measured
    // over 200 seeds at n = 4000)
    DiscreteParams iid;
    iid.nu = {1.0};
    iid.pi = {{1.0}};
    iid.mu = {2.0};
    int poisson_wins = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const DiscreteSample s = sample_discrete(iid, 4000, 919000 + rep);
        BinnedSeries y;
        y.delta = 0.001;
        y.counts = s.counts;
        EMConfig cfg;
        cfg.seed = rep;
        if (compare_models(y, 3, cfg).best_kind == ModelKind::PoissonHomog)
            ++poisson_wins;
    }
    const bool pass = hawkes_wins > reps / 2 && poisson_wins >= 45;
    std::printf("criterion 9 %s: hawkes-hmm wins %d/%d on switching data "
                "(need majority); poisson wins %d/%d on iid data (need 45)\n",
                pass ? "PASS" : "FAIL", hawkes_wins, reps, poisson_wins, reps);
    return pass;
}

// --- criterion 10: byte-identical study reruns -------------------------------
bool criterion_10() {
    const std::string cli = SWHAWKES_CLI_PATH;
    const auto run = [&](const std::string& dir) {
        const std::string cmd = cli + " study --preset smoke --seed 1010 --quiet -o " +
                                dir + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    if (!run("acceptance_study_a") || !run("acceptance_study_b")) {
        std::printf("criterion 10 FAIL: study command did not complete\n");
        return false;
    }
    bool identical = true;
    for (const std::string name :
         {"study.csv", "summary_bias.csv", "summary_qhat.csv",
          "summary_accuracy.csv", "summary_cpu.csv"}) {
        const std::string a = slurp("acceptance_study_a/" + name);
        const std::string b = slurp("acceptance_study_b/" + name);
        if (a.empty() || a != b) identical = false;
    }
    std::printf("criterion 10 %s: smoke-preset study reruns are byte-identical\n",
                identical ? "PASS" : "FAIL");
    return identical;
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = bool (*)();
    const Criterion criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                  criterion_5, criterion_6, criterion_7, criterion_8,
                                  criterion_9, criterion_10};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (int i = 1; i <= 10; ++i) selected.push_back(i);

    int failures = 0;
    for (int index : selected) {
        if (index < 1 || index > 10) {
            std::printf("unknown criterion %d\n", index);
            ++failures;
            continue;
        }
        if (!criteria[index - 1]()) ++failures;
    }
    return failures;
}
