#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swhawkes/core.hpp"
#include "swhawkes/inference.hpp"
#include "swhawkes/select.hpp"

namespace swhawkes {

// One grid cell of the simulation study is (q_star, L, rep); each continuous
// path is simulated once per cell and shared across the C values.
struct StudyConfig {
    std::vector<int> q_stars = {1, 2, 3};
    std::vector<double> intensities = {0.5, 1.0, 1.5, 2.0};  // L
    std::vector<double> coefs = {0.5, 1.0, 2.0, 4.0};        // C
    int replicates = 20;
    int q_max = 5;
    std::uint64_t seed = 1;
    EMConfig em;
    // wall-clock timings are off by default so that reruns of the same config
    // are byte-identical; enable to populate cpu_seconds
    bool timings = false;
};

struct StudyRow {
    int q_star = 0;
    double intensity = 0.0;  // L
    double coef = 0.0;       // C
    int rep = 0;
    std::uint64_t seed = 0;
    long long n_events = 0;
    int n_bins = 0;
    int q_fit = 0;
    double log_lik = 0.0;
    double aic = 0.0;
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    std::vector<double> mu_hat;
    double acc_map = 0.0;
    double acc_vit = 0.0;
    int q_hat_aic = 0;
    double cpu_seconds = 0.0;
    std::string status;
    std::vector<int> map_perm;  // label alignment used for acc_map (not serialized)
};

// The continuous baseline designs used throughout the benchmark; L = 1 scale.
ContinuousParams default_design(int q_star);

// Invoked once per completed cell (q_star, L, rep); serialized across workers.
using StudyProgress = std::function<void(int q_star, double intensity, int rep)>;

std::vector<StudyRow> run_study(const StudyConfig& cfg, int jobs,
                                const StudyProgress& progress = {});
std::vector<StudyRow> run_study_serial(const StudyConfig& cfg);

struct CompareEntry {
    ModelKind kind = ModelKind::PoissonHomog;
    int n_states = 0;
    bool ok = false;
    double log_lik = 0.0;
    double aic_value = 0.0;
    std::string status;
};

struct CompareResult {
    std::vector<CompareEntry> entries;  // fixed order: the four model kinds
    ModelKind best_kind = ModelKind::PoissonHomog;
};

// Four-way benchmark: homogeneous Poisson (closed form), Poisson-HMM and
// Hawkes-HMM at their best Q in 2..q_max, homogeneous Hawkes.  AIC ties go
// to the simpler model.
CompareResult compare_models(const BinnedSeries& y, int q_max, const EMConfig& cfg);

struct QuantileStat {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    int count = 0;
};

struct BiasSummaryRow {
    int q_star;
    double intensity, coef;
    std::string param;  // alpha, beta, mu1..muQ
    QuantileStat stat;
};

struct QhatSummaryRow {
    int q_star;
    double intensity, coef;
    int q_hat;
    int count;
};

struct AccuracySummaryRow {
    int q_star;
    double intensity, coef;
    std::string rule;  // map or viterbi
    QuantileStat stat;
};

struct CpuSummaryRow {
    int q_star;
    double intensity, coef;
    QuantileStat stat;
};

struct StudySummary {
    std::vector<BiasSummaryRow> bias;          // at Q_fit = q_star, labels aligned
    std::vector<QhatSummaryRow> qhat;          // histogram of AIC selections
    std::vector<AccuracySummaryRow> accuracy;  // at Q_fit = q_star
    std::vector<CpuSummaryRow> cpu;
};

// Per-(q_star, L, C) quartile tables; parameter bias is estimate minus the
// cont_to_disc truth at the row's bin width.
StudySummary summarize(const std::vector<StudyRow>& rows);

}  // namespace swhawkes
