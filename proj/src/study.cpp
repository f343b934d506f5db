#include "swhawkes/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "swhawkes/rng.hpp"
#include "swhawkes/simulate.hpp"

namespace swhawkes {

namespace {

double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * (static_cast<double>(values.size()) - 1.0);
    const auto lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileStat quartiles(const std::vector<double>& values) {
    QuantileStat s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    return s;
}

struct CellTag {
    int q_star;
    double intensity;
    double coef;
    bool operator<(const CellTag& o) const {
        if (q_star != o.q_star) return q_star < o.q_star;
        if (intensity != o.intensity) return intensity < o.intensity;
        return coef < o.coef;
    }
};

void fill_cell_rows(const StudyConfig& cfg, int qi, int li, int rep,
                    std::vector<StudyRow>& block) {
    const int q_star = cfg.q_stars[qi];
    const double intensity = cfg.intensities[li];
    const std::uint64_t cell_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(q_star),
                               static_cast<std::uint64_t>(li),
                               static_cast<std::uint64_t>(rep)});

    const size_t per_c = static_cast<size_t>(cfg.q_max);
    block.assign(cfg.coefs.size() * per_c, StudyRow{});
    for (size_t ci = 0; ci < cfg.coefs.size(); ++ci)
        for (int qf = 1; qf <= cfg.q_max; ++qf) {
            StudyRow& row = block[ci * per_c + (qf - 1)];
            row.q_star = q_star;
            row.intensity = intensity;
            row.coef = cfg.coefs[ci];
            row.rep = rep;
            row.seed = cell_seed;
            row.q_fit = qf;
            row.status = "ok";
        }

    SimOutput sim;
    try {
        sim = sample_switching_hawkes(default_design(q_star).scaled(intensity), 1.0,
                                      cell_seed);
    } catch (const Error& e) {
        for (StudyRow& row : block) row.status = e.what();
        return;
    }
    const auto n_events = static_cast<long long>(sim.events.times.size());
    if (n_events == 0) {
        for (StudyRow& row : block) row.status = "EmptySequence: no events simulated";
        return;
    }

    for (size_t ci = 0; ci < cfg.coefs.size(); ++ci) {
        StudyRow* rows = &block[ci * per_c];
        const BinnedSeries y = discretize(sim.events, cfg.coefs[ci]);
        const int n_bins = y.size();
        const std::vector<int> truth = bin_state_majority(sim.z_path, n_bins);

        EMConfig em = cfg.em;
        em.seed = derive_seed(cell_seed, {static_cast<std::uint64_t>(ci)});

        const auto t0 = std::chrono::steady_clock::now();
        SelectionResult sel;
        try {
            sel = select_q(y, cfg.q_max, em);
        } catch (const Error& e) {
            for (int qf = 0; qf < cfg.q_max; ++qf) {
                rows[qf].n_events = n_events;
                rows[qf].n_bins = n_bins;
                rows[qf].status = e.what();
            }
            continue;
        }
        const double cpu =
            cfg.timings
                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count()
                : 0.0;

        for (int qf = 1; qf <= cfg.q_max; ++qf) {
            StudyRow& row = rows[qf - 1];
            row.n_events = n_events;
            row.n_bins = n_bins;
            row.cpu_seconds = cpu;
            row.q_hat_aic = sel.q_hat;
            const FitOutcome& out = sel.per_q[qf - 1];
            if (!out.ok) {
                row.status = out.status;
                continue;
            }
            row.log_lik = out.report.log_lik;
            row.aic = out.aic_value;
            row.alpha_hat = out.report.theta_hat.alpha;
            row.beta_hat = out.report.theta_hat.beta;
            row.mu_hat = out.report.theta_hat.mu;
            const int q_acc = std::max(qf, q_star);
            const std::vector<int> z_map = map_decode(out.report.tau, n_bins, qf);
            const std::vector<int> z_vit = viterbi(y, out.report.theta_hat);
            const Alignment align_map = aligned_accuracy(z_map, truth, q_acc);
            const Alignment align_vit = aligned_accuracy(z_vit, truth, q_acc);
            row.acc_map = align_map.accuracy;
            row.acc_vit = align_vit.accuracy;
            row.map_perm = align_map.perm;
        }
    }
}

}  // namespace

ContinuousParams default_design(int q_star) {
    ContinuousParams c;
    c.a = 40.0;
    c.b = 160.0;
    switch (q_star) {
        case 1:
            c.rates = {{0.0}};
            c.m = {60.0};
            break;
        case 2:
            c.rates = {{-25.0, 25.0}, {25.0, -25.0}};
            c.m = {1.0, 400.0};
            break;
        case 3: {
            const double r = 50.0 / 3.0;
            c.rates = {{-2.0 * r, r, r}, {r, -2.0 * r, r}, {r, r, -2.0 * r}};
            c.m = {1.0, 200.0, 1000.0};
            break;
        }
        default:
            throw Error(ErrorCode::UnsupportedQStar,
                        "designs are defined for q_star in {1, 2, 3}");
    }
    c.p0.assign(c.m.size(), 1.0 / static_cast<double>(c.m.size()));
    return c;
}

std::vector<StudyRow> run_study(const StudyConfig& cfg, int jobs,
                                const StudyProgress& progress) {
    if (cfg.replicates < 1)
        throw Error(ErrorCode::InvalidRange, "need at least one replicate");
    for (int q_star : cfg.q_stars)
        if (cfg.q_max < q_star)
            throw Error(ErrorCode::InvalidRange, "q_max must cover every q_star");
    if (cfg.q_max > 6)
        throw Error(ErrorCode::InvalidRange,
                    "accuracy alignment supports at most 6 states");
    for (double c : cfg.coefs)
        if (!(c > 0.0)) throw Error(ErrorCode::InvalidRange, "coefs must be positive");
    for (double l : cfg.intensities)
        if (!(l > 0.0))
            throw Error(ErrorCode::InvalidRange, "intensities must be positive");

    struct Item {
        int qi, li, rep;
    };
    std::vector<Item> items;
    for (size_t qi = 0; qi < cfg.q_stars.size(); ++qi)
        for (size_t li = 0; li < cfg.intensities.size(); ++li)
            for (int rep = 0; rep < cfg.replicates; ++rep)
                items.push_back({static_cast<int>(qi), static_cast<int>(li), rep});

    std::vector<std::vector<StudyRow>> blocks(items.size());
    const auto report_done = [&](const Item& item) {
        if (progress)
            progress(cfg.q_stars[item.qi], cfg.intensities[item.li], item.rep);
    };
    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
        for (long long i = 0; i < static_cast<long long>(items.size()); ++i) {
            fill_cell_rows(cfg, items[i].qi, items[i].li, items[i].rep, blocks[i]);
#pragma omp critical
            report_done(items[i]);
        }
    } else {
        for (size_t i = 0; i < items.size(); ++i) {
            fill_cell_rows(cfg, items[i].qi, items[i].li, items[i].rep, blocks[i]);
            report_done(items[i]);
        }
    }

    std::vector<StudyRow> rows;
    for (auto& block : blocks)
        for (auto& row : block) rows.push_back(std::move(row));
    std::sort(rows.begin(), rows.end(), [](const StudyRow& a, const StudyRow& b) {
        if (a.q_star != b.q_star) return a.q_star < b.q_star;
        if (a.intensity != b.intensity) return a.intensity < b.intensity;
        if (a.coef != b.coef) return a.coef < b.coef;
        if (a.rep != b.rep) return a.rep < b.rep;
        return a.q_fit < b.q_fit;
    });
    return rows;
}

std::vector<StudyRow> run_study_serial(const StudyConfig& cfg) {
    return run_study(cfg, 1);
}

CompareResult compare_models(const BinnedSeries& y, int q_max, const EMConfig& cfg) {
    if (y.counts.empty())
        throw Error(ErrorCode::EmptySequence, "cannot compare on an empty series");
    if (q_max < 1) throw Error(ErrorCode::InvalidRange, "q_max must be at least 1");

    CompareResult result;
    {
        CompareEntry e;
        e.kind = ModelKind::PoissonHomog;
        e.n_states = 1;
        double mean = 0.0;
        for (long long v : y.counts) mean += static_cast<double>(v);
        mean /= static_cast<double>(y.size());
        double ll = 0.0;
        for (long long v : y.counts) ll += log_poisson_pmf(v, mean);
        e.log_lik = ll;
        e.aic_value = aic(ll, 1, e.kind);
        e.ok = true;
        e.status = "ok";
        result.entries.push_back(e);
    }

    const auto best_hmm = [&](ModelKind kind) {
        CompareEntry e;
        e.kind = kind;
        if (q_max < 2) {
            e.status = "skipped: q_max < 2";
            return e;
        }
        EMConfig c = cfg;
        c.pin_alpha_zero = kind == ModelKind::PoissonHMM;
        e.aic_value = -std::numeric_limits<double>::infinity();
        std::string last_err;
        for (int q = 2; q <= q_max; ++q) {
            try {
                const FitReport rep = fit_em(y, q, c);
                const double a = aic(rep.log_lik, q, kind);
                if (!e.ok || a > e.aic_value) {
                    e.ok = true;
                    e.n_states = q;
                    e.log_lik = rep.log_lik;
                    e.aic_value = a;
                }
            } catch (const Error& err) {
                last_err = err.what();
            }
        }
        e.status = e.ok ? "ok" : last_err;
        return e;
    };
    result.entries.push_back(best_hmm(ModelKind::PoissonHMM));

    {
        CompareEntry e;
        e.kind = ModelKind::HawkesHomog;
        e.n_states = 1;
        try {
            EMConfig c = cfg;
            c.pin_alpha_zero = false;
            const FitReport rep = fit_em(y, 1, c);
            e.log_lik = rep.log_lik;
            e.aic_value = aic(rep.log_lik, 1, e.kind);
            e.ok = true;
            e.status = "ok";
        } catch (const Error& err) {
            e.status = err.what();
        }
        result.entries.push_back(e);
    }
    result.entries.push_back(best_hmm(ModelKind::HawkesHMM));

    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const CompareEntry& e : result.entries)
        if (e.ok && e.aic_value > best) {  // ties keep the earlier, simpler model
            best = e.aic_value;
            result.best_kind = e.kind;
            any = true;
        }
    if (!any)
        throw Error(ErrorCode::NumericalUnderflow, "every benchmark model failed");
    return result;
}

StudySummary summarize(const std::vector<StudyRow>& rows) {
    if (rows.empty()) throw Error(ErrorCode::EmptySequence, "no rows to summarize");
    StudySummary summary;

    std::map<CellTag, std::vector<const StudyRow*>> cells;
    for (const StudyRow& row : rows)
        cells[{row.q_star, row.intensity, row.coef}].push_back(&row);

    for (const auto& [tag, cell] : cells) {
        const ContinuousParams design = default_design(tag.q_star).scaled(tag.intensity);

        std::vector<double> bias_alpha, bias_beta;
        std::vector<std::vector<double>> bias_mu(tag.q_star);
        std::vector<double> acc_map, acc_vit;
        std::map<int, int> qhat_count;
        std::map<int, double> cpu_by_rep;
        std::map<int, int> qhat_by_rep;

        for (const StudyRow* row : cell) {
            if (row->status != "ok") continue;
            qhat_by_rep[row->rep] = row->q_hat_aic;
            cpu_by_rep[row->rep] = row->cpu_seconds;
            if (row->q_fit != tag.q_star) continue;
            const DiscKernel truth =
                cont_to_disc(design, 1.0 / static_cast<double>(row->n_bins));
            bias_alpha.push_back(row->alpha_hat - truth.alpha);
            bias_beta.push_back(row->beta_hat - truth.beta);
            // align estimated states to true labels before differencing
            for (int j = 0; j < tag.q_star; ++j) {
                const int true_label = row->map_perm.empty() ? j : row->map_perm[j];
                if (true_label < tag.q_star)
                    bias_mu[true_label].push_back(row->mu_hat[j] - truth.mu[true_label]);
            }
            acc_map.push_back(row->acc_map);
            acc_vit.push_back(row->acc_vit);
        }
        for (const auto& [rep, qh] : qhat_by_rep) ++qhat_count[qh];

        summary.bias.push_back(
            {tag.q_star, tag.intensity, tag.coef, "alpha", quartiles(bias_alpha)});
        summary.bias.push_back(
            {tag.q_star, tag.intensity, tag.coef, "beta", quartiles(bias_beta)});
        for (int q = 0; q < tag.q_star; ++q)
            summary.bias.push_back({tag.q_star, tag.intensity, tag.coef,
                                    "mu" + std::to_string(q + 1), quartiles(bias_mu[q])});
        for (const auto& [qh, count] : qhat_count)
            summary.qhat.push_back({tag.q_star, tag.intensity, tag.coef, qh, count});
        summary.accuracy.push_back(
            {tag.q_star, tag.intensity, tag.coef, "map", quartiles(acc_map)});
        summary.accuracy.push_back(
            {tag.q_star, tag.intensity, tag.coef, "viterbi", quartiles(acc_vit)});
        std::vector<double> cpu;
        for (const auto& [rep, c] : cpu_by_rep) cpu.push_back(c);
        summary.cpu.push_back({tag.q_star, tag.intensity, tag.coef, quartiles(cpu)});
    }
    return summary;
}

}  // namespace swhawkes
