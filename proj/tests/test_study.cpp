#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "swhawkes/io.hpp"
#include "swhawkes/simulate.hpp"
#include "swhawkes/study.hpp"

using namespace swhawkes;

TEST_CASE("default designs reproduce the baseline parameter tables") {
    const ContinuousParams q2 = default_design(2);
    CHECK(q2.m == std::vector<double>{1.0, 400.0});
    CHECK(q2.rates[0][0] == doctest::Approx(-25.0));
    CHECK(q2.rates[0][1] == doctest::Approx(25.0));
    CHECK(q2.p0 == std::vector<double>{0.5, 0.5});
    CHECK(q2.a == 40.0);
    CHECK(q2.b == 160.0);

    const ContinuousParams q3 = default_design(3);
    CHECK(q3.m == std::vector<double>{1.0, 200.0, 1000.0});
    CHECK(q3.rates[1][1] == doctest::Approx(-100.0 / 3.0));
    CHECK(q3.p0[0] == doctest::Approx(1.0 / 3.0));

    const ContinuousParams q1 = default_design(1);
    CHECK(q1.m == std::vector<double>{60.0});
    CHECK(q1.rates == std::vector<std::vector<double>>{{0.0}});

    CHECK_THROWS_WITH_AS(default_design(4), doctest::Contains("UnsupportedQStar"),
                         Error);
}

TEST_CASE("scaling multiplies the baseline and leaves the kernel alone") {
    const ContinuousParams c = default_design(2).scaled(2.0);
    CHECK(c.m == std::vector<double>{2.0, 800.0});
    CHECK(c.a == 40.0);  // branching ratio a/b does not depend on L
    CHECK(c.b == 160.0);
}

TEST_CASE("run_study emits exactly q_max rows per cell and coefficient") {
    StudyConfig cfg;
    cfg.q_stars = {2};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0};
    cfg.replicates = 1;
    cfg.q_max = 3;
    cfg.seed = 7;
    const std::vector<StudyRow> rows = run_study_serial(cfg);
    REQUIRE(rows.size() == 3);
    for (int q = 1; q <= 3; ++q) {
        CHECK(rows[q - 1].q_fit == q);
        CHECK(rows[q - 1].status == "ok");
        CHECK(rows[q - 1].n_events > 0);
        CHECK(rows[q - 1].q_hat_aic >= 1);
    }
}

TEST_CASE("run_study rows are identical across serial and parallel drivers") {
    StudyConfig cfg;
    cfg.q_stars = {1, 2};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0};
    cfg.replicates = 2;
    cfg.q_max = 2;
    cfg.seed = 3;
    const std::string serial = study_csv(run_study_serial(cfg));
    const std::string parallel = study_csv(run_study(cfg, 3));
    CHECK(serial == parallel);
}

TEST_CASE("run_study output is reproducible byte for byte") {
    StudyConfig cfg;
    cfg.q_stars = {1};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0, 2.0};
    cfg.replicates = 2;
    cfg.q_max = 2;
    cfg.seed = 11;
    CHECK(study_csv(run_study_serial(cfg)) == study_csv(run_study_serial(cfg)));
}

TEST_CASE("summarize handles a single row and counts histograms") {
    StudyConfig cfg;
    cfg.q_stars = {1};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0};
    cfg.replicates = 4;
    cfg.q_max = 2;
    cfg.seed = 21;
    const std::vector<StudyRow> rows = run_study_serial(cfg);
    const StudySummary summary = summarize(rows);

    int histogram_total = 0;
    for (const QhatSummaryRow& r : summary.qhat) histogram_total += r.count;
    CHECK(histogram_total == cfg.replicates);

    // single-row slice: quartiles collapse to that row's value
    std::vector<StudyRow> one;
    for (const StudyRow& r : rows)
        if (r.rep == 0 && r.q_fit == 1) one.push_back(r);
    REQUIRE(one.size() == 1);
    const StudySummary s1 = summarize(one);
    for (const AccuracySummaryRow& r : s1.accuracy) {
        CHECK(r.stat.q1 == r.stat.median);
        CHECK(r.stat.median == r.stat.q3);
    }
    bool found_alpha = false;
    for (const BiasSummaryRow& r : s1.bias)
        if (r.param == "alpha") {
            found_alpha = true;
            const DiscKernel truth = cont_to_disc(
                default_design(1).scaled(1.0), 1.0 / one[0].n_bins);
            CHECK(r.stat.median ==
                  doctest::Approx(one[0].alpha_hat - truth.alpha).epsilon(1e-12));
        }
    CHECK(found_alpha);
}

TEST_CASE("study csv serialization round-trips deterministically") {
    StudyConfig cfg;
    cfg.q_stars = {1};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0};
    cfg.replicates = 1;
    cfg.q_max = 1;
    cfg.seed = 2;
    const std::vector<StudyRow> rows = run_study_serial(cfg);
    const std::string csv = study_csv(rows);
    CHECK(csv.rfind("q_star,L,C,rep,seed,n_events,n_bins,Q_fit,log_lik,aic,"
                    "alpha_hat,beta_hat,mu_hat,acc_map,acc_vit,q_hat_aic,"
                    "cpu_seconds,status\n", 0) == 0);
    CHECK(csv == study_csv(rows));
    // timings stay zero unless explicitly enabled
    for (const StudyRow& r : rows) CHECK(r.cpu_seconds == 0.0);
}

TEST_CASE("alpha estimates tighten as the intensity grows at fixed C") {
    const auto median_abs_alpha_err = [](double intensity) {
        StudyConfig cfg;
        cfg.q_stars = {1};
        cfg.intensities = {intensity};
        cfg.coefs = {1.0};
        cfg.replicates = 9;
        cfg.q_max = 1;
        cfg.seed = 5150;
        std::vector<double> errs;
        for (const StudyRow& row : run_study_serial(cfg)) {
            if (row.status != "ok") continue;
            const DiscKernel truth = cont_to_disc(
                default_design(1).scaled(intensity), 1.0 / row.n_bins);
            errs.push_back(std::abs(row.alpha_hat - truth.alpha));
        }
        std::sort(errs.begin(), errs.end());
        return errs[errs.size() / 2];
    };
    CHECK(median_abs_alpha_err(2.0) <= median_abs_alpha_err(0.5));
}

TEST_CASE("compare_models prefers the plain Poisson on iid Poisson data") {
    // smoke check at 12 seeds; the 50-seed statistical claim lives in the
    // acceptance suite.  The true win rate is ~85%: the nested fits clear
    // their AIC margin on a tail of null datasets (boundary LRT).
    DiscreteParams truth;
    truth.nu = {1.0};
    truth.pi = {{1.0}};
    truth.mu = {4.0};
    int wins = 0;
    const int reps = 12;
    for (int rep = 0; rep < reps; ++rep) {
        const DiscreteSample s = sample_discrete(truth, 800, 640000 + rep);
        BinnedSeries y;
        y.delta = 1.0;
        y.counts = s.counts;
        EMConfig cfg;
        cfg.seed = rep;
        const CompareResult result = compare_models(y, 2, cfg);
        if (result.best_kind == ModelKind::PoissonHomog) ++wins;
    }
    CHECK(wins >= 7);
}

TEST_CASE("compare_models prefers the Hawkes-HMM on switching Hawkes data") {
    int wins = 0;
    const int reps = 6;
    for (int rep = 0; rep < reps; ++rep) {
        const SimOutput sim = sample_switching_hawkes(
            default_design(2).scaled(2.0), 1.0, 131000 + rep);
        const BinnedSeries y = discretize(sim.events, 2.0);
        EMConfig cfg;
        cfg.seed = rep;
        const CompareResult result = compare_models(y, 2, cfg);
        if (result.best_kind == ModelKind::HawkesHMM) ++wins;
    }
    CHECK(wins > reps / 2);
}

TEST_CASE("compare_models prefers the homogeneous Hawkes under pure excitation") {
    // well-specified excited data: the likelihood gain grows with n and
    // clears the D = 3 vs 1 penalty on essentially every draw
    DiscreteParams truth;
    truth.nu = {1.0};
    truth.pi = {{1.0}};
    truth.mu = {0.4};
    truth.alpha = 0.24;
    truth.beta = 0.4;
    int beats_poisson = 0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        const DiscreteSample s = sample_discrete(truth, 1500, 171000 + rep);
        BinnedSeries y;
        y.delta = 1.0;
        y.counts = s.counts;
        EMConfig cfg;
        cfg.seed = rep;
        const CompareResult result = compare_models(y, 2, cfg);
        double poisson_aic = 0.0, hawkes_aic = 0.0;
        for (const CompareEntry& e : result.entries) {
            if (e.kind == ModelKind::PoissonHomog) poisson_aic = e.aic_value;
            if (e.kind == ModelKind::HawkesHomog) hawkes_aic = e.aic_value;
        }
        if (hawkes_aic > poisson_aic) ++beats_poisson;
    }
    CHECK(beats_poisson >= 9);
}

TEST_CASE("compare_models skips the HMM variants when q_max is one") {
    Rng rng(88);
    const BinnedSeries y = oracles::random_series(rng, 100, 2.0);
    EMConfig cfg;
    const CompareResult result = compare_models(y, 1, cfg);
    REQUIRE(result.entries.size() == 4);
    CHECK(result.entries[1].status == "skipped: q_max < 2");
    CHECK(result.entries[3].status == "skipped: q_max < 2");
    CHECK(result.entries[0].ok);
    CHECK(result.entries[2].ok);
}

TEST_CASE("compare csv marks exactly one winner") {
    Rng rng(89);
    const BinnedSeries y = oracles::random_series(rng, 150, 2.0);
    EMConfig cfg;
    const CompareResult result = compare_models(y, 2, cfg);
    const std::string csv = compare_csv(result);
    size_t winners = 0, pos = 0;
    while ((pos = csv.find(",1,ok", pos)) != std::string::npos) {
        ++winners;
        pos += 5;
    }
    CHECK(winners == 1);
}
