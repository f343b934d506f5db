#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swhawkes/io.hpp"
#include "swhawkes/rng.hpp"
#include "swhawkes/simulate.hpp"
#include "swhawkes/study.hpp"

namespace fs = std::filesystem;
using namespace swhawkes;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitIo = 4;

int exit_code_for(const Error& e) {
    return e.code() == ErrorCode::IoError ? kExitIo : kExitUsage;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SWHAWKES_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "SWHAWKES_SEED is not an integer");
        }
    }
    return 1;
}

struct InputFlags {
    std::string events_path;
    std::string counts_path;
    double coef = 2.0;  // bins per event when discretizing raw times
    double delta = 0.0;

    void attach(CLI::App* cmd) {
        auto* ev = cmd->add_option("--events", events_path,
                                   "events file (see '# horizon=' format)");
        auto* co = cmd->add_option("--counts", counts_path, "pre-binned counts file");
        cmd->add_option("--coef", coef, "bins per event for discretization")
            ->default_val(2.0);
        auto* de = cmd->add_option("--delta", delta, "bin width for --counts input");
        ev->excludes(co);
        co->needs(de);
    }

    BinnedSeries load() const {
        if (!events_path.empty()) {
            const EventSequence events = read_events(events_path);
            return discretize(events, coef);
        }
        if (!counts_path.empty()) return read_counts(counts_path, delta);
        throw Error(ErrorCode::InvalidRange, "provide --events or --counts");
    }
};

struct EmFlags {
    double tol = 1e-6;
    int max_iter = 500;
    int starts = 1;
    bool pin_alpha_zero = false;
    std::uint64_t seed = 0;
    bool seed_given = false;

    void attach(CLI::App* cmd, bool with_pin = true) {
        cmd->add_option("--tol", tol, "stopping tolerance on posterior change")
            ->default_val(1e-6);
        cmd->add_option("--max-iter", max_iter, "EM iteration cap")->default_val(500);
        cmd->add_option("--starts", starts, "number of EM restarts")->default_val(1);
        if (with_pin)
            cmd->add_flag("--pin-alpha-zero", pin_alpha_zero,
                          "fit the Poisson-HMM special case (alpha = beta = 0)");
        cmd->add_option("--seed", seed, "RNG seed (fallback: SWHAWKES_SEED, then 1)")
            ->each([this](const std::string&) { seed_given = true; });
    }

    EMConfig config() const {
        EMConfig cfg;
        cfg.tau_tol = tol;
        cfg.max_iter = max_iter;
        cfg.n_starts = starts;
        cfg.pin_alpha_zero = pin_alpha_zero;
        cfg.seed = seed_given ? seed : default_seed();
        return cfg;
    }
};

std::vector<std::vector<double>> parse_matrix(const std::vector<double>& flat) {
    const auto q = static_cast<size_t>(std::llround(std::sqrt(double(flat.size()))));
    if (q * q != flat.size())
        throw Error(ErrorCode::InvalidRange, "--rates needs Q*Q values");
    std::vector<std::vector<double>> m(q, std::vector<double>(q));
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) m[i][j] = flat[i * q + j];
    return m;
}

int run_simulate(int design, const std::vector<double>& rates,
                 const std::vector<double>& baselines, double a, double b, double L,
                 double horizon, std::uint64_t seed, const std::string& out_dir) {
    ContinuousParams c;
    if (design > 0) {
        c = default_design(design);
    } else {
        if (baselines.empty())
            throw Error(ErrorCode::InvalidRange,
                        "provide --design or --rates/--baselines/--a/--b");
        c.m = baselines;
        c.rates = rates.empty()
                      ? std::vector<std::vector<double>>(1, std::vector<double>{0.0})
                      : parse_matrix(rates);
        c.a = a;
        c.b = b;
        c.p0.assign(c.m.size(), 1.0 / static_cast<double>(c.m.size()));
    }
    c = c.scaled(L);
    validate(c);

    const SimOutput sim = sample_switching_hawkes(c, horizon, seed);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir);
    write_events(out_dir + "/events.txt", sim.events);
    write_text_file(out_dir + "/truth.json", sim_output_json(sim));
    std::cout << "events: " << sim.events.times.size() << "\n";
    return 0;
}

int run_fit(const InputFlags& input, const EmFlags& em, int n_states,
            const std::string& out_path, const std::string& tau_out, bool strict) {
    const BinnedSeries y = input.load();
    const EMConfig cfg = em.config();
    const FitReport report = fit_em(y, n_states, cfg);
    write_text_file(out_path, fit_report_json(report, cfg.pin_alpha_zero));
    if (!tau_out.empty())
        write_text_file(tau_out, tau_csv(report.tau, report.n, report.n_states));
    std::cout << "Q=" << n_states << " log_lik=" << report.log_lik
              << " aic=" << report.aic << " iters=" << report.n_iter
              << " converged=" << (report.converged ? "yes" : "no") << "\n";
    if (strict && !report.converged) {
        std::cerr << "EM did not converge within " << cfg.max_iter << " iterations\n";
        return kExitNotConverged;
    }
    return 0;
}

int run_select(const InputFlags& input, const EmFlags& em, int q_max,
               const std::string& out_path, const std::string& decode_out,
               bool strict) {
    const BinnedSeries y = input.load();
    const EMConfig cfg = em.config();
    const SelectionResult sel = select_q(y, q_max, cfg);
    write_text_file(out_path, selection_json(sel));
    std::cout << "Q_hat=" << sel.q_hat << "\n";
    std::cout << "Q,log_lik,aic,status\n";
    bool all_converged = true;
    for (const FitOutcome& out : sel.per_q) {
        if (out.ok)
            std::cout << out.n_states << "," << out.report.log_lik << ","
                      << out.aic_value << "," << out.status << "\n";
        else
            std::cout << out.n_states << ",,," << out.status << "\n";
        if (out.ok && !out.report.converged) all_converged = false;
    }
    if (!decode_out.empty()) {
        const FitOutcome& best = sel.per_q[sel.q_hat - 1];
        const std::vector<int> z_map =
            map_decode(best.report.tau, best.report.n, best.report.n_states);
        const std::vector<int> z_vit = viterbi(y, best.report.theta_hat);
        write_text_file(decode_out, decoded_csv(z_map, z_vit));
    }
    return strict && !all_converged ? kExitNotConverged : 0;
}

int run_compare(const InputFlags& input, const EmFlags& em, int q_max,
                const std::string& out_path) {
    const BinnedSeries y = input.load();
    const CompareResult result = compare_models(y, q_max, em.config());
    write_text_file(out_path, compare_csv(result));
    std::cout << compare_csv(result);
    std::cout << "winner: " << to_string(result.best_kind) << "\n";
    return 0;
}

int run_study_cmd(const std::string& preset, StudyConfig cfg, int jobs,
                  const std::string& out_dir, bool quiet, bool svg) {
    if (preset == "desk") {
        cfg.q_stars = {1, 2, 3};
        cfg.intensities = {1.0, 2.0};
        cfg.coefs = {1.0, 2.0};
        cfg.replicates = 20;
        cfg.q_max = 5;
    } else if (preset == "paper") {
        cfg.q_stars = {1, 2, 3};
        cfg.intensities = {0.5, 1.0, 1.5, 2.0};
        cfg.coefs = {0.5, 1.0, 2.0, 4.0};
        cfg.replicates = 100;
        cfg.q_max = 5;
    } else if (preset == "smoke") {
        cfg.q_stars = {1, 2};
        cfg.intensities = {1.0};
        cfg.coefs = {1.0, 2.0};
        cfg.replicates = 2;
        cfg.q_max = 2;
    } else if (!preset.empty()) {
        throw Error(ErrorCode::InvalidRange, "unknown preset '" + preset + "'");
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir);

    const StudyProgress progress = [&](int q_star, double intensity, int rep) {
        if (!quiet)
            std::fprintf(stderr, "cell q*=%d L=%g rep=%d done\n", q_star, intensity,
                         rep);
    };
    const std::vector<StudyRow> rows = run_study(cfg, jobs, progress);
    const StudySummary summary = summarize(rows);
    write_text_file(out_dir + "/study.csv", study_csv(rows));
    write_text_file(out_dir + "/summary_bias.csv", bias_summary_csv(summary));
    write_text_file(out_dir + "/summary_qhat.csv", qhat_summary_csv(summary));
    write_text_file(out_dir + "/summary_accuracy.csv", accuracy_summary_csv(summary));
    write_text_file(out_dir + "/summary_cpu.csv", cpu_summary_csv(summary));
    if (svg) {
        write_text_file(out_dir + "/boxplot_bias.svg", bias_summary_svg(summary));
        write_text_file(out_dir + "/hist_qhat.svg", qhat_summary_svg(summary));
    }
    std::cout << "rows: " << rows.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov-switching discrete-time Hawkes process toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample the continuous switching Hawkes process");
    int design = 0;
    std::vector<double> rates, baselines;
    double sim_a = 40.0, sim_b = 160.0, sim_L = 1.0, horizon = 1.0;
    std::uint64_t sim_seed = 0;
    bool sim_seed_given = false;
    std::string sim_out = "out";
    auto* design_opt = sim->add_option("--design", design, "paper design q* in {1,2,3}");
    auto* rates_opt = sim->add_option("--rates", rates, "row-major Q*Q rate matrix");
    auto* base_opt = sim->add_option("--baselines", baselines, "baseline intensities m");
    sim->add_option("--a", sim_a, "excitation jump size")->default_val(40.0);
    sim->add_option("--b", sim_b, "excitation decay rate")->default_val(160.0);
    sim->add_option("--L", sim_L, "intensity multiplier")->default_val(1.0);
    sim->add_option("--horizon", horizon, "observation window length")->default_val(1.0);
    sim->add_option("--seed", sim_seed, "RNG seed")->each([&](const std::string&) {
        sim_seed_given = true;
    });
    sim->add_option("-o,--out", sim_out, "output directory")->default_val("out");
    design_opt->excludes(rates_opt);
    design_opt->excludes(base_opt);

    // fit
    auto* fit = app.add_subcommand("fit", "maximum-likelihood fit for a fixed Q");
    InputFlags fit_input;
    EmFlags fit_em_flags;
    int fit_q = 0;
    std::string fit_out = "fit_report.json", fit_tau_out;
    bool fit_strict = false;
    fit_input.attach(fit);
    fit_em_flags.attach(fit);
    fit->add_option("--Q", fit_q, "number of hidden states")
        ->required()
        ->check(CLI::PositiveNumber);
    fit->add_option("-o,--out", fit_out, "fit report path")->default_val("fit_report.json");
    fit->add_option("--tau-out", fit_tau_out, "write posterior marginals as CSV");
    fit->add_flag("--strict", fit_strict, "exit 3 when EM does not converge");

    // select
    auto* sel = app.add_subcommand("select", "AIC selection of the number of states");
    InputFlags sel_input;
    EmFlags sel_em_flags;
    int sel_qmax = 5;
    std::string sel_out = "selection.json", sel_decode_out;
    bool sel_strict = false;
    sel_input.attach(sel);
    sel_em_flags.attach(sel);
    sel->add_option("--q-max", sel_qmax, "largest Q to scan")
        ->default_val(5)
        ->check(CLI::PositiveNumber);
    sel->add_option("-o,--out", sel_out, "selection report path")
        ->default_val("selection.json");
    sel->add_option("--decode-out", sel_decode_out,
                    "write MAP/Viterbi decoding of the selected model");
    sel->add_flag("--strict", sel_strict, "exit 3 when any fit does not converge");

    // compare
    auto* cmp = app.add_subcommand("compare", "four-model AIC benchmark");
    InputFlags cmp_input;
    EmFlags cmp_em_flags;
    int cmp_qmax = 5;
    std::string cmp_out = "compare.csv";
    cmp_input.attach(cmp);
    cmp_em_flags.attach(cmp, /*with_pin=*/false);
    cmp->add_option("--q-max", cmp_qmax, "largest Q for the HMM variants")
        ->default_val(5)
        ->check(CLI::PositiveNumber);
    cmp->add_option("-o,--out", cmp_out, "comparison table path")->default_val("compare.csv");

    // study
    auto* study = app.add_subcommand("study", "run the simulation benchmark grid");
    std::string preset;
    StudyConfig study_cfg;
    std::vector<int> study_qstars;
    std::vector<double> study_L, study_C;
    int study_B = 0, study_qmax = 0, jobs = 1;
    std::uint64_t study_seed = 0;
    bool study_seed_given = false, timings = false, quiet = false, svg = false;
    std::string study_out = "study_out";
    study->add_option("--preset", preset, "desk, paper, or smoke");
    study->add_option("--q-stars", study_qstars, "true state counts, subset of {1,2,3}");
    study->add_option("--L", study_L, "intensity multipliers");
    study->add_option("--C", study_C, "discretization coefficients");
    study->add_option("--B", study_B, "replicates per cell");
    study->add_option("--q-max", study_qmax, "largest Q to fit");
    study->add_option("--jobs", jobs, "parallel workers")->default_val(1);
    study->add_option("--seed", study_seed, "root seed")->each([&](const std::string&) {
        study_seed_given = true;
    });
    study->add_flag("--timings", timings, "record wall-clock per select_q call "
                                          "(breaks byte-reproducibility)");
    study->add_flag("--svg", svg, "also render boxplot/histogram SVGs");
    study->add_flag("--quiet", quiet, "suppress per-cell progress");
    study->add_option("-o,--out", study_out, "output directory")->default_val("study_out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed())
            return run_simulate(design, rates, baselines, sim_a, sim_b, sim_L, horizon,
                                sim_seed_given ? sim_seed : default_seed(), sim_out);
        if (fit->parsed())
            return run_fit(fit_input, fit_em_flags, fit_q, fit_out, fit_tau_out,
                           fit_strict);
        if (sel->parsed())
            return run_select(sel_input, sel_em_flags, sel_qmax, sel_out,
                              sel_decode_out, sel_strict);
        if (cmp->parsed())
            return run_compare(cmp_input, cmp_em_flags, cmp_qmax, cmp_out);
        if (study->parsed()) {
            if (!study_qstars.empty()) study_cfg.q_stars = study_qstars;
            if (!study_L.empty()) study_cfg.intensities = study_L;
            if (!study_C.empty()) study_cfg.coefs = study_C;
            if (study_B > 0) study_cfg.replicates = study_B;
            if (study_qmax > 0) study_cfg.q_max = study_qmax;
            study_cfg.seed = study_seed_given ? study_seed : default_seed();
            study_cfg.timings = timings;
            return run_study_cmd(preset, study_cfg, jobs, study_out, quiet, svg);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
