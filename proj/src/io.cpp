#include "swhawkes/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace swhawkes {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ',' || c == '\n') c = ';';
    return out;
}

std::string join_mu(const std::vector<double>& mu) {
    std::string out;
    for (size_t i = 0; i < mu.size(); ++i) {
        if (i) out += ';';
        out += fmt(mu[i]);
    }
    return out;
}

json theta_json(const DiscreteParams& theta) {
    return json{{"Q", theta.n_states()}, {"nu", theta.nu},    {"pi", theta.pi},
                {"mu", theta.mu},        {"alpha", theta.alpha}, {"beta", theta.beta}};
}

}  // namespace

EventSequence read_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# horizon=", 0) != 0)
        throw Error(ErrorCode::ParseError,
                    path + ": expected header '# horizon=<T>'");
    EventSequence events;
    try {
        events.horizon = std::stod(line.substr(10));
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path + ": bad horizon value");
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t pos = 0;
        double t = 0.0;
        try {
            t = std::stod(line, &pos);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, path + ": bad event time '" + line + "'");
        }
        events.times.push_back(t);
    }
    validate(events);  // rejects unsorted or out-of-range times
    return events;
}

void write_events(const std::string& path, const EventSequence& events) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "# horizon=" << fmt(events.horizon) << "\n";
    for (double t : events.times) out << fmt(t) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

BinnedSeries read_counts(const std::string& path, double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::NonPositiveDelta, "bin width must be positive");
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    BinnedSeries y;
    y.delta = delta;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        long long v = 0;
        try {
            v = std::stoll(line);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, path + ": bad count '" + line + "'");
        }
        if (v < 0)
            throw Error(ErrorCode::InvalidRange, path + ": counts must be nonnegative");
        y.counts.push_back(v);
    }
    if (y.counts.empty())
        throw Error(ErrorCode::EmptySequence, path + ": no counts found");
    return y;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string sim_output_json(const SimOutput& sim) {
    std::vector<int> states;
    states.reserve(sim.z_path.states.size());
    for (int s : sim.z_path.states) states.push_back(s + 1);
    const json j{{"times", sim.events.times},
                 {"horizon", sim.events.horizon},
                 {"z_jump_times", sim.z_path.jump_times},
                 {"z_states", states},
                 {"seed", sim.seed}};
    return j.dump(2) + "\n";
}

std::string fit_report_json(const FitReport& report, bool pinned) {
    json j = theta_json(report.theta_hat);
    j["log_lik"] = report.log_lik;
    j["aic"] = report.aic;
    j["n_iter"] = report.n_iter;
    j["converged"] = report.converged;
    j["delta"] = report.delta;
    j["model"] = pinned ? "poisson-hmm" : "hawkes-hmm";
    j["init_theta"] = theta_json(report.init_theta);
    return j.dump(2) + "\n";
}

std::string selection_json(const SelectionResult& sel) {
    json per_q = json::array();
    for (const FitOutcome& out : sel.per_q) {
        json entry{{"Q", out.n_states}, {"status", out.status}};
        if (out.ok) {
            entry["log_lik"] = out.report.log_lik;
            entry["aic"] = out.aic_value;
            entry["n_iter"] = out.report.n_iter;
            entry["converged"] = out.report.converged;
            entry["theta"] = theta_json(out.report.theta_hat);
        }
        per_q.push_back(entry);
    }
    const json j{{"q_hat", sel.q_hat}, {"per_q", per_q}};
    return j.dump(2) + "\n";
}

std::string tau_csv(const std::vector<double>& tau, int n, int n_states) {
    std::string out;
    for (int k = 0; k < n; ++k) {
        for (int q = 0; q < n_states; ++q) {
            if (q) out += ',';
            out += fmt(tau[static_cast<size_t>(k) * n_states + q]);
        }
        out += '\n';
    }
    return out;
}

std::string decoded_csv(const std::vector<int>& z_map, const std::vector<int>& z_vit) {
    std::string out = "bin,map_state,viterbi_state\n";
    for (size_t k = 0; k < z_map.size(); ++k)
        out += std::to_string(k + 1) + "," + std::to_string(z_map[k] + 1) + "," +
               std::to_string(z_vit[k] + 1) + "\n";
    return out;
}

std::string compare_csv(const CompareResult& result) {
    std::string out = "model,Q,log_lik,aic,best,status\n";
    for (const CompareEntry& e : result.entries) {
        out += std::string(to_string(e.kind)) + "," + std::to_string(e.n_states) + ",";
        out += e.ok ? fmt(e.log_lik) : "";
        out += ",";
        out += e.ok ? fmt(e.aic_value) : "";
        out += ",";
        out += (e.ok && e.kind == result.best_kind) ? "1" : "0";
        out += "," + sanitize(e.status) + "\n";
    }
    return out;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
    std::string out =
        "q_star,L,C,rep,seed,n_events,n_bins,Q_fit,log_lik,aic,alpha_hat,beta_hat,"
        "mu_hat,acc_map,acc_vit,q_hat_aic,cpu_seconds,status\n";
    for (const StudyRow& r : rows) {
        out += std::to_string(r.q_star) + "," + fmt(r.intensity) + "," + fmt(r.coef) +
               "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.n_events) + "," + std::to_string(r.n_bins) + "," +
               std::to_string(r.q_fit) + ",";
        if (r.status == "ok") {
            out += fmt(r.log_lik) + "," + fmt(r.aic) + "," + fmt(r.alpha_hat) + "," +
                   fmt(r.beta_hat) + "," + join_mu(r.mu_hat) + "," + fmt(r.acc_map) +
                   "," + fmt(r.acc_vit) + "," + std::to_string(r.q_hat_aic) + "," +
                   fmt(r.cpu_seconds);
        } else {
            out += ",,,,,,,," + fmt(r.cpu_seconds);
        }
        out += "," + sanitize(r.status) + "\n";
    }
    return out;
}

std::string bias_summary_csv(const StudySummary& summary) {
    std::string out = "q_star,L,C,param,q1,median,q3,count\n";
    for (const BiasSummaryRow& r : summary.bias)
        out += std::to_string(r.q_star) + "," + fmt(r.intensity) + "," + fmt(r.coef) +
               "," + r.param + "," + fmt(r.stat.q1) + "," + fmt(r.stat.median) + "," +
               fmt(r.stat.q3) + "," + std::to_string(r.stat.count) + "\n";
    return out;
}

std::string qhat_summary_csv(const StudySummary& summary) {
    std::string out = "q_star,L,C,q_hat,count\n";
    for (const QhatSummaryRow& r : summary.qhat)
        out += std::to_string(r.q_star) + "," + fmt(r.intensity) + "," + fmt(r.coef) +
               "," + std::to_string(r.q_hat) + "," + std::to_string(r.count) + "\n";
    return out;
}

std::string accuracy_summary_csv(const StudySummary& summary) {
    std::string out = "q_star,L,C,rule,q1,median,q3,count\n";
    for (const AccuracySummaryRow& r : summary.accuracy)
        out += std::to_string(r.q_star) + "," + fmt(r.intensity) + "," + fmt(r.coef) +
               "," + r.rule + "," + fmt(r.stat.q1) + "," + fmt(r.stat.median) + "," +
               fmt(r.stat.q3) + "," + std::to_string(r.stat.count) + "\n";
    return out;
}

std::string cpu_summary_csv(const StudySummary& summary) {
    std::string out = "q_star,L,C,q1,median,q3,count\n";
    for (const CpuSummaryRow& r : summary.cpu)
        out += std::to_string(r.q_star) + "," + fmt(r.intensity) + "," + fmt(r.coef) +
               "," + fmt(r.stat.q1) + "," + fmt(r.stat.median) + "," + fmt(r.stat.q3) +
               "," + std::to_string(r.stat.count) + "\n";
    return out;
}

namespace {

std::string svg_open(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" font-family=\"monospace\" font-size=\"8\">\n";
}

std::string svg_label(double x, double y, const std::string& text) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" transform=\"rotate(60 %.1f %.1f)\">"
                  "%s</text>\n",
                  x, y, x, y, text.c_str());
    return buf;
}

std::string cell_tag(int q_star, double intensity, double coef) {
    return "q" + std::to_string(q_star) + " L" + fmt(intensity) + " C" + fmt(coef);
}

}  // namespace

std::string bias_summary_svg(const StudySummary& summary) {
    const int box_w = 16, gap = 8, top = 14, plot_h = 200, label_h = 90;
    const int width = 40 + static_cast<int>(summary.bias.size()) * (box_w + gap);
    const int height = top + plot_h + label_h;

    double lo = 0.0, hi = 0.0;
    for (const BiasSummaryRow& r : summary.bias) {
        if (r.stat.count == 0) continue;
        lo = std::min(lo, r.stat.q1);
        hi = std::max(hi, r.stat.q3);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto ypos = [&](double v) {
        return top + plot_h * (hi - v) / (hi - lo);
    };

    std::string out = svg_open(width, height);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"30\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                  "stroke=\"green\" stroke-dasharray=\"3,3\"/>\n",
                  ypos(0.0), width - 10, ypos(0.0));
    out += buf;
    double x = 40.0;
    for (const BiasSummaryRow& r : summary.bias) {
        if (r.stat.count > 0) {
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%d\" height=\"%.1f\" "
                          "fill=\"none\" stroke=\"black\"/>\n",
                          x, ypos(r.stat.q3), box_w,
                          std::max(0.5, ypos(r.stat.q1) - ypos(r.stat.q3)));
            out += buf;
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                          "stroke=\"red\"/>\n",
                          x, ypos(r.stat.median), x + box_w, ypos(r.stat.median));
            out += buf;
        }
        out += svg_label(x, top + plot_h + 10,
                         cell_tag(r.q_star, r.intensity, r.coef) + " " + r.param);
        x += box_w + gap;
    }
    return out + "</svg>\n";
}

std::string qhat_summary_svg(const StudySummary& summary) {
    const int bar_w = 16, gap = 8, top = 14, plot_h = 160, label_h = 80;
    const int width = 40 + static_cast<int>(summary.qhat.size()) * (bar_w + gap);
    const int height = top + plot_h + label_h;
    int max_count = 1;
    for (const QhatSummaryRow& r : summary.qhat) max_count = std::max(max_count, r.count);

    std::string out = svg_open(width, height);
    char buf[256];
    double x = 40.0;
    for (const QhatSummaryRow& r : summary.qhat) {
        const double h = plot_h * static_cast<double>(r.count) / max_count;
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%d\" height=\"%.1f\" "
                      "fill=\"steelblue\"/>\n",
                      x, top + plot_h - h, bar_w, h);
        out += buf;
        std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\">%d</text>\n", x,
                      top + plot_h - h - 2, r.count);
        out += buf;
        out += svg_label(x, top + plot_h + 10,
                         cell_tag(r.q_star, r.intensity, r.coef) + " Q=" +
                             std::to_string(r.q_hat));
        x += bar_w + gap;
    }
    return out + "</svg>\n";
}

}  // namespace swhawkes
