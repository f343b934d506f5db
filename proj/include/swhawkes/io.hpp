#pragma once

#include <string>
#include <vector>

#include "swhawkes/core.hpp"
#include "swhawkes/inference.hpp"
#include "swhawkes/select.hpp"
#include "swhawkes/simulate.hpp"
#include "swhawkes/study.hpp"

namespace swhawkes {

// Events file: header "# horizon=<T>", then one ascending decimal time per
// line.  The reader rejects unsorted input.
EventSequence read_events(const std::string& path);
void write_events(const std::string& path, const EventSequence& events);

// Counts file: one nonnegative integer per line; '#' lines are comments.
// The bin width comes from the caller.
BinnedSeries read_counts(const std::string& path, double delta);

void write_text_file(const std::string& path, const std::string& content);

std::string sim_output_json(const SimOutput& sim);
std::string fit_report_json(const FitReport& report, bool pinned);
std::string selection_json(const SelectionResult& sel);

std::string tau_csv(const std::vector<double>& tau, int n, int n_states);
std::string decoded_csv(const std::vector<int>& z_map, const std::vector<int>& z_vit);
std::string compare_csv(const CompareResult& result);

std::string study_csv(const std::vector<StudyRow>& rows);
std::string bias_summary_csv(const StudySummary& summary);
std::string qhat_summary_csv(const StudySummary& summary);
std::string accuracy_summary_csv(const StudySummary& summary);
std::string cpu_summary_csv(const StudySummary& summary);

// Plot renderings of the same numbers as the summary CSVs.
std::string bias_summary_svg(const StudySummary& summary);
std::string qhat_summary_svg(const StudySummary& summary);

}  // namespace swhawkes
