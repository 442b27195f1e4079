#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aireml/report.hpp"
#include "json.hpp"

namespace aireml::cli {

/// Every FitReport field under its own name, plus the fixed and random effect labels.
nlohmann::ordered_json report_to_json(const FitReport& report, const std::vector<std::string>& fixed_names,
                              const std::vector<std::string>& random_names);

/// iter <k> theta=<v,...> loglik=<v> score_norm=<v> halvings=<j>
std::string format_trace_line(const IterationRecord& record);
void write_trace(std::ostream& out, const IterationTrace& trace);

void write_summary(std::ostream& out, const FitReport& report, const std::vector<std::string>& fixed_names);

}  // namespace aireml::cli
