#include "aireml/cli/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "aireml/cli/csv.hpp"

namespace aireml::cli {

namespace {

using json = nlohmann::ordered_json;

json to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const MatrixXd& M) {
  json out = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

std::string join_values(const VectorXd& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v(i));
  }
  return s;
}

}  // namespace

json report_to_json(const FitReport& report, const std::vector<std::string>& fixed_names,
                    const std::vector<std::string>& random_names) {
  json j;
  j["variant"] = std::string(to_string(report.variant));
  j["scale"] = report.scale == Scale::natural ? "natural" : "log";
  j["status"] = std::string(to_string(report.status));
  j["error"] = report.error ? json(std::string(to_string(*report.error))) : json(nullptr);
  j["message"] = report.message;
  j["parameter_names"] = report.parameter_names;
  j["theta_hat"] = to_json(report.theta_hat.packed());
  j["se_theta"] = to_json(report.se_theta);
  j["info_kind_used"] = std::string(to_string(report.info_kind_used));
  j["final_score"] = to_json(report.final_score);
  j["final_information"] = to_json(report.final_information);
  j["fixed_effect_names"] = fixed_names;
  j["tau_hat"] = to_json(report.tau_hat);
  j["tau_cov"] = to_json(report.tau_cov);
  j["random_effect_names"] = random_names;
  j["u_tilde"] = to_json(report.u_tilde);
  j["u_cov"] = report.u_cov ? to_json(*report.u_cov) : json(nullptr);
  j["u_pev_diagonal"] = to_json(report.u_pev_diagonal);
  j["loglik"] = report.loglik;
  j["iterations"] = report.iterations;
  json trace = json::array();
  for (const auto& r : report.trace) {
    trace.push_back({{"k", r.k},
                     {"theta", to_json(r.theta)},
                     {"loglik", r.loglik},
                     {"score_norm", r.score_norm},
                     {"halvings", r.halvings},
                     {"variant", std::string(to_string(r.variant))},
                     {"fallback", r.fallback},
                     {"inflation", r.inflation}});
  }
  j["trace"] = std::move(trace);
  return j;
}

std::string format_trace_line(const IterationRecord& record) {
  return "iter " + std::to_string(record.k) + " theta=" + join_values(record.theta) +
         " loglik=" + format_double(record.loglik) + " score_norm=" + format_double(record.score_norm) +
         " halvings=" + std::to_string(record.halvings);
}

void write_trace(std::ostream& out, const IterationTrace& trace) {
  for (const auto& r : trace) out << format_trace_line(r) << '\n';
}

void write_summary(std::ostream& out, const FitReport& report, const std::vector<std::string>& fixed_names) {
  char line[256];
  out << "status: " << to_string(report.status);
  if (!report.message.empty()) out << " (" << report.message << ")";
  out << "\nvariant: " << to_string(report.variant) << ", scale: "
      << (report.scale == Scale::natural ? "natural" : "log") << ", iterations: " << report.iterations << '\n';
  std::snprintf(line, sizeof line, "restricted log-likelihood: %.10g\n", report.loglik);
  out << line;
  out << "variance parameters:\n";
  const VectorXd theta = report.theta_hat.packed();
  for (Index i = 0; i < theta.size(); ++i) {
    const std::string& name = report.parameter_names[static_cast<size_t>(i)];
    std::snprintf(line, sizeof line, "  %-24s %14.8g  se %12.6g\n", name.c_str(), theta(i),
                  i < report.se_theta.size() ? report.se_theta(i) : 0.0);
    out << line;
  }
  out << "fixed effects:\n";
  for (Index i = 0; i < report.tau_hat.size(); ++i) {
    const std::string name = static_cast<size_t>(i) < fixed_names.size() ? fixed_names[static_cast<size_t>(i)]
                                                                          : "tau" + std::to_string(i);
    std::snprintf(line, sizeof line, "  %-24s %14.8g  se %12.6g\n", name.c_str(), report.tau_hat(i),
                  std::sqrt(std::max(0.0, report.tau_cov(i, i))));
    out << line;
  }
  out << "random effects: " << report.u_tilde.size() << " predicted\n";
}

}  // namespace aireml::cli
