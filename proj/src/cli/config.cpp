#include "aireml/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aireml/cli/csv.hpp"
#include "json.hpp"

namespace aireml::cli {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError(source_ + ": key '" + key + "' " + what);
  }

  void only_keys(const json& obj, const std::string& key, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(key, "must be an object");
    for (const auto& [name, value] : obj.items()) {
      if (!allowed.count(name)) fail(join(key, name), "is not a recognised key");
    }
  }

  std::string string(const json& v, const std::string& key) const {
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
  }

  long long integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) fail(key, "must be an integer");
    return v.get<long long>();
  }

  VectorXd vector(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key, "must be an array of numbers");
    VectorXd out(static_cast<Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = number(v[i], key + "[" + std::to_string(i) + "]");
    return out;
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  std::string source_;
};

FixedTerm parse_fixed(const Reader& r, const json& v, const std::string& key) {
  FixedTerm t;
  if (v.is_string()) {
    t.column = v.get<std::string>();
    return t;
  }
  r.only_keys(v, key, {"column", "type"});
  if (!v.contains("column")) r.fail(key + ".column", "is required");
  t.column = r.string(v["column"], key + ".column");
  if (v.contains("type")) {
    const std::string type = r.string(v["type"], key + ".type");
    if (type == "numeric") t.type = FixedTerm::Type::numeric;
    else if (type == "factor") t.type = FixedTerm::Type::factor;
    else r.fail(key + ".type", "must be 'numeric' or 'factor', got '" + type + "'");
  }
  return t;
}

Theta parse_theta(const Reader& r, const json& v, const std::string& key) {
  r.only_keys(v, key, {"sigma2", "kappa"});
  if (!v.contains("sigma2")) r.fail(key + ".sigma2", "is required");
  Theta theta;
  theta.sigma2 = r.number(v["sigma2"], key + ".sigma2");
  theta.kappa = v.contains("kappa") ? r.vector(v["kappa"], key + ".kappa") : VectorXd(0);
  return theta;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": not valid JSON (" + e.what() + ")");
  }
  const Reader r(source);
  r.only_keys(root, "", {"model", "solver", "output", "simulation", "check"});
  if (!root.contains("model")) r.fail("model", "is required");

  RunConfig cfg;
  const json& model = root["model"];
  r.only_keys(model, "model", {"response", "fixed", "random", "residual"});
  if (!model.contains("response")) r.fail("model.response", "is required");
  cfg.response = r.string(model["response"], "model.response");

  if (model.contains("fixed")) {
    if (!model["fixed"].is_array()) r.fail("model.fixed", "must be an array");
    for (size_t i = 0; i < model["fixed"].size(); ++i) {
      cfg.fixed.push_back(parse_fixed(r, model["fixed"][i], "model.fixed[" + std::to_string(i) + "]"));
    }
  }
  if (model.contains("random")) {
    if (!model["random"].is_array()) r.fail("model.random", "must be an array");
    for (size_t i = 0; i < model["random"].size(); ++i) {
      const std::string key = "model.random[" + std::to_string(i) + "]";
      const json& v = model["random"][i];
      RandomTerm t;
      if (v.is_string()) {
        t.factor = v.get<std::string>();
      } else {
        r.only_keys(v, key, {"factor", "kernel"});
        if (!v.contains("factor")) r.fail(key + ".factor", "is required");
        t.factor = r.string(v["factor"], key + ".factor");
        if (v.contains("kernel") && !v["kernel"].is_null()) {
          t.kernel = resolve(base_dir, r.string(v["kernel"], key + ".kernel"));
        }
      }
      cfg.random.push_back(std::move(t));
    }
  }
  if (model.contains("residual")) {
    const json& v = model["residual"];
    r.only_keys(v, "model.residual", {"kind", "partition"});
    const std::string kind = v.contains("kind") ? r.string(v["kind"], "model.residual.kind") : "identity";
    if (kind == "identity") {
      cfg.residual.kind = ResidualStructure::Kind::identity;
      if (v.contains("partition")) r.fail("model.residual.partition", "is only allowed with kind 'partitioned'");
    } else if (kind == "partitioned") {
      cfg.residual.kind = ResidualStructure::Kind::partitioned;
      if (!v.contains("partition")) r.fail("model.residual.partition", "is required for kind 'partitioned'");
      cfg.residual.partition = r.string(v["partition"], "model.residual.partition");
    } else {
      r.fail("model.residual.kind", "must be 'identity' or 'partitioned', got '" + kind + "'");
    }
  }

  if (root.contains("solver")) {
    const json& v = root["solver"];
    r.only_keys(v, "solver", {"variant", "scale", "tol", "max_iter", "init"});
    if (v.contains("variant")) {
      const std::string s = r.string(v["variant"], "solver.variant");
      if (s == "newton") cfg.solver.variant = Variant::newton;
      else if (s == "fisher") cfg.solver.variant = Variant::fisher;
      else if (s == "ai") cfg.solver.variant = Variant::ai;
      else r.fail("solver.variant", "must be newton, fisher or ai, got '" + s + "'");
    }
    if (v.contains("scale")) {
      const std::string s = r.string(v["scale"], "solver.scale");
      if (s == "natural") cfg.solver.scale = Scale::natural;
      else if (s == "log") cfg.solver.scale = Scale::log;
      else r.fail("solver.scale", "must be natural or log, got '" + s + "'");
    }
    if (v.contains("tol")) {
      cfg.solver.tol = r.number(v["tol"], "solver.tol");
      if (!(cfg.solver.tol > 0.0)) r.fail("solver.tol", "must be positive");
    }
    if (v.contains("max_iter")) {
      const long long it = r.integer(v["max_iter"], "solver.max_iter");
      if (it < 1 || it > 1000000) r.fail("solver.max_iter", "must be a positive integer");
      cfg.solver.max_iter = static_cast<int>(it);
    }
    if (v.contains("init")) {
      const json& init = v["init"];
      if (init.is_string()) {
        if (init.get<std::string>() != "auto") r.fail("solver.init", "must be 'auto' or {sigma2, kappa}");
      } else {
        cfg.solver.init = parse_theta(r, init, "solver.init");
      }
    }
  }

  if (root.contains("output")) {
    const json& v = root["output"];
    r.only_keys(v, "output", {"report", "trace"});
    if (v.contains("report")) cfg.output.report = resolve(base_dir, r.string(v["report"], "output.report"));
    if (v.contains("trace")) cfg.output.trace = resolve(base_dir, r.string(v["trace"], "output.trace"));
  }

  if (root.contains("simulation")) {
    const json& v = root["simulation"];
    r.only_keys(v, "simulation", {"n", "seed", "sigma2", "kappa", "tau", "levels"});
    SimulationConfig sim;
    if (!v.contains("n")) r.fail("simulation.n", "is required");
    const long long n = r.integer(v["n"], "simulation.n");
    if (n < 2) r.fail("simulation.n", "must be at least 2");
    sim.n = static_cast<Index>(n);
    if (v.contains("seed")) {
      if (!v["seed"].is_number_unsigned() && !(v["seed"].is_number_integer() && v["seed"].get<long long>() >= 0)) {
        r.fail("simulation.seed", "must be a non-negative integer");
      }
      sim.seed = v["seed"].get<std::uint64_t>();
    }
    if (!v.contains("sigma2")) r.fail("simulation.sigma2", "is required");
    sim.theta.sigma2 = r.number(v["sigma2"], "simulation.sigma2");
    sim.theta.kappa = v.contains("kappa") ? r.vector(v["kappa"], "simulation.kappa") : VectorXd(0);
    if (v.contains("tau")) sim.tau = r.vector(v["tau"], "simulation.tau");
    if (v.contains("levels")) {
      if (!v["levels"].is_object()) r.fail("simulation.levels", "must be an object of level counts");
      for (const auto& [column, count] : v["levels"].items()) {
        const long long c = r.integer(count, "simulation.levels." + column);
        if (c < 1 || c > sim.n) r.fail("simulation.levels." + column, "must be between 1 and simulation.n");
        sim.levels[column] = static_cast<int>(c);
      }
    }
    cfg.simulation = std::move(sim);
  }

  if (root.contains("check")) {
    const json& v = root["check"];
    r.only_keys(v, "check", {"cap"});
    if (v.contains("cap")) {
      const long long cap = r.integer(v["cap"], "check.cap");
      if (cap < 1) r.fail("check.cap", "must be positive");
      cfg.check.cap = static_cast<Index>(cap);
    }
  }
  return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

SolveOptions solve_options(const RunConfig& config) {
  SolveOptions o;
  o.variant = config.solver.variant;
  o.tol = config.solver.tol;
  o.max_iter = config.solver.max_iter;
  o.init = config.solver.init;
  return o;
}

}  // namespace aireml::cli
