#include "lqts/scenario.hpp"

#include "lqts/linalg.hpp"
#include "lqts/riccati.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lqts {

namespace {

using nlohmann::json;

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const Index r = static_cast<Index>(values.size());
  const Index c = static_cast<Index>(values.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : values) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Scenario with_shared_defaults(std::string name, Matrix A, Matrix B, Matrix gain) {
  Scenario s;
  s.name = std::move(name);
  const Index p = A.rows();
  const Index q = B.cols();
  s.truth = DriftParams(std::move(A), std::move(B));
  s.cost = CostSpec(Matrix::Identity(p, p), 0.1 * Matrix::Identity(q, q));
  s.noise = NoiseSpec(0.25 * Matrix::Identity(p, p));
  s.initial_gain = std::move(gain);
  return s;
}

// The stored initial gains were drawn with find_random_stabilizer(truth,
// make_rng(2024, 7), 1.0): the first N(0, 1) gain that stabilizes the truth.

Scenario x29a() {
  return with_shared_defaults(
      "x29a",
      rows({{-0.16, 0.07, -1.00, 0.04},
            {-15.20, -2.60, 1.11, 0.00},
            {6.84, -0.10, -0.06, 0.00},
            {0.00, 1.00, 0.07, 0.00}}),
      rows({{-0.0006, 0.0007}, {1.3430, 0.2345}, {0.0897, -0.0710}, {0.0000, 0.0000}}),
      rows({{1.7746425686195806, 1.3361489434064173, 0.045121905269200104, -1.0288785714319035},
            {-0.7837537975008585, 0.37597383265792794, -0.56083743350000059,
             0.33273571291898085}}));
}

Scenario b747() {
  return with_shared_defaults(
      "b747",
      rows({{-0.199, 0.003, -0.980, 0.038},
            {-3.868, -0.929, 0.471, -0.008},
            {1.591, -0.015, -0.309, 0.003},
            {-0.198, 0.958, 0.021, 0.000}}),
      rows({{-0.001, 0.058}, {0.296, 0.153}, {0.012, -0.908}, {0.015, 0.008}}),
      rows({{-0.35610258194689048, -1.7929119048305535, -0.15712689953868594,
             -1.1251032324611492},
            {-0.058750993101032226, 0.88090405624628587, 2.5527819318990677,
             0.67722144567962583}}));
}

Scenario glucose() {
  return with_shared_defaults(
      "glucose",
      rows({{1.91, -2.82, 0.91}, {1.00, -1.00, 0.00}, {0.00, 1.00, -1.00}}),
      rows({{-0.0992}, {0.0000}, {0.0000}}),
      rows({{0.68113289724489468, -0.90446021087340889, 0.22448962924709562}}));
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty()) {
    throw ConfigError(what + " must be a non-empty array of rows");
  }
  const Index r = static_cast<Index>(j.size());
  const Index c = static_cast<Index>(j.front().size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != c) {
      throw ConfigError(what + " has rows of different lengths");
    }
    for (Index k = 0; k < c; ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ConfigError(what + " entries must be numbers");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

const json& section(const json& root, const char* key) {
  if (!root.contains(key) || !root.at(key).is_object()) {
    throw ConfigError(std::string("config is missing the '") + key + "' section");
  }
  return root.at(key);
}

const json& field(const json& sec, const char* section_name, const char* key) {
  if (!sec.contains(key)) {
    throw ConfigError(std::string("config section '") + section_name + "' is missing '" + key +
                      "'");
  }
  return sec.at(key);
}

double number(const json& sec, const char* section_name, const char* key) {
  const json& v = field(sec, section_name, key);
  if (!v.is_number()) {
    throw ConfigError(std::string(section_name) + "." + key + " must be a number");
  }
  return v.get<double>();
}

}  // namespace

void Scenario::validate() const {
  truth.validate();
  cost.validate();
  noise.validate();
  if (cost.p() != p() || cost.q() != q() || noise.p() != p()) {
    throw ShapeError("scenario '" + name + "': cost/noise dimensions do not match the drift");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(dither.sigma > 0.0)) throw ConfigError("dither sigma must be positive");
  EpisodeSchedule(tau0, growth);
  if (initial_gain.rows() != q() || initial_gain.cols() != p()) {
    throw ShapeError("scenario '" + name + "': initial gain must be q x p");
  }
  if (!is_hurwitz(truth.A + truth.B * initial_gain)) {
    throw ConfigError("scenario '" + name + "': initial gain does not stabilize the truth");
  }
  try {
    solve_care(truth, cost);
  } catch (const SolverError& e) {
    throw ConfigError("scenario '" + name + "': truth is not stabilizable (" + e.what() + ")");
  }
}

std::vector<std::string> builtin_scenario_names() { return {"x29a", "b747", "glucose"}; }

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  if (name == "x29a") {
    s = x29a();
  } else if (name == "b747") {
    s = b747();
  } else if (name == "glucose") {
    s = glucose();
  } else {
    throw ConfigError("unknown scenario '" + name + "' (built-ins: x29a, b747, glucose)");
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& name_or_path) {
  for (const auto& n : builtin_scenario_names()) {
    if (n == name_or_path) return builtin_scenario(n);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw ConfigError("'" + name_or_path + "' is neither a built-in scenario nor a readable file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string kappa_rule_name(KappaRule rule) {
  switch (rule) {
    case KappaRule::kPow1_5:
      return "pow1.5";
    case KappaRule::kPow2:
      return "pow2";
    case KappaRule::kFixed:
      return "fixed";
  }
  return "pow1.5";
}

KappaRule parse_kappa_rule(const std::string& text) {
  if (text == "pow1.5") return KappaRule::kPow1_5;
  if (text == "pow2") return KappaRule::kPow2;
  if (text == "fixed") return KappaRule::kFixed;
  throw ConfigError("unknown kappa rule '" + text + "' (expected pow1.5, pow2 or fixed)");
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["name"] = s.name;
  root["drift"] = {{"A", matrix_to_json(s.truth.A)}, {"B", matrix_to_json(s.truth.B)}};
  root["cost"] = {{"Qx", matrix_to_json(s.cost.Qx)}, {"Qu", matrix_to_json(s.cost.Qu)}};
  root["noise"] = {{"C", matrix_to_json(s.noise.C)}};
  root["sim"] = {{"dt", s.dt}};
  json policy = {{"sigma", s.dither.sigma},
                 {"kappa_rule", kappa_rule_name(s.dither.rule)},
                 {"tau0", s.tau0},
                 {"growth", s.growth},
                 {"initial_gain", matrix_to_json(s.initial_gain)}};
  if (s.dither.rule == KappaRule::kFixed) policy["kappa"] = s.dither.fixed_segments;
  root["policy"] = std::move(policy);
  return root.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  Scenario s;
  s.name = root.value("name", std::string("custom"));
  const json& drift = section(root, "drift");
  s.truth = DriftParams(matrix_from_json(field(drift, "drift", "A"), "drift.A"),
                        matrix_from_json(field(drift, "drift", "B"), "drift.B"));
  const json& cost = section(root, "cost");
  s.cost = CostSpec(matrix_from_json(field(cost, "cost", "Qx"), "cost.Qx"),
                    matrix_from_json(field(cost, "cost", "Qu"), "cost.Qu"));
  s.noise = NoiseSpec(matrix_from_json(field(section(root, "noise"), "noise", "C"), "noise.C"));
  s.dt = number(section(root, "sim"), "sim", "dt");

  const json& policy = section(root, "policy");
  s.dither.sigma = number(policy, "policy", "sigma");
  const json& rule = field(policy, "policy", "kappa_rule");
  if (!rule.is_string()) throw ConfigError("policy.kappa_rule must be a string");
  s.dither.rule = parse_kappa_rule(rule.get<std::string>());
  if (s.dither.rule == KappaRule::kFixed) {
    const double kappa = number(policy, "policy", "kappa");
    if (kappa < 1 || kappa != std::floor(kappa)) {
      throw ConfigError("policy.kappa must be a positive integer");
    }
    s.dither.fixed_segments = static_cast<Index>(kappa);
  }
  s.tau0 = number(policy, "policy", "tau0");
  s.growth = number(policy, "policy", "growth");
  s.initial_gain = matrix_from_json(field(policy, "policy", "initial_gain"), "policy.initial_gain");
  s.validate();
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << scenario_to_json(scenario);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace lqts
