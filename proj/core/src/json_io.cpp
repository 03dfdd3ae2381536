#include "treeqcqp/json_io.hpp"

#include <cmath>
#include <algorithm>
#include <set>

namespace treeqcqp {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json edge_json(const ProblemGraph::Edge& e, int base) { return json::array({e.first + base, e.second + base}); }

json rvec(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(finite_or_null(v(i)));
  return a;
}

void require_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ProblemParseError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ProblemParseError(ptr + "/" + k, "unknown key");
  }
}

}  // namespace

json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json to_json(const CVector& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(to_json(x(i)));
  return a;
}

json to_json(const HermitianMatrix& h) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < h.dim(); ++j) row.push_back(to_json(h(i, j)));
    rows.push_back(row);
  }
  return rows;
}

namespace {

HermitianMatrix dense_from_json(const json& j, const std::string& ptr) {
  const size_t n = j.size();
  if (n == 0) throw ProblemParseError(ptr, "empty matrix");
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) {
    const std::string pr = ptr + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != n) throw ProblemParseError(pr, "expected a row of length " + std::to_string(n));
    for (size_t c = 0; c < n; ++c) {
      const json& e = j[i][c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ProblemParseError(pr + "/" + std::to_string(c), "expected [re, im]");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (!m.allFinite()) throw ProblemParseError(ptr, "non-finite entry");
  try {
    return HermitianMatrix(m);
  } catch (const ValidationError& e) {
    throw ProblemParseError(ptr, e.what());
  }
}

HermitianMatrix sparse_from_json(const json& j, const std::string& ptr) {
  require_keys(j, ptr, {"dim", "entries"});
  if (!j.contains("dim") || !j.at("dim").is_number_integer() || j.at("dim").get<long>() < 1)
    throw ProblemParseError(ptr + "/dim", "expected a positive integer");
  const auto n = j.at("dim").get<Eigen::Index>();
  HermitianMatrix h(n);
  if (!j.contains("entries") || !j.at("entries").is_array())
    throw ProblemParseError(ptr + "/entries", "expected an array");
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  const json& es = j.at("entries");
  for (size_t k = 0; k < es.size(); ++k) {
    const std::string p = ptr + "/entries/" + std::to_string(k);
    const json& e = es[k];
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number() || !e[3].is_number())
      throw ProblemParseError(p, "expected [i, j, re, im]");
    const auto r = e[0].get<Eigen::Index>();
    const auto c = e[1].get<Eigen::Index>();
    if (r < 0 || c < 0 || r >= n || c >= n) throw ProblemParseError(p, "index out of range");
    if (!seen.insert(std::minmax(r, c)).second) throw ProblemParseError(p, "duplicate entry");
    const double re = e[2].get<double>();
    const double im = e[3].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) throw ProblemParseError(p, "non-finite value");
    if (r == c && im != 0.0) throw ProblemParseError(p, "diagonal entries must be real");
    h.set(r, c, Complex(re, im));
  }
  return h;
}

}  // namespace

HermitianMatrix hermitian_from_json(const json& j, const std::string& ptr) {
  if (j.is_array()) return dense_from_json(j, ptr);
  if (j.is_object()) return sparse_from_json(j, ptr);
  throw ProblemParseError(ptr.empty() ? "/" : ptr, "expected rows of [re, im] pairs or {dim, entries}");
}

json to_json(const QcqpProblem& p) {
  json cs = json::array();
  for (const auto& c : p.constraints) {
    json jc = {{"matrix", to_json(c.matrix)}, {"upper", finite_or_null(c.upper)}};
    if (!c.label.empty()) jc["label"] = c.label;
    cs.push_back(jc);
  }
  json pairs = json::array();
  for (const auto& [lo, hi] : p.pairs) pairs.push_back({lo, hi});
  return {{"version", kSchemaVersion}, {"n", p.n},           {"objective", to_json(p.objective)},
          {"constraints", cs},         {"pairs", pairs},     {"assert_bounded", p.assert_bounded}};
}

QcqpProblem problem_from_json(const json& j) {
  require_keys(j, "", {"version", "n", "objective", "constraints", "pairs", "assert_bounded"});
  if (j.contains("version") && (!j.at("version").is_number_integer() || j.at("version").get<int>() != kSchemaVersion))
    throw ProblemParseError("/version", "unsupported version");
  QcqpProblem p;
  if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<int>() < 1)
    throw ProblemParseError("/n", "expected a positive integer");
  p.n = j.at("n").get<int>();
  if (!j.contains("objective")) throw ProblemParseError("/objective", "missing");
  p.objective = hermitian_from_json(j.at("objective"), "/objective");
  if (p.objective.dim() != p.n) throw ProblemParseError("/objective", "dimension does not match n");
  if (!j.contains("constraints") || !j.at("constraints").is_array())
    throw ProblemParseError("/constraints", "expected an array");
  const json& cs = j.at("constraints");
  for (size_t k = 0; k < cs.size(); ++k) {
    const std::string ptr = "/constraints/" + std::to_string(k);
    require_keys(cs[k], ptr, {"matrix", "upper", "label"});
    Constraint c;
    if (!cs[k].contains("matrix")) throw ProblemParseError(ptr + "/matrix", "missing");
    c.matrix = hermitian_from_json(cs[k].at("matrix"), ptr + "/matrix");
    if (c.matrix.dim() != p.n) throw ProblemParseError(ptr + "/matrix", "dimension does not match n");
    if (!cs[k].contains("upper")) throw ProblemParseError(ptr + "/upper", "missing (use null for a removed row)");
    const json& u = cs[k].at("upper");
    if (u.is_null()) c.upper = kInf;
    else if (u.is_number()) c.upper = u.get<double>();
    else throw ProblemParseError(ptr + "/upper", "expected a number or null");
    if (cs[k].contains("label")) {
      if (!cs[k].at("label").is_string()) throw ProblemParseError(ptr + "/label", "expected a string");
      c.label = cs[k].at("label").get<std::string>();
    }
    p.constraints.push_back(std::move(c));
  }
  if (j.contains("pairs")) {
    const json& ps = j.at("pairs");
    if (!ps.is_array()) throw ProblemParseError("/pairs", "expected an array");
    for (size_t k = 0; k < ps.size(); ++k) {
      const json& e = ps[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw ProblemParseError("/pairs/" + std::to_string(k), "expected [lower_row, upper_row]");
      p.pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  if (j.contains("assert_bounded")) {
    if (!j.at("assert_bounded").is_boolean()) throw ProblemParseError("/assert_bounded", "expected a boolean");
    p.assert_bounded = j.at("assert_bounded").get<bool>();
  }
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ProblemParseError("", e.what());
  }
  return p;
}

json to_json(const ConditionReport& r, int base) {
  json edges = json::array();
  for (const auto& e : r.per_edge) {
    json pts = json::array();
    for (const Complex& z : e.points) pts.push_back(to_json(z));
    edges.push_back({{"edge", edge_json(e.edge, base)},
                     {"points", pts},
                     {"in_relint", e.relint.in_relint},
                     {"on_boundary", e.relint.on_boundary},
                     {"t_star", finite_or_null(e.relint.t_star)}});
  }
  json off = json::array();
  for (const auto& e : r.offending_edges) off.push_back(edge_json(e, base));
  json graph = json::array();
  for (const auto& e : r.graph.edges()) graph.push_back(edge_json(e, base));
  return {{"version", kSchemaVersion}, {"pass", r.pass},  {"is_tree", r.is_tree},       {"bounded_hint", r.bounded_hint},
          {"graph_edges", graph},      {"edges", edges},  {"offending_edges", off}};
}

json to_json(const OpfConditionReport& r) {
  json j = to_json(r.condition, 1);
  json sug = json::array();
  for (const auto& s : r.suggestions) {
    json pats = json::array();
    for (Pattern p : s.patterns) pats.push_back(to_string(p));
    sug.push_back({{"edge", edge_json(s.edge, 1)}, {"patterns", pats}});
  }
  json missing = json::array();
  for (const auto& e : r.missing_line_edges) missing.push_back(edge_json(e, 1));
  j["suggestions"] = sug;
  j["missing_line_edges"] = missing;
  return j;
}

json to_json(const SdpSolution& s) {
  return {{"status", to_string(s.status)},
          {"iterations", s.iterations},
          {"r_star", finite_or_null(s.r_star)},
          {"d_star", finite_or_null(s.d_star)},
          {"primal_feas", finite_or_null(s.residuals.primal_feas)},
          {"dual_feas", finite_or_null(s.residuals.dual_feas)},
          {"gap", finite_or_null(s.residuals.gap)},
          {"lambda", rvec(s.lambda)}};
}

json to_json(const RecoveryReport& r) {
  json stages = json::array();
  for (const auto& st : r.stages) {
    stages.push_back({{"kind", to_string(st.kind)},
                      {"parameter", st.parameter},
                      {"rank", st.rank},
                      {"objective_c", finite_or_null(st.objective_c)},
                      {"slack_sum", finite_or_null(st.slack_sum)},
                      {"solution", to_json(st.solution)}});
  }
  return {{"version", kSchemaVersion},
          {"outcome", to_string(r.outcome)},
          {"x_star", r.x_star ? to_json(*r.x_star) : json(nullptr)},
          {"p_hat", finite_or_null(r.p_hat)},
          {"lower_bound", finite_or_null(r.lower_bound)},
          {"zeta", r.zeta},
          {"achieved_gap", finite_or_null(r.achieved_gap)},
          {"condition_checked", r.condition_checked},
          {"condition_pass", r.condition_pass},
          {"removed_constraints_excluded", r.removed_constraints_excluded},
          {"polished", r.polished},
          {"failed_stage", r.failed_stage.empty() ? json(nullptr) : json(r.failed_stage)},
          {"stages", stages}};
}

json to_json(const HeuristicResult& h) {
  return {{"outcome", h.outcome == HeuristicOutcome::feasible ? "feasible" : "exhausted"},
          {"iterations", h.iterations},
          {"eta", opt(h.eta)},
          {"objective", finite_or_null(h.objective)},
          {"violation_trace", h.violation_trace},
          {"inner_warning", h.inner_warning},
          {"x_tilde", h.x_tilde ? to_json(*h.x_tilde) : json(nullptr)}};
}

json to_json(const PhysicalState& s, const PowerNetwork& net) {
  const double to_kw = 1e3 * net.base.power_mw;
  json buses = json::array();
  for (int k = 0; k < net.size(); ++k) {
    buses.push_back({{"id", net.buses[static_cast<size_t>(k)].id},
                     {"v", to_json(s.v(k))},
                     {"v_mag_pu", s.vmag(k)},
                     {"angle_rad", s.angle(k)},
                     {"p_kW", s.p(k) * to_kw},
                     {"q_kVAr", s.q(k) * to_kw},
                     {"p_gen_kW", s.p_gen(k) * to_kw},
                     {"q_gen_kVAr", s.q_gen(k) * to_kw}});
  }
  json lines = json::array();
  for (size_t l = 0; l < net.lines.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(l);
    lines.push_back({{"from", net.buses[static_cast<size_t>(net.lines[l].from)].id},
                     {"to", net.buses[static_cast<size_t>(net.lines[l].to)].id},
                     {"p_from_kW", s.p_from(i) * to_kw},
                     {"p_to_kW", s.p_to(i) * to_kw},
                     {"loss_kW", s.loss(i) * to_kw}});
  }
  return {{"buses", buses}, {"lines", lines}};
}

json to_json(const OpfSolution& s, const PowerNetwork& net) {
  json j = {{"version", kSchemaVersion},
            {"feasible", s.feasible},
            {"rank", s.rank},
            {"rank_ratio", s.rank_ratio},
            {"r_star", finite_or_null(s.r_star)},
            {"objective", opt(s.objective)},
            {"eta", opt(s.eta)},
            {"recovery", to_json(s.recovery)},
            {"heuristic", s.heuristic ? to_json(*s.heuristic) : json(nullptr)},
            {"condition", s.condition ? to_json(*s.condition) : json(nullptr)},
            {"state", s.state ? to_json(*s.state, net) : json(nullptr)}};
  return j;
}

json error_json(const std::string& message, const std::string& stage) {
  return {{"error", message}, {"stage", stage}};
}

}  // namespace treeqcqp
