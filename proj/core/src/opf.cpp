#include "treeqcqp/opf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {

std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::voltage: return "voltage";
    case ObjectiveKind::loss: return "loss";
    case ObjectiveKind::cost: return "cost";
  }
  return "unknown";
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::none: return "none";
    case Pattern::oversatisfaction: return "oversatisfaction";
    case Pattern::example1: return "example1";
    case Pattern::example3: return "example3";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "voltage") return ObjectiveKind::voltage;
  if (s == "loss") return ObjectiveKind::loss;
  if (s == "cost") return ObjectiveKind::cost;
  throw ValidationError("unknown objective kind '" + s + "'");
}

Pattern parse_pattern(const std::string& s) {
  if (s == "none") return Pattern::none;
  if (s == "oversatisfaction") return Pattern::oversatisfaction;
  if (s == "example1") return Pattern::example1;
  if (s == "example3") return Pattern::example3;
  throw ValidationError("unknown pattern '" + s + "'");
}

void PowerNetwork::validate() const {
  const int n = size();
  if (n < 1) throw ValidationError("network has no buses");
  if (gauge_bus < 0 || gauge_bus >= n) throw ValidationError("gauge bus out of range");
  std::set<int> ids;
  for (int k = 0; k < n; ++k) {
    const Bus& b = buses[static_cast<size_t>(k)];
    const std::string where = "bus " + std::to_string(b.id);
    if (!ids.insert(b.id).second) throw ValidationError("duplicate bus id " + std::to_string(b.id));
    if (!std::isfinite(b.p_demand) || !std::isfinite(b.q_demand))
      throw ValidationError(where + ": demand must be finite");
    if (!(b.w_min > 0) || !(b.w_min <= b.w_max) || !std::isfinite(b.w_min))
      throw ValidationError(where + ": voltage bounds must satisfy 0 < min <= max");
    if (std::isnan(b.p_gen_min) || std::isnan(b.p_gen_max) || b.p_gen_min > b.p_gen_max)
      throw ValidationError(where + ": real generation bounds out of order");
    if (std::isnan(b.q_gen_min) || std::isnan(b.q_gen_max) || b.q_gen_min > b.q_gen_max)
      throw ValidationError(where + ": reactive generation bounds out of order");
    if (b.p_gen_min == kInf || b.q_gen_min == kInf || b.p_gen_max == -kInf || b.q_gen_max == -kInf)
      throw ValidationError(where + ": generation bound has the wrong infinite sign");
  }
  std::set<std::pair<int, int>> seen;
  for (size_t l = 0; l < lines.size(); ++l) {
    const Line& ln = lines[l];
    const std::string where = "line " + std::to_string(l + 1);
    if (ln.from < 0 || ln.from >= n || ln.to < 0 || ln.to >= n)
      throw ValidationError(where + ": endpoint out of range");
    if (ln.from == ln.to) throw ValidationError(where + ": self-loop");
    if (!(ln.g > 0) || !(ln.b > 0) || !std::isfinite(ln.g) || !std::isfinite(ln.b))
      throw ValidationError(where + ": conductance and susceptance must be positive");
    if (!(ln.f_max >= 0) || !(ln.l_max >= 0)) throw ValidationError(where + ": limits must be nonnegative");
    const auto key = std::minmax(ln.from, ln.to);
    if (!seen.insert(key).second) throw ValidationError(where + ": duplicate line between the same buses");
  }
  if (static_cast<int>(lines.size()) != n - 1 || !graph().is_connected())
    throw ValidationError("non-radial topology: lines must form a spanning tree");
}

ProblemGraph PowerNetwork::graph() const {
  std::vector<ProblemGraph::Edge> e;
  for (const auto& l : lines) e.emplace_back(l.from, l.to);
  return ProblemGraph(size(), e);
}

int PowerNetwork::line_between(int i, int j) const {
  for (size_t l = 0; l < lines.size(); ++l) {
    const auto& ln = lines[l];
    if ((ln.from == i && ln.to == j) || (ln.from == j && ln.to == i)) return static_cast<int>(l);
  }
  return -1;
}

CMatrix build_admittance(const PowerNetwork& net) {
  const int n = net.size();
  CMatrix y = CMatrix::Zero(n, n);
  std::set<std::pair<int, int>> seen;
  for (int k = 0; k < n; ++k) y(k, k) = net.buses[static_cast<size_t>(k)].shunt;
  for (const auto& l : net.lines) {
    if (!seen.insert(std::minmax(l.from, l.to)).second)
      throw ValidationError("duplicate line between the same buses");
    const Complex yl(l.g, -l.b);
    y(l.from, l.from) += yl;
    y(l.to, l.to) += yl;
    y(l.from, l.to) -= yl;
    y(l.to, l.from) -= yl;
  }
  return y;
}

InjectionMatrices build_injection_matrices(const CMatrix& y, int k) {
  const auto n = y.rows();
  CMatrix yk = CMatrix::Zero(n, n);
  yk.row(k) = y.row(k);
  const CMatrix ykh = yk.adjoint();
  InjectionMatrices out;
  out.phi = HermitianMatrix::from_trusted(0.5 * (ykh + yk));
  out.psi = HermitianMatrix::from_trusted((ykh - yk) / Complex(0.0, 2.0));
  out.j = HermitianMatrix::zeros(n);
  out.j.set(k, k, 1.0);
  return out;
}

InjectionMatrices build_injection_matrices(const PowerNetwork& net, int k) {
  if (k < 0 || k >= net.size()) throw ValidationError("bus index out of range");
  return build_injection_matrices(build_admittance(net), k);
}

FlowMatrices build_flow_matrices(const PowerNetwork& net, int i, int j) {
  const int l = net.line_between(i, j);
  if (l < 0) throw ValidationError("no line between buses " + std::to_string(i + 1) + " and " + std::to_string(j + 1));
  const Line& ln = net.lines[static_cast<size_t>(l)];
  const int n = net.size();
  const Complex off(-ln.g / 2.0, ln.b / 2.0);
  FlowMatrices f{HermitianMatrix::zeros(n), HermitianMatrix::zeros(n), HermitianMatrix::zeros(n)};
  f.m_ij.set(i, i, ln.g);
  f.m_ij.set(i, j, off);
  f.m_ji.set(j, j, ln.g);
  f.m_ji.set(j, i, off);
  f.t = f.m_ij + f.m_ji;
  return f;
}

OpfObjective build_objective(const PowerNetwork& net, const ObjectiveSpec& spec) {
  const int n = net.size();
  OpfObjective o;
  switch (spec.kind) {
    case ObjectiveKind::voltage:
      o.c = HermitianMatrix::identity(n);
      break;
    case ObjectiveKind::loss: {
      const CMatrix y = build_admittance(net);
      o.c = HermitianMatrix::from_trusted(0.5 * (y + y.adjoint()));
      break;
    }
    case ObjectiveKind::cost: {
      if (static_cast<int>(spec.cost.size()) != n)
        throw ValidationError("cost objective needs one coefficient per bus");
      const CMatrix y = build_admittance(net);
      o.c = HermitianMatrix::zeros(n);
      for (int k = 0; k < n; ++k) {
        const double ck = spec.cost[static_cast<size_t>(k)];
        if (!(ck >= 0) || !std::isfinite(ck)) throw ValidationError("cost coefficients must be nonnegative");
        if (ck != 0.0) o.c += ck * build_injection_matrices(y, k).phi;
      }
      break;
    }
  }
  const double lo = min_eigenvalue(o.c);
  const double scale = 1.0 + spectral_norm(o.c);
  o.psd = lo >= -kTauPsd * scale;
  o.definite = lo > kTauPsd * scale;
  if (spec.kind == ObjectiveKind::loss && !o.psd)
    throw ValidationError("loss objective (Y + Y^H)/2 is not positive semidefinite; check shunt conductances");
  return o;
}

QcqpProblem assemble_opf(const PowerNetwork& net, const ObjectiveSpec& spec) {
  net.validate();
  const int n = net.size();
  const CMatrix y = build_admittance(net);
  QcqpProblem p;
  p.n = n;
  p.objective = build_objective(net, spec).c;
  p.constraints.reserve(static_cast<size_t>(6 * n + 3 * (n - 1)));
  auto neg_bound = [](double v) { return v == -kInf ? kInf : -v; };
  for (int k = 0; k < n; ++k) {
    const Bus& b = net.buses[static_cast<size_t>(k)];
    const auto m = build_injection_matrices(y, k);
    const std::string id = std::to_string(b.id);
    const int base = static_cast<int>(p.constraints.size());
    p.constraints.push_back({m.phi, b.p_max(), "P_max[" + id + "]"});
    p.constraints.push_back({-m.phi, neg_bound(b.p_min()), "P_min[" + id + "]"});
    p.constraints.push_back({m.psi, b.q_max(), "Q_max[" + id + "]"});
    p.constraints.push_back({-m.psi, neg_bound(b.q_min()), "Q_min[" + id + "]"});
    p.constraints.push_back({m.j, b.w_max, "W_max[" + id + "]"});
    p.constraints.push_back({-m.j, -b.w_min, "W_min[" + id + "]"});
    p.pairs.emplace_back(base + 1, base);
    p.pairs.emplace_back(base + 3, base + 2);
    p.pairs.emplace_back(base + 5, base + 4);
  }
  for (const auto& l : net.lines) {
    const auto f = build_flow_matrices(net, l.from, l.to);
    const std::string tag = std::to_string(net.buses[static_cast<size_t>(l.from)].id) + "," +
                            std::to_string(net.buses[static_cast<size_t>(l.to)].id);
    p.constraints.push_back({f.m_ij, l.f_max, "F[" + tag + "]"});
    p.constraints.push_back({f.m_ji, l.f_max, "F_rev[" + tag + "]"});
    p.constraints.push_back({f.t, l.l_max, "L[" + tag + "]"});
  }
  p.assert_bounded = true;
  for (const auto& b : net.buses)
    if (!(b.w_max < kInf)) p.assert_bounded = false;
  return p;
}

PowerNetwork apply_pattern(const PowerNetwork& net, Pattern pattern, bool flipped) {
  PowerNetwork out = net;
  switch (pattern) {
    case Pattern::none:
      break;
    case Pattern::oversatisfaction:
      for (auto& b : out.buses) {
        b.p_gen_min = -kInf;
        b.q_gen_min = -kInf;
      }
      break;
    case Pattern::example1: {
      const auto depth = bfs_depth(net.graph(), net.gauge_bus);
      for (size_t k = 0; k < out.buses.size(); ++k) {
        out.buses[k].p_gen_min = -kInf;
        if ((depth[k] % 2 == 1) != flipped) out.buses[k].q_gen_min = -kInf;
      }
      break;
    }
    case Pattern::example3: {
      const auto depth = bfs_depth(net.graph(), net.gauge_bus);
      for (auto& l : out.lines) {
        l.f_max = kInf;
        l.l_max = kInf;
        int i = l.from, j = l.to;
        if (depth[static_cast<size_t>(i)] > depth[static_cast<size_t>(j)]) std::swap(i, j);
        if (flipped) std::swap(i, j);
        Bus& bi = out.buses[static_cast<size_t>(i)];
        Bus& bj = out.buses[static_cast<size_t>(j)];
        bi.p_gen_max = kInf;
        bi.q_gen_min = -kInf;
        bj.q_gen_max = kInf;
      }
      break;
    }
  }
  return out;
}

OpfConditionReport check_opf_condition(const PowerNetwork& net, const ObjectiveSpec& spec) {
  OpfConditionReport rep;
  const QcqpProblem p = assemble_opf(net, spec);
  rep.condition = check_condition1(p);
  for (const auto& l : net.lines) {
    const auto e = std::minmax(l.from, l.to);
    if (!rep.condition.graph.has_edge(e.first, e.second)) rep.missing_line_edges.emplace_back(e.first, e.second);
  }
  if (rep.condition.offending_edges.empty()) return rep;

  struct Variant {
    Pattern pattern;
    QcqpProblem problem;
  };
  std::vector<Variant> variants;
  for (Pattern pat : {Pattern::example1, Pattern::oversatisfaction, Pattern::example3}) {
    variants.push_back({pat, assemble_opf(apply_pattern(net, pat, false), spec)});
    if (pat != Pattern::oversatisfaction)
      variants.push_back({pat, assemble_opf(apply_pattern(net, pat, true), spec)});
  }
  for (const auto& e : rep.condition.offending_edges) {
    EdgeSuggestion s;
    s.edge = e;
    for (const auto& v : variants) {
      if (std::find(s.patterns.begin(), s.patterns.end(), v.pattern) != s.patterns.end()) continue;
      if (!origin_in_relint(edge_points(v.problem, e.first, e.second)).in_relint) s.patterns.push_back(v.pattern);
    }
    rep.suggestions.push_back(std::move(s));
  }
  return rep;
}

PhysicalState recover_physical(const CVector& x, const PowerNetwork& net) {
  const int n = net.size();
  if (x.size() != n) throw ValidationError("voltage vector dimension does not match the network");
  const CMatrix y = build_admittance(net);
  PhysicalState s;
  s.v = x;
  s.vmag = x.cwiseAbs();
  s.angle.resize(n);
  s.w.resize(n);
  s.p.resize(n);
  s.q.resize(n);
  s.p_gen.resize(n);
  s.q_gen.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto m = build_injection_matrices(y, k);
    s.angle(k) = std::arg(x(k));
    s.w(k) = std::norm(x(k));
    s.p(k) = m.phi.quadratic_form(x);
    s.q(k) = m.psi.quadratic_form(x);
    s.p_gen(k) = s.p(k) + net.buses[static_cast<size_t>(k)].p_demand;
    s.q_gen(k) = s.q(k) + net.buses[static_cast<size_t>(k)].q_demand;
  }
  const auto nl = static_cast<Eigen::Index>(net.lines.size());
  s.p_from.resize(nl);
  s.p_to.resize(nl);
  s.loss.resize(nl);
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto& ln = net.lines[static_cast<size_t>(l)];
    const auto f = build_flow_matrices(net, ln.from, ln.to);
    s.p_from(l) = f.m_ij.quadratic_form(x);
    s.p_to(l) = f.m_ji.quadratic_form(x);
    s.loss(l) = f.t.quadratic_form(x);
  }
  return s;
}

OpfSolution solve_opf(const PowerNetwork& net, const ObjectiveSpec& spec, const OpfSolveConfig& cfg) {
  const PowerNetwork work = apply_pattern(net, cfg.pattern, cfg.pattern_flipped);
  OpfSolution sol;
  sol.problem = assemble_opf(work, spec);
  if (cfg.check_condition) sol.condition = check_opf_condition(work, spec);

  RecoveryOptions ropt = cfg.recovery;
  ropt.skip_condition_check = true;
  ropt.gauge = work.gauge_bus;
  ropt.plain_only = !cfg.cascade;
  sol.recovery = solve_exact(sol.problem, ropt);
  if (sol.recovery.stages.empty()) return sol;
  const Stage& plain = sol.recovery.stages.front();
  sol.rank = plain.rank;
  const Spectrum sp = eig_hermitian(plain.solution.w);
  sol.rank_ratio = sp.eigenvalues.size() > 1 && sp.max() > 0 ? std::max(0.0, sp.eigenvalues(1)) / sp.max() : 0.0;
  sol.r_star = sol.recovery.lower_bound;

  std::optional<CVector> x;
  switch (sol.recovery.outcome) {
    case RecoveryOutcome::exact_rank1:
    case RecoveryOutcome::cascade_rank1:
      x = sol.recovery.x_star;
      if (std::abs(sol.r_star) > kTauAbs) sol.eta = sol.recovery.p_hat / sol.r_star - 1.0;
      break;
    case RecoveryOutcome::handed_to_heuristic: {
      const HermitianMatrix& w = sol.recovery.w_for_heuristic;
      const int g = work.gauge_bus;
      const PolarParametrization polar(work.size(), g, std::sqrt(std::max(0.0, w(g, g).real())));
      const CartesianParametrization cart(work.size(), g);
      const Parametrization& param = cfg.free_gauge_magnitude ? static_cast<const Parametrization&>(cart)
                                                               : static_cast<const Parametrization&>(polar);
      HeuristicResult h = restore_feasibility(sol.problem, w, sol.r_star, cfg.heuristic, &param);
      if (h.outcome == HeuristicOutcome::feasible) {
        x = h.x_tilde;
        sol.eta = h.eta;
      }
      sol.heuristic = std::move(h);
      break;
    }
    case RecoveryOutcome::failed:
      break;
  }
  if (x) {
    sol.state = recover_physical(*x, work);
    sol.objective = sol.problem.objective_value(*x);
    sol.feasible = true;
  }
  return sol;
}

}  // namespace treeqcqp
