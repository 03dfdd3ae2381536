#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treeqcqp/heuristic.hpp"
#include "treeqcqp/qcqp.hpp"
#include "treeqcqp/recovery.hpp"

namespace treeqcqp {

/// Per-unit bus data. Generation bounds may be infinite.
struct Bus {
  int id = 1;
  double p_demand = 0.0;
  double q_demand = 0.0;
  double p_gen_min = 0.0;
  double p_gen_max = 0.0;
  double q_gen_min = 0.0;
  double q_gen_max = 0.0;
  double w_min = 0.95 * 0.95;
  double w_max = 1.05 * 1.05;
  Complex shunt{0.0, 0.0};
  std::optional<double> power_factor;

  double p_min() const { return p_gen_min - p_demand; }
  double p_max() const { return p_gen_max - p_demand; }
  double q_min() const { return q_gen_min - q_demand; }
  double q_max() const { return q_gen_max - q_demand; }
};

/// Line between bus indices from and to (0-based), admittance g - i b.
struct Line {
  int from = 0;
  int to = 1;
  double g = 1.0;
  double b = 1.0;
  double f_max = kInf;
  double l_max = kInf;
};

struct PowerBase {
  double power_mw = 1.0;
  double voltage_kv_ll = 12.47;

  double impedance_ohm() const { return voltage_kv_ll * voltage_kv_ll / power_mw; }
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  PowerBase base;
  int gauge_bus = 0;

  int size() const { return static_cast<int>(buses.size()); }
  /// Throws ValidationError when bounds, admittances or topology are invalid.
  void validate() const;
  ProblemGraph graph() const;
  /// Index of the line joining i and j, or -1.
  int line_between(int i, int j) const;
};

enum class ObjectiveKind { voltage, loss, cost };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::loss;
  std::vector<double> cost;
};

enum class Pattern { none, oversatisfaction, example1, example3 };

std::string to_string(ObjectiveKind k);
std::string to_string(Pattern p);
ObjectiveKind parse_objective_kind(const std::string& s);
Pattern parse_pattern(const std::string& s);

CMatrix build_admittance(const PowerNetwork& net);

struct InjectionMatrices {
  HermitianMatrix phi;
  HermitianMatrix psi;
  HermitianMatrix j;
};

InjectionMatrices build_injection_matrices(const PowerNetwork& net, int k);
InjectionMatrices build_injection_matrices(const CMatrix& y, int k);

struct FlowMatrices {
  HermitianMatrix m_ij;
  HermitianMatrix m_ji;
  HermitianMatrix t;
};

FlowMatrices build_flow_matrices(const PowerNetwork& net, int i, int j);

struct OpfObjective {
  HermitianMatrix c;
  bool psd = false;
  bool definite = false;
};

OpfObjective build_objective(const PowerNetwork& net, const ObjectiveSpec& spec);

/// Per bus: (Phi, Pmax), (-Phi, -Pmin), (Psi, Qmax), (-Psi, -Qmin),
/// (J, Wmax), (-J, -Wmin); per line: (M_ij, Fmax), (M_ji, Fmax), (T, Lmax).
QcqpProblem assemble_opf(const PowerNetwork& net, const ObjectiveSpec& spec);

/// Row index of the first bus row and the first line row in assemble_opf.
inline int bus_row(int k, int which) { return 6 * k + which; }
inline int line_row(int n, int l, int which) { return 6 * n + 3 * l + which; }

/// Copy of net with the bounds of a named pattern removed. flipped swaps
/// the roles of the two ends of every line.
PowerNetwork apply_pattern(const PowerNetwork& net, Pattern pattern, bool flipped = false);

struct EdgeSuggestion {
  ProblemGraph::Edge edge;
  std::vector<Pattern> patterns;
};

struct OpfConditionReport {
  ConditionReport condition;
  std::vector<EdgeSuggestion> suggestions;
  /// Lines whose edge is absent from the problem graph.
  std::vector<ProblemGraph::Edge> missing_line_edges;
};

OpfConditionReport check_opf_condition(const PowerNetwork& net, const ObjectiveSpec& spec);

struct PhysicalState {
  CVector v;
  RVector vmag;
  RVector angle;
  RVector w;
  RVector p;
  RVector q;
  RVector p_gen;
  RVector q_gen;
  /// Per line, in network order.
  RVector p_from;
  RVector p_to;
  RVector loss;
};

PhysicalState recover_physical(const CVector& x, const PowerNetwork& net);

struct OpfSolveConfig {
  Pattern pattern = Pattern::none;
  bool pattern_flipped = false;
  RecoveryOptions recovery;
  HeuristicConfig heuristic;
  bool check_condition = true;
  /// Run the perturbation cascade when the relaxation is not rank one;
  /// otherwise go straight to the heuristic.
  bool cascade = true;
  /// Let the heuristic move the gauge magnitude too.
  bool free_gauge_magnitude = false;
};

struct OpfSolution {
  QcqpProblem problem;
  std::optional<OpfConditionReport> condition;
  RecoveryReport recovery;
  std::optional<HeuristicResult> heuristic;
  std::optional<PhysicalState> state;
  std::optional<double> eta;
  std::optional<double> objective;
  double r_star = 0.0;
  int rank = 0;
  double rank_ratio = 0.0;
  bool feasible = false;
};

OpfSolution solve_opf(const PowerNetwork& net, const ObjectiveSpec& spec, const OpfSolveConfig& cfg = {});

}  // namespace treeqcqp
