#pragma once

#include <string>

#include <json.hpp>

#include "treeqcqp/errors.hpp"
#include "treeqcqp/heuristic.hpp"
#include "treeqcqp/opf.hpp"
#include "treeqcqp/qcqp.hpp"
#include "treeqcqp/recovery.hpp"

namespace treeqcqp {

inline constexpr int kSchemaVersion = 1;

/// Problem document failure; pointer locates the offending value.
class ProblemParseError : public ValidationError {
 public:
  ProblemParseError(const std::string& pointer, const std::string& message)
      : ValidationError(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

nlohmann::json to_json(Complex z);
nlohmann::json to_json(const CVector& x);
/// Dense rows of [re, im] pairs.
nlohmann::json to_json(const HermitianMatrix& h);
/// Accepts dense rows of [re, im] pairs, or {"dim": n, "entries": [[i, j, re, im], ...]}
/// with zero-based indices where each entry also sets its mirror.
HermitianMatrix hermitian_from_json(const nlohmann::json& j, const std::string& pointer = "");

nlohmann::json to_json(const QcqpProblem& p);
QcqpProblem problem_from_json(const nlohmann::json& j);

/// Vertices are reported as index + base (1 for bus ids).
nlohmann::json to_json(const ConditionReport& r, int base = 0);
nlohmann::json to_json(const OpfConditionReport& r);
nlohmann::json to_json(const SdpSolution& s);
nlohmann::json to_json(const RecoveryReport& r);
nlohmann::json to_json(const HeuristicResult& h);
nlohmann::json to_json(const PhysicalState& s, const PowerNetwork& net);
nlohmann::json to_json(const OpfSolution& s, const PowerNetwork& net);

nlohmann::json error_json(const std::string& message, const std::string& stage);

}  // namespace treeqcqp
