#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "treeqcqp/errors.hpp"
#include "treeqcqp/opf.hpp"

namespace treeqcqp {

/// Parse failure with the JSON pointer of the offending value.
class CaseParseError : public ValidationError {
 public:
  CaseParseError(const std::string& pointer, const std::string& message)
      : ValidationError(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct CaseData {
  PowerNetwork network;
  std::optional<ObjectiveSpec> objective;
};

/// Strict reader for the case format: unknown keys are rejected, powers are
/// converted to per unit, impedances to admittances.
CaseData parse_case(const nlohmann::json& doc);
CaseData parse_case_text(const std::string& text);

nlohmann::json emit_case(const PowerNetwork& net, const std::optional<ObjectiveSpec>& objective = std::nullopt);

enum class TreeModel { attachment, pruefer };

struct RandomCircuitParams {
  int n = 50;
  /// Share of buses 2..n with PV; drawn from [0.15, 0.60] when absent.
  std::optional<double> pv_fraction;
  std::uint64_t seed = 1;
  TreeModel tree = TreeModel::attachment;
};

PowerNetwork gen_random_radial(const RandomCircuitParams& params);

}  // namespace treeqcqp
