#include "treeqcqp/case_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace treeqcqp {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw CaseParseError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
      throw CaseParseError(ptr + "/" + k, "unknown key");
  }
}

double number(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) throw CaseParseError(ptr + "/" + key, "missing required number");
  const json& v = obj.at(key);
  if (!v.is_number()) throw CaseParseError(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) throw CaseParseError(ptr + "/" + key, "expected a number or null");
  return v.get<double>();
}

// [min, max] with null meaning unbounded on that side.
std::pair<double, double> interval(const json& obj, const std::string& ptr, const char* key, bool required) {
  if (!obj.contains(key)) {
    if (required) throw CaseParseError(ptr + "/" + key, "missing required interval");
    return {0.0, 0.0};
  }
  const json& v = obj.at(key);
  const std::string p = ptr + "/" + key;
  if (!v.is_array() || v.size() != 2) throw CaseParseError(p, "expected [min, max]");
  double lo = -kInf, hi = kInf;
  if (!v[0].is_null()) {
    if (!v[0].is_number()) throw CaseParseError(p + "/0", "expected a number or null");
    lo = v[0].get<double>();
  }
  if (!v[1].is_null()) {
    if (!v[1].is_number()) throw CaseParseError(p + "/1", "expected a number or null");
    hi = v[1].get<double>();
  }
  if (lo > hi) throw CaseParseError(p, "min exceeds max");
  return {lo, hi};
}

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

CaseData parse_case(const json& doc) {
  check_keys(doc, "", {"base", "buses", "lines", "objective", "gauge_bus", "version"});
  CaseData out;
  PowerNetwork& net = out.network;

  if (doc.contains("base")) {
    const json& b = doc.at("base");
    check_keys(b, "/base", {"power_MW", "voltage_kV_LL"});
    net.base.power_mw = number(b, "/base", "power_MW");
    net.base.voltage_kv_ll = number(b, "/base", "voltage_kV_LL");
    if (!(net.base.power_mw > 0)) throw CaseParseError("/base/power_MW", "must be positive");
    if (!(net.base.voltage_kv_ll > 0)) throw CaseParseError("/base/voltage_kV_LL", "must be positive");
  }
  const double kw = 1e-3 / net.base.power_mw;
  const double zbase = net.base.impedance_ohm();

  if (!doc.contains("buses") || !doc.at("buses").is_array() || doc.at("buses").empty())
    throw CaseParseError("/buses", "expected a nonempty array");
  const json& buses = doc.at("buses");
  const int n = static_cast<int>(buses.size());
  std::vector<int> slot(static_cast<size_t>(n), -1);
  net.buses.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const std::string ptr = "/buses/" + std::to_string(k);
    const json& jb = buses[static_cast<size_t>(k)];
    check_keys(jb, ptr,
               {"id", "p_demand_kW", "q_demand_kVAr", "p_gen", "q_gen", "v_bounds_pu", "shunt_pu", "power_factor"});
    if (!jb.contains("id") || !jb.at("id").is_number_integer()) throw CaseParseError(ptr + "/id", "expected an integer");
    const int id = jb.at("id").get<int>();
    if (id < 1 || id > n) throw CaseParseError(ptr + "/id", "ids must be 1..n");
    if (slot[static_cast<size_t>(id - 1)] >= 0) throw CaseParseError(ptr + "/id", "duplicate id");
    slot[static_cast<size_t>(id - 1)] = k;
    Bus b;
    b.id = id;
    b.p_demand = number(jb, ptr, "p_demand_kW") * kw;
    b.q_demand = number(jb, ptr, "q_demand_kVAr") * kw;
    const auto pg = interval(jb, ptr, "p_gen", false);
    const auto qg = interval(jb, ptr, "q_gen", false);
    b.p_gen_min = pg.first * kw;
    b.p_gen_max = pg.second * kw;
    b.q_gen_min = qg.first * kw;
    b.q_gen_max = qg.second * kw;
    const auto vb = interval(jb, ptr, "v_bounds_pu", true);
    if (!(vb.first > 0) || !std::isfinite(vb.first)) throw CaseParseError(ptr + "/v_bounds_pu/0", "must be positive");
    b.w_min = vb.first * vb.first;
    b.w_max = vb.second * vb.second;
    if (jb.contains("shunt_pu")) {
      const json& s = jb.at("shunt_pu");
      if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
        throw CaseParseError(ptr + "/shunt_pu", "expected [re, im] of the shunt admittance");
      b.shunt = Complex(s[0].get<double>(), s[1].get<double>());
    }
    b.power_factor = opt_number(jb, ptr, "power_factor");
    net.buses[static_cast<size_t>(id - 1)] = b;
  }

  if (!doc.contains("lines") || !doc.at("lines").is_array()) throw CaseParseError("/lines", "expected an array");
  const json& lines = doc.at("lines");
  std::set<std::pair<int, int>> seen;
  for (size_t l = 0; l < lines.size(); ++l) {
    const std::string ptr = "/lines/" + std::to_string(l);
    const json& jl = lines[l];
    if (jl.is_object() && jl.contains("s_max_MVA"))
      throw CaseParseError(ptr + "/s_max_MVA", "apparent-power line limits are not supported by this model");
    check_keys(jl, ptr,
               {"from", "to", "r_ohm_per_km", "x_ohm_per_km", "length_km", "g_pu", "b_pu", "f_max_MW", "l_max_MW"});
    Line ln;
    for (const char* key : {"from", "to"}) {
      if (!jl.contains(key) || !jl.at(key).is_number_integer())
        throw CaseParseError(ptr + "/" + key, "expected a bus id");
      const int id = jl.at(key).get<int>();
      if (id < 1 || id > n) throw CaseParseError(ptr + "/" + key, "unknown bus id");
      (std::string(key) == "from" ? ln.from : ln.to) = id - 1;
    }
    if (ln.from == ln.to) throw CaseParseError(ptr, "line connects a bus to itself");
    if (!seen.insert(std::minmax(ln.from, ln.to)).second) throw CaseParseError(ptr, "duplicate line (non-radial)");
    const bool phys = jl.contains("r_ohm_per_km") || jl.contains("x_ohm_per_km") || jl.contains("length_km");
    const bool admit = jl.contains("g_pu") || jl.contains("b_pu");
    if (phys == admit) throw CaseParseError(ptr, "give either r/x/length or g_pu/b_pu");
    if (phys) {
      const double r = number(jl, ptr, "r_ohm_per_km");
      const double x = number(jl, ptr, "x_ohm_per_km");
      const double len = number(jl, ptr, "length_km");
      if (!(len > 0)) throw CaseParseError(ptr + "/length_km", "must be positive");
      const Complex y = 1.0 / (Complex(r, x) * len / zbase);
      ln.g = y.real();
      ln.b = -y.imag();
    } else {
      ln.g = number(jl, ptr, "g_pu");
      ln.b = number(jl, ptr, "b_pu");
    }
    if (!(ln.g > 0)) throw CaseParseError(ptr, "conductance must be positive");
    if (!(ln.b > 0)) throw CaseParseError(ptr, "susceptance must be positive");
    const auto f = opt_number(jl, ptr, "f_max_MW");
    const auto lm = opt_number(jl, ptr, "l_max_MW");
    ln.f_max = f ? *f / net.base.power_mw : kInf;
    ln.l_max = lm ? *lm / net.base.power_mw : kInf;
    net.lines.push_back(ln);
  }
  if (static_cast<int>(net.lines.size()) != n - 1 || !net.graph().is_connected())
    throw CaseParseError("/lines", "non-radial topology: lines must form a spanning tree");

  if (doc.contains("gauge_bus")) {
    const json& g = doc.at("gauge_bus");
    if (!g.is_number_integer() || g.get<int>() < 1 || g.get<int>() > n)
      throw CaseParseError("/gauge_bus", "expected a bus id");
    net.gauge_bus = g.get<int>() - 1;
  }

  if (doc.contains("objective")) {
    const json& o = doc.at("objective");
    check_keys(o, "/objective", {"kind", "cost"});
    if (!o.contains("kind") || !o.at("kind").is_string()) throw CaseParseError("/objective/kind", "expected a string");
    ObjectiveSpec spec;
    try {
      spec.kind = parse_objective_kind(o.at("kind").get<std::string>());
    } catch (const ValidationError& e) {
      throw CaseParseError("/objective/kind", e.what());
    }
    if (o.contains("cost")) {
      const json& c = o.at("cost");
      if (!c.is_array() || static_cast<int>(c.size()) != n)
        throw CaseParseError("/objective/cost", "expected one coefficient per bus");
      for (size_t k = 0; k < c.size(); ++k) {
        if (!c[k].is_number() || c[k].get<double>() < 0)
          throw CaseParseError("/objective/cost/" + std::to_string(k), "expected a nonnegative number");
        spec.cost.push_back(c[k].get<double>());
      }
    } else if (spec.kind == ObjectiveKind::cost) {
      throw CaseParseError("/objective/cost", "cost objective needs coefficients");
    }
    out.objective = spec;
  }

  try {
    net.validate();
  } catch (const ValidationError& e) {
    throw CaseParseError("", e.what());
  }
  return out;
}

CaseData parse_case_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseParseError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_case(doc);
}

json emit_case(const PowerNetwork& net, const std::optional<ObjectiveSpec>& objective) {
  const double to_kw = 1e3 * net.base.power_mw;
  json doc;
  doc["version"] = 1;
  doc["base"] = {{"power_MW", net.base.power_mw}, {"voltage_kV_LL", net.base.voltage_kv_ll}};
  doc["gauge_bus"] = net.buses[static_cast<size_t>(net.gauge_bus)].id;
  json buses = json::array();
  for (const auto& b : net.buses) {
    json jb;
    jb["id"] = b.id;
    jb["p_demand_kW"] = b.p_demand * to_kw;
    jb["q_demand_kVAr"] = b.q_demand * to_kw;
    jb["p_gen"] = {bound(b.p_gen_min * to_kw), bound(b.p_gen_max * to_kw)};
    jb["q_gen"] = {bound(b.q_gen_min * to_kw), bound(b.q_gen_max * to_kw)};
    jb["v_bounds_pu"] = {std::sqrt(b.w_min), bound(std::sqrt(b.w_max))};
    if (b.shunt != Complex(0.0)) jb["shunt_pu"] = {b.shunt.real(), b.shunt.imag()};
    if (b.power_factor) jb["power_factor"] = *b.power_factor;
    buses.push_back(jb);
  }
  doc["buses"] = buses;
  json lines = json::array();
  for (const auto& l : net.lines) {
    json jl;
    jl["from"] = net.buses[static_cast<size_t>(l.from)].id;
    jl["to"] = net.buses[static_cast<size_t>(l.to)].id;
    jl["g_pu"] = l.g;
    jl["b_pu"] = l.b;
    if (std::isfinite(l.f_max)) jl["f_max_MW"] = l.f_max * net.base.power_mw;
    if (std::isfinite(l.l_max)) jl["l_max_MW"] = l.l_max * net.base.power_mw;
    lines.push_back(jl);
  }
  doc["lines"] = lines;
  if (objective) {
    json o;
    o["kind"] = to_string(objective->kind);
    if (!objective->cost.empty()) o["cost"] = objective->cost;
    doc["objective"] = o;
  }
  return doc;
}

PowerNetwork gen_random_radial(const RandomCircuitParams& params) {
  if (params.n < 2) throw ValidationError("random circuits need at least 2 buses");
  if (params.pv_fraction && (*params.pv_fraction < 0.15 || *params.pv_fraction > 0.60))
    throw ValidationError("pv fraction must lie in [0.15, 0.60]");
  std::mt19937_64 rng(params.seed);
  auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const int n = params.n;
  PowerNetwork net;
  net.base = PowerBase{1.0, 12.47};
  const double kw = 1e-3 / net.base.power_mw;
  const double zbase = net.base.impedance_ohm();

  std::vector<std::pair<int, int>> edges;
  if (params.tree == TreeModel::attachment || n == 2) {
    for (int k = 1; k < n; ++k)
      edges.emplace_back(std::uniform_int_distribution<int>(0, k - 1)(rng), k);
  } else {
    std::vector<int> seq(static_cast<size_t>(n - 2));
    for (auto& s : seq) s = std::uniform_int_distribution<int>(0, n - 1)(rng);
    std::vector<int> degree(static_cast<size_t>(n), 1);
    for (int s : seq) ++degree[static_cast<size_t>(s)];
    for (int s : seq) {
      for (int v = 0; v < n; ++v) {
        if (degree[static_cast<size_t>(v)] == 1) {
          edges.emplace_back(std::min(v, s), std::max(v, s));
          --degree[static_cast<size_t>(v)];
          --degree[static_cast<size_t>(s)];
          break;
        }
      }
    }
    int a = -1;
    for (int v = 0; v < n; ++v) {
      if (degree[static_cast<size_t>(v)] == 1) {
        if (a < 0) a = v;
        else edges.emplace_back(a, v);
      }
    }
  }
  for (const auto& [i, j] : edges) {
    const double len = uni(0.2, 0.3);
    const Complex y = 1.0 / (Complex(0.33, 0.38) * len / zbase);
    net.lines.push_back({i, j, y.real(), -y.imag(), kInf, kInf});
  }

  net.buses.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    Bus& b = net.buses[static_cast<size_t>(k)];
    b.id = k + 1;
    b.w_min = 0.95 * 0.95;
    b.w_max = 1.05 * 1.05;
    if (k == 0) continue;
    b.p_demand = uni(0.0, 4.5) * kw;
    b.q_demand = uni(0.2, 0.3) * b.p_demand;
  }
  const double frac = params.pv_fraction ? *params.pv_fraction : uni(0.15, 0.60);
  std::vector<int> order(static_cast<size_t>(n - 1));
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  const auto pv = static_cast<size_t>(std::lround(frac * (n - 1)));
  for (size_t s = 0; s < pv && s < order.size(); ++s) {
    Bus& b = net.buses[static_cast<size_t>(order[s])];
    b.p_gen_max = uni(0.0, 2.0) * kw;
    b.q_gen_max = 0.3 * b.p_gen_max;
    b.q_gen_min = -0.3 * b.p_gen_max;
  }
  Bus& sub = net.buses[0];
  sub.p_gen_max = 5.0 * n * kw;
  sub.q_gen_max = 0.3 * sub.p_gen_max;
  sub.q_gen_min = -0.3 * sub.p_gen_max;
  net.gauge_bus = 0;
  net.validate();
  return net;
}

}  // namespace treeqcqp
