#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "treeqcqp/case_io.hpp"
#include "treeqcqp/json_io.hpp"

using namespace treeqcqp;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 1, kCheckFail = 2, kFallback = 3, kFailed = 4 };

struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw StageError("read", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw StageError("parse", std::string("invalid JSON: ") + e.what());
  }
}

CaseData load_case(const std::string& path) {
  const json doc = parse_json(read_input(path));
  try {
    return parse_case(doc);
  } catch (const CaseParseError& e) {
    throw StageError("parse", e.what());
  }
}

double parse_gamma(const std::string& s) {
  if (s == "inf" || s == "+inf") return kInf;
  try {
    size_t used = 0;
    const double g = std::stod(s, &used);
    if (used != s.size() || !(g > 0)) throw std::invalid_argument(s);
    return g;
  } catch (const std::exception&) {
    throw StageError("args", "--gamma expects a positive number or inf");
  }
}

ObjectiveSpec objective_for(const CaseData& c, const std::string& flag) {
  ObjectiveSpec spec = c.objective.value_or(ObjectiveSpec{});
  if (!flag.empty()) {
    const ObjectiveKind k = parse_objective_kind(flag);
    if (k == ObjectiveKind::cost && spec.cost.empty())
      throw StageError("args", "cost objective needs coefficients in the case file");
    spec.kind = k;
  }
  return spec;
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw StageError("write", "cannot open " + out);
  f << j.dump(2) << "\n";
}

int exit_for(RecoveryOutcome o, bool heuristic_ok) {
  switch (o) {
    case RecoveryOutcome::exact_rank1:
    case RecoveryOutcome::cascade_rank1:
      return kOk;
    case RecoveryOutcome::handed_to_heuristic:
      return heuristic_ok ? kFallback : kFailed;
    case RecoveryOutcome::failed:
      break;
  }
  return kFailed;
}

struct BenchRow {
  int seed = 0;
  int rank = 0;
  int iterations = 0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double r_star = 0.0;
  double p_hat = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured QCQP solver with an OPF frontend"};
  app.require_subcommand(1);

  std::string input, objective, pattern = "none", gamma = "inf", out;
  std::optional<double> zeta;
  bool skip_check = false, no_cascade = false, flipped = false;

  auto* check = app.add_subcommand("check", "Check the tree condition on an OPF case");
  check->add_option("case", input, "Case JSON ('-' for stdin)")->required();
  check->add_option("--objective", objective)->check(CLI::IsMember({"voltage", "loss", "cost"}));
  check->add_option("--pattern", pattern)->check(CLI::IsMember({"none", "oversatisfaction", "example1", "example3"}));
  check->add_flag("--flipped", flipped, "Use the alternate orientation of example1/example3");

  auto* sq = app.add_subcommand("solve-qcqp", "Solve a QCQP given as problem JSON");
  sq->add_option("problem", input, "Problem JSON ('-' for stdin)")->required();
  sq->add_option("--zeta", zeta)->check(CLI::PositiveNumber);
  sq->add_flag("--skip-condition-check", skip_check);
  sq->add_option("--gamma", gamma);

  auto* so = app.add_subcommand("solve-opf", "Solve an OPF case");
  so->add_option("case", input, "Case JSON ('-' for stdin)")->required();
  so->add_option("--objective", objective)->check(CLI::IsMember({"voltage", "loss", "cost"}));
  so->add_option("--pattern", pattern)->check(CLI::IsMember({"none", "oversatisfaction", "example1", "example3"}));
  so->add_flag("--flipped", flipped);
  so->add_option("--gamma", gamma);
  so->add_option("--zeta", zeta)->check(CLI::PositiveNumber);
  so->add_flag("--no-cascade", no_cascade, "Hand a higher-rank relaxation straight to the heuristic");

  int n = 50;
  std::uint64_t seed = 1;
  std::optional<double> pv;
  std::string tree = "attachment";
  auto* gen = app.add_subcommand("gen-case", "Generate a random radial circuit");
  gen->add_option("--n", n)->check(CLI::Range(2, 100000));
  gen->add_option("--seed", seed)->required();
  gen->add_option("--pv-fraction", pv)->check(CLI::Range(0.15, 0.60));
  gen->add_option("--tree", tree)->check(CLI::IsMember({"attachment", "pruefer"}));
  gen->add_option("--objective", objective)->check(CLI::IsMember({"voltage", "loss"}));
  gen->add_option("-o,--output", out, "Output file ('-' for stdout)");

  int seeds = 20, threads = 1;
  bool cascade = false;
  auto* bench = app.add_subcommand("bench", "Solve a seeded ensemble and print CSV");
  bench->add_option("--n", n)->check(CLI::Range(2, 100000));
  bench->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
  bench->add_option("--objective", objective)->required()->check(CLI::IsMember({"voltage", "loss"}));
  bench->add_option("--gamma", gamma);
  bench->add_option("--pv-fraction", pv)->check(CLI::Range(0.15, 0.60));
  bench->add_option("--tree", tree)->check(CLI::IsMember({"attachment", "pruefer"}));
  bench->add_option("--threads", threads)->check(CLI::Range(1, 256));
  bench->add_flag("--cascade", cascade, "Run the perturbation cascade before the heuristic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json(e.what(), "args").dump() << "\n";
    return kInput;
  }

  std::string stage = "setup";
  try {
    if (check->parsed()) {
      const CaseData c = load_case(input);
      stage = "check";
      const ObjectiveSpec spec = objective_for(c, objective);
      const PowerNetwork net = apply_pattern(c.network, parse_pattern(pattern), flipped);
      const OpfConditionReport rep = check_opf_condition(net, spec);
      emit(to_json(rep), "");
      return rep.condition.pass ? kOk : kCheckFail;
    }

    if (sq->parsed()) {
      stage = "parse";
      QcqpProblem p;
      try {
        p = problem_from_json(parse_json(read_input(input)));
      } catch (const ProblemParseError& e) {
        throw StageError("parse", e.what());
      }
      stage = "solve";
      RecoveryOptions ro;
      ro.zeta = zeta;
      ro.skip_condition_check = skip_check;
      const RecoveryReport rep = solve_exact(p, ro);
      json j = to_json(rep);
      bool heuristic_ok = false;
      if (rep.outcome == RecoveryOutcome::handed_to_heuristic) {
        stage = "heuristic";
        HeuristicConfig hc;
        hc.gamma = parse_gamma(gamma);
        const HeuristicResult h = restore_feasibility(p, rep.w_for_heuristic, rep.lower_bound, hc);
        heuristic_ok = h.outcome == HeuristicOutcome::feasible;
        j["heuristic"] = to_json(h);
      } else {
        j["heuristic"] = nullptr;
      }
      emit(j, "");
      return exit_for(rep.outcome, heuristic_ok);
    }

    if (so->parsed()) {
      const CaseData c = load_case(input);
      stage = "solve";
      OpfSolveConfig cfg;
      cfg.pattern = parse_pattern(pattern);
      cfg.pattern_flipped = flipped;
      cfg.recovery.zeta = zeta;
      cfg.heuristic.gamma = parse_gamma(gamma);
      cfg.cascade = !no_cascade;
      const OpfSolution sol = solve_opf(c.network, objective_for(c, objective), cfg);
      emit(to_json(sol, apply_pattern(c.network, cfg.pattern, flipped)), "");
      return exit_for(sol.recovery.outcome, sol.feasible);
    }

    if (gen->parsed()) {
      stage = "generate";
      RandomCircuitParams rp;
      rp.n = n;
      rp.seed = seed;
      rp.pv_fraction = pv;
      rp.tree = tree == "pruefer" ? TreeModel::pruefer : TreeModel::attachment;
      std::optional<ObjectiveSpec> spec;
      if (!objective.empty()) spec = ObjectiveSpec{parse_objective_kind(objective), {}};
      emit(emit_case(gen_random_radial(rp), spec), out);
      return kOk;
    }

    if (bench->parsed()) {
      stage = "bench";
      const ObjectiveSpec spec{parse_objective_kind(objective), {}};
      OpfSolveConfig cfg;
      cfg.cascade = cascade;
      cfg.check_condition = false;
      cfg.heuristic.gamma = parse_gamma(gamma);
      std::vector<BenchRow> rows(static_cast<size_t>(seeds));
      std::vector<std::string> errors(static_cast<size_t>(seeds));
      std::atomic<int> next{0};
      auto worker = [&] {
        for (int k = next++; k < seeds; k = next++) {
          BenchRow& row = rows[static_cast<size_t>(k)];
          row.seed = k + 1;
          try {
            RandomCircuitParams rp;
            rp.n = n;
            rp.seed = static_cast<std::uint64_t>(row.seed);
            rp.pv_fraction = pv;
            rp.tree = tree == "pruefer" ? TreeModel::pruefer : TreeModel::attachment;
            const PowerNetwork net = gen_random_radial(rp);
            const auto t0 = std::chrono::steady_clock::now();
            const OpfSolution sol = solve_opf(net, spec, cfg);
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            row.rank = sol.rank;
            row.iterations = sol.heuristic ? sol.heuristic->iterations : 0;
            row.eta = sol.eta.value_or(std::numeric_limits<double>::quiet_NaN());
            row.r_star = sol.r_star;
            if (sol.objective) row.p_hat = *sol.objective;
          } catch (const std::exception& e) {
            errors[static_cast<size_t>(k)] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < std::min(threads, seeds); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (size_t k = 0; k < errors.size(); ++k)
        if (!errors[k].empty()) throw StageError("bench", "seed " + std::to_string(k + 1) + ": " + errors[k]);
      std::cout << "seed,rank,iterations,eta,r_star,p_hat,wall_ms\n";
      for (const auto& r : rows) {
        std::cout << r.seed << ',' << r.rank << ',' << r.iterations << ',' << csv_number(r.eta) << ','
                  << csv_number(r.r_star) << ',' << csv_number(r.p_hat) << ',' << csv_number(r.wall_ms) << "\n";
      }
      return kOk;
    }
  } catch (const StageError& e) {
    std::cerr << error_json(e.what(), e.stage).dump() << "\n";
    return e.stage == "solve" || e.stage == "heuristic" || e.stage == "bench" ? kFailed : kInput;
  } catch (const ValidationError& e) {
    std::cerr << error_json(e.what(), stage).dump() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << error_json(e.what(), stage).dump() << "\n";
    return kFailed;
  }
  return kInput;
}
