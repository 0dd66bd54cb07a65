#include "povmround/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "povmround/commute_repair.hpp"
#include "povmround/errors.hpp"
#include "povmround/majorant.hpp"
#include "povmround/orthogonalizer.hpp"

namespace povmround {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string> kCommands{"orthogonalize", "orthogonalize-sym", "repair", "fourier",
                                         "majorant",      "verify",            "gen",    "sweep"};

struct Options {
  std::string command;
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> tol;
  std::string csv;
  std::string kind;
  std::vector<std::string> params;
  std::string solution;
  int count = 100;
  int jobs = 1;
};

ParamMap parse_params(const std::vector<std::string>& list) {
  ParamMap out;
  for (const auto& item : list) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("--param " + item + ": expected key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

Tolerances resolve_tolerances(const Options& o) {
  Tolerances tol;
  if (const char* env = std::getenv("POVMROUND_TOL_OVERRIDES"); env && *env) {
    try {
      tol.apply_overrides(env);
    } catch (const Error& e) {
      throw ParseError(std::string("POVMROUND_TOL_OVERRIDES: ") + e.what());
    }
  }
  for (const auto& t : o.tol) {
    try {
      tol.apply_overrides(t);
    } catch (const Error& e) {
      throw ParseError("--tol " + t + ": " + e.what());
    }
  }
  tol.validate();
  return tol;
}

struct Loaded {
  Instance inst;
  std::string digest;
};

Loaded load_instance(const std::string& path, const Tolerances& tol) {
  if (path.empty()) throw ParseError("--in is required");
  const Json j = read_json_file(path);
  try {
    return Loaded{instance_from_json(j, tol), digest(j)};
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

template <class T>
const T& need(const std::optional<T>& v, const char* what, const std::string& path) {
  if (!v) throw PreconditionError(path + ": instance has no " + what);
  return *v;
}

// Fixed-point text for the one-line summaries.
std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Json base_report(const Options& o, const Tolerances& tol, const Loaded* l) {
  Json r;
  r["format"] = kReportFormat;
  r["version"] = kFormatVersion;
  r["command"] = o.command;
  r["tolerances"] = tolerances_to_json(tol);
  if (l) {
    r["input"] = o.in;
    r["input_digest"] = l->digest;
    r["generator"] = l->inst.metadata.generator;
    r["seed"] = l->inst.metadata.seed ? Json(*l->inst.metadata.seed) : Json(nullptr);
  }
  return r;
}

void finish_checks(Json& report, const std::vector<Check>& checks) {
  report["checks"] = checks_to_json(checks);
  report["passed"] = all_passed(checks);
}

std::string describe_failure(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed)
      return "bound violated: " + c.name + " (measured " + num(c.measured) + (c.upper ? " > " : " < ") +
             num(c.threshold) + ")";
  return {};
}

Json run_single(const Options& o, const Tolerances& tol, std::vector<Check>& checks, std::string& summary) {
  const Loaded l = load_instance(o.in, tol);
  const Instance& inst = l.inst;
  Json report = base_report(o, tol, &l);
  const BlockAlgebra& alg = inst.alg;

  if (o.command == "orthogonalize") {
    const OrthReport r = orthogonalize(alg, need(inst.state, "state", o.in), need(inst.povm, "povm", o.in), tol);
    checks = certify(alg, r, tol);
    report["result"] = to_json(r);
    summary = "defect " + num(r.defect) + " error " + num(r.error) + " ratio " + num(r.ratio);
  } else if (o.command == "orthogonalize-sym") {
    const SymmetryPreservingReport r =
        orthogonalize_symmetry_preserving(alg, need(inst.state, "state", o.in), need(inst.povm, "povm", o.in), tol);
    checks = certify(alg, r, tol);
    report["result"] = to_json(r);
    summary = "defect " + num(r.defect) + " error " + num(r.error) + " symmetry residual " + num(r.symmetry_residual);
  } else if (o.command == "repair") {
    const PvmPair& pair = need(inst.pvm_pair, "pvm_pair", o.in);
    const RepairReport r = repair(alg, need(inst.state, "state", o.in), pair.p, pair.q, tol);
    checks = certify(alg, r, tol);
    report["result"] = to_json(r);
    summary = "epsilon_c " + num(r.epsilon_c) + " error " + num(r.error);
  } else if (o.command == "fourier") {
    const PvmPair& pair = need(inst.pvm_pair, "pvm_pair", o.in);
    const int n = static_cast<int>(pair.q.size());
    const int m = static_cast<int>(pair.p.size());
    const AlgebraElement u = pvm_to_unitary(alg, pair.q, tol);
    const AlgebraElement v = pvm_to_unitary(alg, pair.p, tol);
    double roundtrip = 0.0;
    const Pvm back = unitary_to_pvm(alg, v, m, tol);
    for (std::size_t i = 0; i < pair.p.size(); ++i)
      roundtrip = std::max(roundtrip, frobenius_norm(back[i] - pair.p[i]));
    const UnitaryRepair r = repair_unitary_pair(alg, need(inst.state, "state", o.in), u, n, v, m, tol);
    checks = certify(r, tol);
    checks.push_back(Check::at_most("fourier_roundtrip", roundtrip, tol.cert_tol));
    report["result"] = to_json(r);
    report["result"]["roundtrip"] = roundtrip;
    summary = "lhs " + num(r.lhs) + " rhs " + num(r.rhs_error);
  } else if (o.command == "majorant") {
    const FunctionalFamily& f = need(inst.functionals, "functionals", o.in);
    const MajorantSolution s = minimal_majorant(alg, f, tol);
    checks = verify_majorant_certificate(alg, f, s, tol);
    report["result"] = to_json(s);
    summary = "primal " + num(s.primal) + " dual " + num(s.dual) + " gap " + num(s.gap);
  } else if (o.command == "verify") {
    const FunctionalFamily& f = need(inst.functionals, "functionals", o.in);
    if (o.solution.empty()) throw ParseError("verify: --solution is required");
    const Json sj = read_json_file(o.solution);
    MajorantSolution s;
    try {
      s = majorant_solution_from_json(sj, alg, f.size());
    } catch (const ParseError& e) {
      throw ParseError(o.solution + ": " + e.what());
    }
    recompute(alg, f, s);
    checks = verify_majorant_certificate(alg, f, s, tol);
    report["solution"] = o.solution;
    report["solution_digest"] = digest(sj);
    report["result"] = {{"primal", s.primal}, {"dual", s.dual}, {"gap", s.gap}};
    summary = "primal " + num(s.primal) + " dual " + num(s.dual) + " gap " + num(s.gap);
  }
  return report;
}

Json run_sweep_command(const Options& o, const Tolerances& tol, std::vector<Check>& checks, std::string& summary) {
  const ParamMap params = parse_params(o.params);
  SweepRanges r;
  const std::map<std::string, int*> ints{{"max_blocks", &r.max_blocks},
                                         {"max_block_dim", &r.max_block_dim},
                                         {"max_total_dim", &r.max_total_dim},
                                         {"min_outputs", &r.min_outputs},
                                         {"max_outputs", &r.max_outputs}};
  for (const auto& [k, v] : params) {
    try {
      if (auto it = ints.find(k); it != ints.end()) {
        *it->second = std::stoi(v);
      } else if (k == "max_delta") {
        r.max_delta = std::stod(v);
      } else {
        throw ParseError("--param " + k + ": unknown sweep parameter");
      }
    } catch (const std::logic_error&) {
      throw ParseError("--param " + k + "=" + v + ": expected a number");
    }
  }
  if (r.max_blocks < 1 || r.max_block_dim < 1 || r.max_total_dim < 1 || r.max_total_dim > 16 ||
      r.min_outputs < 1 || r.max_outputs < r.min_outputs || r.max_delta < 0.0 || r.max_delta > 0.5)
    throw ParseError("--param: sweep ranges out of bounds");
  if (o.count < 1) throw ParseError("--count must be positive");
  if (o.jobs < 1) throw ParseError("--jobs must be positive");

  const std::vector<SweepRow> rows = run_sweep(o.seed, o.count, r, tol, o.jobs);
  Json report = base_report(o, tol, nullptr);
  report["seed"] = o.seed;
  report["count"] = o.count;
  report["ranges"] = {{"max_blocks", r.max_blocks},   {"max_block_dim", r.max_block_dim},
                      {"max_total_dim", r.max_total_dim}, {"min_outputs", r.min_outputs},
                      {"max_outputs", r.max_outputs}, {"max_delta", r.max_delta}};
  Json table = Json::array();
  // Worst instance per check name, by signed margin.
  std::map<std::string, std::pair<Check, std::uint64_t>> worst;
  std::vector<std::string> order;
  double max_ratio = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (const auto& row : rows) {
    Json jr = {{"seed", row.seed},     {"dims", row.dims},   {"n", row.n},
               {"state", row.state},   {"defect", row.defect}, {"error", row.error},
               {"bound_9eps_margin", row.bound_9eps_margin}, {"runtime_ms", row.runtime_ms},
               {"passed", row.failure.empty() && all_passed(row.checks)}};
    jr["ratio"] = std::isfinite(row.ratio) ? Json(row.ratio) : Json("inf");
    if (!row.failure.empty()) jr["failure"] = row.failure;
    if (!row.failure.empty() || !all_passed(row.checks)) ++failures;
    table.push_back(std::move(jr));
    max_ratio = std::max(max_ratio, row.ratio);
    min_margin = std::min(min_margin, row.bound_9eps_margin);
    for (const auto& c : row.checks) {
      const double margin = c.upper ? c.threshold - c.measured : c.measured - c.threshold;
      auto it = worst.find(c.name);
      if (it == worst.end()) {
        order.push_back(c.name);
        worst.emplace(c.name, std::make_pair(c, row.seed));
      } else {
        const Check& w = it->second.first;
        const double wm = w.upper ? w.threshold - w.measured : w.measured - w.threshold;
        if (margin < wm || (std::isnan(margin) && !std::isnan(wm))) it->second = {c, row.seed};
      }
    }
  }
  report["instances"] = std::move(table);
  report["aggregate"] = {{"count", rows.size()},
                         {"failures", failures},
                         {"max_ratio", std::isfinite(max_ratio) ? Json(max_ratio) : Json("inf")},
                         {"min_bound_9eps_margin", min_margin}};
  for (const auto& name : order) {
    Check c = worst.at(name).first;
    c.name = name + "@seed=" + std::to_string(worst.at(name).second);
    checks.push_back(std::move(c));
  }
  for (const auto& row : rows)
    if (!row.failure.empty())
      checks.push_back(Check::at_most("instance_error@seed=" + std::to_string(row.seed), 1.0, 0.0));
  if (!o.csv.empty()) write_text_file(o.csv, sweep_csv(rows));
  summary = std::to_string(rows.size()) + " instances, " + std::to_string(failures) + " failing, max ratio " +
            num(max_ratio) + ", min 9-defect margin " + num(min_margin);
  return report;
}

int dispatch(const Options& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const Tolerances tol = resolve_tolerances(o);

  if (o.command == "gen") {
    if (o.kind.empty()) throw ParseError("gen: --kind is required");
    const Instance inst = gen_instance(o.kind, o.seed, parse_params(o.params));
    const Json j = instance_to_json(inst);
    const std::string text = j.dump(1) + "\n";
    const std::string d = digest(j);
    if (o.out.empty()) {
      out << text;
    } else {
      write_text_file(o.out, text);
      out << "gen " << o.kind << " seed " << o.seed << " digest " << d << "\n";
    }
    return kExitPass;
  }

  std::vector<Check> checks;
  std::string summary;
  Json report = o.command == "sweep" ? run_sweep_command(o, tol, checks, summary) : run_single(o, tol, checks, summary);
  finish_checks(report, checks);
  report["duration_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  const bool ok = all_passed(checks);
  if (o.out.empty()) {
    out << report.dump(1) << "\n";
  } else {
    write_text_file(o.out, report.dump(1) + "\n");
    out << o.command << ": " << (ok ? "PASS" : "FAIL") << " " << summary << "\n";
  }
  if (!ok) {
    err << "povmround: " << describe_failure(checks) << "\n";
    return kExitBoundViolation;
  }
  return kExitPass;
}

}  // namespace

std::vector<SweepRow> run_sweep(std::uint64_t base_seed, int count, const SweepRanges& ranges, const Tolerances& tol,
                                int jobs) {
  std::vector<SweepRow> rows(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      row.seed = base_seed + i;
      const auto t0 = Clock::now();
      try {
        const Instance inst = sweep_instance(row.seed, ranges);
        row.dims = inst.alg.dims();
        row.n = static_cast<int>(inst.povm->size());
        row.state = inst.metadata.params.at("state");
        const OrthReport r = orthogonalize(inst.alg, *inst.state, *inst.povm, tol);
        row.defect = r.defect;
        row.error = r.error;
        row.ratio = r.ratio;
        row.bound_9eps_margin = 9.0 * r.defect + tol.cert_tol - r.error;
        row.checks = certify(inst.alg, r, tol);
      } catch (const std::exception& e) {
        row.failure = e.what();
      }
      row.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }
  };
  const int threads = std::clamp(jobs, 1, 64);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,dims,n,defect,error,ratio,bound_9eps_margin,runtime_ms\n";
  for (const auto& r : rows) {
    std::string dims;
    for (std::size_t k = 0; k < r.dims.size(); ++k) dims += (k ? ";" : "") + std::to_string(r.dims[k]);
    os << r.seed << "," << dims << "," << r.n << "," << r.defect << "," << r.error << "," << r.ratio << ","
       << r.bound_9eps_margin << "," << r.runtime_ms << "\n";
  }
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Rounding of almost-orthogonal POVMs, repair of almost-commuting PVMs, minimal majorants"};
  app.name("povmround");
  app.add_option("command", o.command, "Command to run")->required()->check(CLI::IsMember(kCommands));
  app.add_option("--in", o.in, "Instance file");
  app.add_option("--out", o.out, "Report (or generated instance) file");
  app.add_option("--seed", o.seed, "Generator seed, or first seed of a sweep");
  app.add_option("--tol", o.tol, "Tolerance overrides key=val[,key=val]");
  app.add_option("--csv", o.csv, "Sweep table as CSV");
  app.add_option("--kind", o.kind, "Generator kind")->check(CLI::IsMember(generator_kinds()));
  app.add_option("--param", o.params, "Generator or sweep parameter key=val");
  app.add_option("--solution", o.solution, "Majorant solution or report to verify");
  app.add_option("--count", o.count, "Number of sweep instances");
  app.add_option("--jobs", o.jobs, "Sweep worker threads");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "povmround: usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    return dispatch(o, out, err);
  } catch (const ParseError& e) {
    err << "povmround: parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "povmround: invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructuralError& e) {
    err << "povmround: invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "povmround: precondition failed: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SolverError& e) {
    err << "povmround: solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const NumericalDegeneracyError& e) {
    err << "povmround: numerical degeneracy: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "povmround: error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace povmround
