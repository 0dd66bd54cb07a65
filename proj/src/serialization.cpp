#include "povmround/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "povmround/errors.hpp"

namespace povmround {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

// Doubles that JSON cannot represent are written as strings.
Json real_to_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double real_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  return number(j, path);
}

Matrix matrix_from_json(const Json& j, const std::string& path, int dim) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  if (static_cast<int>(j.size()) != dim)
    fail(path, "expected " + std::to_string(dim) + " rows, found " + std::to_string(j.size()));
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      fail(rp, "expected a row of " + std::to_string(dim) + " [re, im] pairs");
    for (int c = 0; c < dim; ++c) {
      const std::string cp = rp + "/" + std::to_string(c);
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2) fail(cp, "expected a [re, im] pair");
      m(r, c) = Complex(number(e[0], cp + "/0"), number(e[1], cp + "/1"));
    }
  }
  return m;
}

AlgebraElement element_from_json(const Json& j, const std::string& path, const BlockAlgebra& alg) {
  if (!j.is_array() || j.size() != alg.num_blocks())
    fail(path, "expected " + std::to_string(alg.num_blocks()) + " blocks");
  std::vector<Matrix> blocks;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k)
    blocks.push_back(matrix_from_json(j[k], path + "/" + std::to_string(k), alg.dim(k)));
  return AlgebraElement(std::move(blocks));
}

std::vector<AlgebraElement> elements_from_json(const Json& j, const std::string& path, const BlockAlgebra& alg) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of elements");
  std::vector<AlgebraElement> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(element_from_json(j[i], path + "/" + std::to_string(i), alg));
  return out;
}

Json orth_summary(const OrthReport& r) {
  Json j;
  j["defect"] = r.defect;
  j["error"] = r.error;
  j["ratio"] = real_to_json(r.ratio);
  j["pvm"] = elements_to_json(r.pvm.elements);
  return j;
}

// Prefixes validator messages with the location of the object.
template <class F>
auto located(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json element_to_json(const AlgebraElement& x) {
  Json j = Json::array();
  for (const Matrix& b : x.blocks()) j.push_back(matrix_to_json(b));
  return j;
}

Json elements_to_json(const std::vector<AlgebraElement>& xs) {
  Json j = Json::array();
  for (const auto& x : xs) j.push_back(element_to_json(x));
  return j;
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["format"] = kInstanceFormat;
  j["version"] = kFormatVersion;
  j["dims"] = inst.alg.dims();
  if (inst.state) j["state"] = {{"densities", element_to_json(inst.state->density())}};
  if (inst.povm) j["povm"] = elements_to_json(inst.povm->elements);
  if (inst.pvm_pair) j["pvm_pair"] = {{"p", elements_to_json(inst.pvm_pair->p.elements)},
                                      {"q", elements_to_json(inst.pvm_pair->q.elements)}};
  if (inst.functionals) j["functionals"] = elements_to_json(inst.functionals->elements);
  Json meta;
  meta["generator"] = inst.metadata.generator;
  meta["rng"] = "mt19937_64/box-muller";
  if (inst.metadata.seed) meta["seed"] = *inst.metadata.seed;
  meta["params"] = Json::object();
  for (const auto& [k, v] : inst.metadata.params) meta["params"][k] = v;
  j["metadata"] = std::move(meta);
  return j;
}

Instance instance_from_json(const Json& j, const Tolerances& tol) {
  const Json& fmt = member(j, "", "format");
  if (!fmt.is_string() || fmt.get<std::string>() != kInstanceFormat)
    fail("/format", std::string("expected \"") + kInstanceFormat + "\"");
  const Json& ver = member(j, "", "version");
  if (!ver.is_number_integer() || ver.get<int>() != kFormatVersion)
    fail("/version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
  const Json& dj = member(j, "", "dims");
  if (!dj.is_array() || dj.empty()) fail("/dims", "expected a nonempty array of block dimensions");
  std::vector<int> dims;
  for (std::size_t k = 0; k < dj.size(); ++k) {
    if (!dj[k].is_number_integer() || dj[k].get<long long>() < 1 || dj[k].get<long long>() > 4096)
      fail("/dims/" + std::to_string(k), "expected a positive integer");
    dims.push_back(dj[k].get<int>());
  }
  Instance inst;
  inst.alg = BlockAlgebra(dims);
  if (auto it = j.find("state"); it != j.end()) {
    AlgebraElement rho = element_from_json(member(*it, "/state", "densities"), "/state/densities", inst.alg);
    inst.state = located("/state", [&] { return State::from_densities(inst.alg, std::move(rho), tol); });
  }
  if (auto it = j.find("povm"); it != j.end()) {
    Povm a{elements_from_json(*it, "/povm", inst.alg)};
    located("/povm", [&] { require_valid_povm(inst.alg, a, tol); });
    inst.povm = std::move(a);
  }
  if (auto it = j.find("pvm_pair"); it != j.end()) {
    PvmPair pair{Pvm{elements_from_json(member(*it, "/pvm_pair", "p"), "/pvm_pair/p", inst.alg)},
                 Pvm{elements_from_json(member(*it, "/pvm_pair", "q"), "/pvm_pair/q", inst.alg)}};
    located("/pvm_pair/p", [&] { require_valid_pvm(inst.alg, pair.p, tol); });
    located("/pvm_pair/q", [&] { require_valid_pvm(inst.alg, pair.q, tol); });
    inst.pvm_pair = std::move(pair);
  }
  if (auto it = j.find("functionals"); it != j.end()) {
    FunctionalFamily f{elements_from_json(*it, "/functionals", inst.alg)};
    located("/functionals", [&] { require_valid_family(inst.alg, f, tol); });
    inst.functionals = std::move(f);
  }
  if (auto it = j.find("metadata"); it != j.end()) {
    if (!it->is_object()) fail("/metadata", "expected an object");
    if (auto g = it->find("generator"); g != it->end() && g->is_string()) inst.metadata.generator = *g;
    if (auto s = it->find("seed"); s != it->end()) {
      if (!s->is_number_unsigned()) fail("/metadata/seed", "expected a nonnegative integer");
      inst.metadata.seed = s->get<std::uint64_t>();
    }
    if (auto p = it->find("params"); p != it->end()) {
      if (!p->is_object()) fail("/metadata/params", "expected an object");
      for (const auto& [k, v] : p->items()) {
        if (!v.is_string()) fail("/metadata/params/" + k, "expected a string");
        inst.metadata.params[k] = v.get<std::string>();
      }
    }
  }
  return inst;
}

std::string digest(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json checks_to_json(const std::vector<Check>& checks) {
  Json out = Json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name},
                   {"measured", real_to_json(c.measured)},
                   {"relation", c.upper ? "<=" : ">="},
                   {"threshold", real_to_json(c.threshold)},
                   {"passed", c.passed}});
  return out;
}

Json tolerances_to_json(const Tolerances& tol) {
  Json j = Json::object();
  for (const auto& [k, v] : tol.entries()) j[k] = v;
  return j;
}

Json to_json(const OrthReport& r) {
  Json j = orth_summary(r);
  const SelectionResult& s = r.selection;
  j["selection"] = {{"value", s.value},
                    {"lp_value", s.lp_value},
                    {"ranks", s.ranks},
                    {"clipped_scores", s.clipped_scores},
                    {"commutator_residual", s.commutator_residual},
                    {"q", elements_to_json(s.q)}};
  const OrthCertificates& c = r.certificates;
  j["certificates"] = {{"idempotency", c.idempotency},
                       {"sum_to_one", c.sum_to_one},
                       {"midpoint", c.midpoint},
                       {"isometry", c.isometry},
                       {"range", c.range},
                       {"polar", c.polar},
                       {"selection_commutator", c.selection_commutator},
                       {"sqrt_clip", c.sqrt_clip},
                       {"term_projection", c.term_projection},
                       {"term_modulus", c.term_modulus},
                       {"term_midpoint", c.term_midpoint},
                       {"sum_squares", c.sum_squares}};
  return j;
}

Json to_json(const SymmetryPreservingReport& r) {
  Json j;
  j["defect"] = r.defect;
  j["error"] = r.error;
  j["ratio"] = real_to_json(r.ratio);
  j["symmetry_residual"] = r.symmetry_residual;
  j["pvm"] = elements_to_json(r.pvm.elements);
  j["generated"] = {{"dims", r.generated.algebra.dims()},
                    {"multiplicities", r.generated.multiplicities},
                    {"commutant_dim", r.generated.commutant_basis.size()},
                    {"residual", r.generated.residual}};
  j["inner"] = to_json(r.inner);
  return j;
}

Json to_json(const RepairReport& r) {
  Json j;
  j["epsilon_c"] = r.epsilon_c;
  j["error"] = r.error;
  j["identity_residual"] = r.identity_residual;
  j["commutator_residual"] = r.commutator_residual;
  j["distance_sq"] = r.compressed.distance_sq;
  j["povm_defect"] = r.compressed.povm_defect;
  j["imaginary_part"] = r.compressed.imaginary_part;
  j["pvm_repaired"] = elements_to_json(r.pvm_repaired.elements);
  j["inner"] = orth_summary(r.inner);
  return j;
}

Json to_json(const UnitaryRepair& r) {
  Json j;
  j["lhs"] = r.lhs;
  j["rhs_error"] = r.rhs_error;
  j["commutator_residual"] = r.commutator_residual;
  j["v_prime"] = element_to_json(r.v_prime);
  j["repair"] = to_json(r.repair);
  return j;
}

Json to_json(const MajorantSolution& s) {
  Json j;
  j["z"] = element_to_json(s.z);
  j["t"] = elements_to_json(s.t);
  j["primal"] = s.primal;
  j["dual"] = s.dual;
  j["gap"] = s.gap;
  j["gap_tol"] = s.gap_tol;
  j["mu_final"] = s.mu_final;
  j["newton_steps"] = s.newton_steps;
  j["stationarity"] = s.stationarity;
  j["residuals"] = {{"feasibility", real_to_json(s.residuals.feasibility)},
                    {"povm_sum", s.residuals.povm_sum},
                    {"slackness", s.residuals.slackness},
                    {"reconstruction", s.residuals.reconstruction}};
  return j;
}

MajorantSolution majorant_solution_from_json(const Json& j, const BlockAlgebra& alg, std::size_t n) {
  std::string base;
  const Json* src = &j;
  if (j.is_object() && j.contains("result")) {
    src = &j["result"];
    base = "/result";
  }
  MajorantSolution s;
  s.z = element_from_json(member(*src, base, "z"), base + "/z", alg);
  s.t = elements_from_json(member(*src, base, "t"), base + "/t", alg);
  if (s.t.size() != n)
    fail(base + "/t", "expected " + std::to_string(n) + " dual elements, found " + std::to_string(s.t.size()));
  if (auto it = src->find("mu_final"); it != src->end()) s.mu_final = real_from_json(*it, base + "/mu_final");
  if (auto it = src->find("gap_tol"); it != src->end()) s.gap_tol = real_from_json(*it, base + "/gap_tol");
  return s;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

}  // namespace povmround
