#pragma once

// Versioned JSON instance and report files.
//
// Complex matrices are arrays of rows, each row an array of [re, im] pairs.
// Doubles are written as shortest round-trip decimals, so load(save(x))
// reproduces every entry exactly.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "povmround/algebra.hpp"
#include "povmround/checks.hpp"
#include "povmround/commute_repair.hpp"
#include "povmround/majorant.hpp"
#include "povmround/orthogonalizer.hpp"

namespace povmround {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kInstanceFormat = "povmround-instance";
inline constexpr const char* kReportFormat = "povmround-report";

struct InstanceMetadata {
  std::optional<std::uint64_t> seed;
  std::string generator;
  std::map<std::string, std::string> params;
};

struct PvmPair {
  Pvm p;  // the PVM to repair
  Pvm q;  // the reference PVM
};

struct Instance {
  BlockAlgebra alg{std::vector<int>{1}};
  std::optional<State> state;
  std::optional<Povm> povm;
  std::optional<PvmPair> pvm_pair;
  std::optional<FunctionalFamily> functionals;
  InstanceMetadata metadata;
};

Json matrix_to_json(const Matrix& m);
Json element_to_json(const AlgebraElement& x);
Json elements_to_json(const std::vector<AlgebraElement>& xs);

Json instance_to_json(const Instance& inst);

/// Throws ParseError naming the JSON path of the offending value, and
/// ValidationError / PreconditionError when an object fails its validator.
Instance instance_from_json(const Json& j, const Tolerances& tol);

/// "fnv1a64:<16 hex digits>" of the compact dump of j.
std::string digest(const Json& j);

Json checks_to_json(const std::vector<Check>& checks);
Json tolerances_to_json(const Tolerances& tol);

Json to_json(const OrthReport& r);
Json to_json(const SymmetryPreservingReport& r);
Json to_json(const RepairReport& r);
Json to_json(const UnitaryRepair& r);
Json to_json(const MajorantSolution& s);

/// Accepts a bare solution object or a report whose "result" holds one.
MajorantSolution majorant_solution_from_json(const Json& j, const BlockAlgebra& alg, std::size_t n);

/// Reads and parses a file; ParseError carries the file name and position.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace povmround
