#include "povmround/generators.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "povmround/errors.hpp"

namespace povmround {

namespace {

class Params {
 public:
  Params(std::string kind, const ParamMap& given, std::set<std::string> allowed)
      : kind_(std::move(kind)), given_(given), allowed_(std::move(allowed)) {
    for (const auto& [k, v] : given_)
      if (!allowed_.count(k)) throw PreconditionError(kind_ + ": unknown parameter \"" + k + "\"");
  }

  double real(const std::string& key, double def) {
    double v = def;
    if (auto it = given_.find(key); it != given_.end()) {
      std::size_t used = 0;
      try {
        v = std::stod(it->second, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != it->second.size() || !std::isfinite(v)) bad(key, "expected a number");
    }
    record(key, Json(v).dump());
    return v;
  }

  int integer(const std::string& key, int def) {
    const double v = real(key, def);
    if (v != std::floor(v) || std::abs(v) > 1e6) bad(key, "expected an integer");
    record(key, std::to_string(static_cast<int>(v)));
    return static_cast<int>(v);
  }

  std::string text(const std::string& key, const std::string& def, const std::set<std::string>& choices) {
    std::string v = def;
    if (auto it = given_.find(key); it != given_.end()) v = it->second;
    if (!choices.count(v)) bad(key, "unsupported value \"" + v + "\"");
    record(key, v);
    return v;
  }

  std::vector<int> dims(const std::string& def) {
    std::string s = def;
    if (auto it = given_.find("dims"); it != given_.end()) s = it->second;
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    int total = 0;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      int d = 0;
      try {
        d = std::stoi(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || d < 1) bad("dims", "expected a comma-separated list of positive integers");
      out.push_back(d);
      total += d;
    }
    if (out.empty()) bad("dims", "expected at least one block");
    if (total > 16) bad("dims", "total dimension exceeds 16");
    std::string canon;
    for (std::size_t k = 0; k < out.size(); ++k) canon += (k ? "," : "") + std::to_string(out[k]);
    record("dims", canon);
    return out;
  }

  void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) bad(key, what);
  }

  const ParamMap& effective() const { return effective_; }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw PreconditionError(kind_ + ": parameter " + key + ": " + what);
  }
  void record(const std::string& key, const std::string& v) { effective_[key] = v; }

  std::string kind_;
  const ParamMap& given_;
  std::set<std::string> allowed_;
  ParamMap effective_;
};

const std::set<std::string> kStateKinds{"trace", "random", "rank1"};

Matrix unitary_exp(const Matrix& h, double eta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (Eigen::Index j = 0; j < h.rows(); ++j) phases[j] = std::polar(1.0, eta * es.eigenvalues()[j]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Givens rotations by theta on the coordinate pairs (0,1), (2,3), ...
Matrix givens(int d, double theta) {
  Matrix r = Matrix::Identity(d, d);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (int j = 0; j + 1 < d; j += 2) {
    r(j, j) = c;
    r(j, j + 1) = -s;
    r(j + 1, j) = s;
    r(j + 1, j + 1) = c;
  }
  return r;
}

Pvm pvm_from_pattern(const BlockAlgebra& alg, const std::vector<Matrix>& bases,
                     const std::vector<std::vector<int>>& pattern, int n) {
  Pvm p;
  for (int i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
      const int d = alg.dim(k);
      Vector ind = Vector::Zero(d);
      for (int j = 0; j < d; ++j)
        if (pattern[k][static_cast<std::size_t>(j)] == i) ind[j] = 1.0;
      blocks.push_back(bases[k] * ind.asDiagonal() * bases[k].adjoint());
    }
    p.elements.push_back(AlgebraElement(std::move(blocks)).hermitian_part());
  }
  return p;
}

}  // namespace

const std::vector<std::string>& generator_kinds() {
  static const std::vector<std::string> kinds{"random_povm_near_pvm", "random_state",       "paper_counterexample",
                                              "linfty2_family",       "rotated_pvm_pair",   "random_functionals"};
  return kinds;
}

State random_state(Rng& rng, const BlockAlgebra& alg) {
  std::vector<Matrix> blocks;
  double total = 0.0;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    const Matrix g = rng.gaussian(alg.dim(k), alg.dim(k));
    Matrix r = g * g.adjoint();
    total += r.trace().real();
    blocks.push_back(std::move(r));
  }
  for (auto& b : blocks) b /= total;
  return State::from_densities(alg, AlgebraElement(std::move(blocks)).hermitian_part());
}

State random_vector_state(Rng& rng, const BlockAlgebra& alg) {
  std::vector<Vector> xi;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) xi.push_back(rng.gaussian(alg.dim(k), 1).col(0));
  return State::vector_state(alg, xi);
}

State make_state(Rng& rng, const BlockAlgebra& alg, const std::string& kind) {
  if (kind == "trace") return State::normalized_trace(alg);
  if (kind == "random") return random_state(rng, alg);
  if (kind == "rank1") return random_vector_state(rng, alg);
  throw PreconditionError("unknown state kind \"" + kind + "\"");
}

Pvm random_pvm(Rng& rng, const BlockAlgebra& alg, int n) {
  std::vector<Matrix> bases;
  std::vector<std::vector<int>> pattern;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    bases.push_back(rng.haar_unitary(alg.dim(k)));
    std::vector<int> pat;
    for (int j = 0; j < alg.dim(k); ++j) pat.push_back(rng.integer(0, n - 1));
    pattern.push_back(std::move(pat));
  }
  return pvm_from_pattern(alg, bases, pattern, n);
}

Povm random_povm_near_pvm(Rng& rng, const BlockAlgebra& alg, int n, double delta) {
  const Pvm p = random_pvm(rng, alg, n);
  std::vector<AlgebraElement> b;
  double gamma = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<Matrix> h;
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) h.push_back(rng.hermitian_unit(alg.dim(k)));
    AlgebraElement bi = p[static_cast<std::size_t>(i)] + delta * AlgebraElement(std::move(h));
    gamma = std::max(gamma, -min_eigenvalue(bi));
    b.push_back(std::move(bi));
  }
  AlgebraElement s = AlgebraElement::zero(alg);
  for (auto& bi : b) {
    bi += AlgebraElement::scalar(alg, gamma);
    s += bi;
  }
  if (!(min_eigenvalue(s) > 0.0)) throw PreconditionError("random_povm_near_pvm: perturbation too large");
  const AlgebraElement w = apply_spectral(s, [](double x) { return 1.0 / std::sqrt(x); });
  Povm a;
  for (const auto& bi : b) a.elements.push_back((w * bi * w).hermitian_part());
  return a;
}

Povm counterexample_povm(double delta) {
  const double r3 = std::sqrt(3.0);
  const double s = 1.0 / (1.0 + 6.0 * delta);
  Matrix a1(2, 2), a2(2, 2), a3(2, 2);
  a1 << 1.0 + 4.0 * delta, 0.0, 0.0, 0.0;
  a2 << delta, r3 * delta, r3 * delta, 1.0 + 3.0 * delta;
  a3 << delta, -r3 * delta, -r3 * delta, 3.0 * delta;
  Povm a;
  for (const Matrix* m : {&a1, &a2, &a3}) a.elements.push_back(AlgebraElement({s * *m}));
  return a;
}

AlgebraElement tensor_identity(const AlgebraElement& x, int m) {
  std::vector<Matrix> blocks;
  for (const Matrix& b : x.blocks()) {
    const Eigen::Index d = b.rows();
    Matrix t = Matrix::Zero(d * m, d * m);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        for (int j = 0; j < m; ++j) t(r * m + j, c * m + j) = b(r, c);
    blocks.push_back(std::move(t));
  }
  return AlgebraElement(std::move(blocks));
}

Instance gen_instance(const std::string& kind, std::uint64_t seed, const ParamMap& given) {
  Rng rng(seed);
  Instance inst;
  inst.metadata.seed = seed;
  inst.metadata.generator = kind;
  const Tolerances tol;

  if (kind == "random_povm_near_pvm") {
    Params p(kind, given, {"dims", "n", "delta", "state", "copies"});
    const auto dims = p.dims("2,3");
    const int n = p.integer("n", 3);
    const double delta = p.real("delta", 0.05);
    const std::string state = p.text("state", "random", kStateKinds);
    const int copies = p.integer("copies", 1);
    p.require(n >= 1 && n <= 64, "n", "expected 1 <= n <= 64");
    p.require(delta >= 0.0 && delta <= 0.5, "delta", "expected 0 <= delta <= 0.5");
    int total = 0;
    for (int d : dims) total += d * copies;
    p.require(copies >= 1 && total <= 16, "copies", "expected copies >= 1 with total dimension <= 16");
    const BlockAlgebra base(dims);
    Povm a = random_povm_near_pvm(rng, base, n, delta);
    if (copies > 1) {
      for (auto& ai : a.elements) ai = tensor_identity(ai, copies);
      std::vector<int> big;
      for (int d : dims) big.push_back(d * copies);
      inst.alg = BlockAlgebra(big);
    } else {
      inst.alg = base;
    }
    inst.state = make_state(rng, inst.alg, state);
    inst.povm = std::move(a);
    inst.metadata.params = p.effective();
  } else if (kind == "random_state") {
    Params p(kind, given, {"dims", "state"});
    inst.alg = BlockAlgebra(p.dims("3"));
    inst.state = make_state(rng, inst.alg, p.text("state", "random", kStateKinds));
    inst.metadata.params = p.effective();
  } else if (kind == "paper_counterexample") {
    Params p(kind, given, {"delta"});
    const double delta = p.real("delta", 0.01);
    p.require(delta > 0.0 && delta <= 0.1, "delta", "expected 0 < delta <= 0.1");
    inst.alg = BlockAlgebra({2});
    inst.state = State::normalized_trace(inst.alg);
    inst.povm = counterexample_povm(delta);
    inst.metadata.params = p.effective();
  } else if (kind == "linfty2_family") {
    Params p(kind, given, {"c"});
    const double c = p.real("c", 0.1);
    p.require(c > 0.0 && c < 1.0, "c", "expected 0 < c < 1");
    inst.alg = BlockAlgebra({1, 1});
    auto el = [](double x, double y) { return AlgebraElement({Matrix::Constant(1, 1, x), Matrix::Constant(1, 1, y)}); };
    inst.state = State::from_densities(inst.alg, el(1.0 - c, c));
    inst.povm = Povm{{el(1.0, 0.5), el(0.0, 0.5)}};
    inst.metadata.params = p.effective();
  } else if (kind == "rotated_pvm_pair") {
    Params p(kind, given, {"dims", "n", "theta", "eta", "basis", "state"});
    const auto dims = p.dims("2");
    const int n = p.integer("n", 2);
    const double theta = p.real("theta", 0.1);
    const double eta = p.real("eta", 0.0);
    const std::string basis = p.text("basis", "haar", {"haar", "standard"});
    const std::string state = p.text("state", "trace", kStateKinds);
    p.require(n >= 1 && n <= 64, "n", "expected 1 <= n <= 64");
    p.require(theta > 0.0 && theta <= std::numbers::pi / 4.0, "theta", "expected 0 < theta <= pi/4");
    p.require(eta >= 0.0 && eta <= 1.0, "eta", "expected 0 <= eta <= 1");
    inst.alg = BlockAlgebra(dims);
    std::vector<Matrix> bases;
    std::vector<std::vector<int>> pattern;
    for (int d : dims) {
      bases.push_back(basis == "haar" ? rng.haar_unitary(d) : Matrix::Identity(d, d));
      std::vector<int> pat;
      for (int j = 0; j < d; ++j) pat.push_back(basis == "haar" ? rng.integer(0, n - 1) : j % n);
      pattern.push_back(std::move(pat));
    }
    const Pvm q = pvm_from_pattern(inst.alg, bases, pattern, n);
    std::vector<Matrix> v;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      Matrix rot = bases[k] * givens(dims[k], theta) * bases[k].adjoint();
      if (eta > 0.0) rot = unitary_exp(rng.hermitian_unit(dims[k]), eta) * rot;
      v.push_back(std::move(rot));
    }
    const AlgebraElement va(std::move(v));
    Pvm pr;
    for (const auto& qj : q.elements) pr.elements.push_back((va * qj * va.adjoint()).hermitian_part());
    inst.state = make_state(rng, inst.alg, state);
    inst.pvm_pair = PvmPair{std::move(pr), q};
    inst.metadata.params = p.effective();
  } else if (kind == "random_functionals") {
    Params p(kind, given, {"dims", "n", "diagonal"});
    const auto dims = p.dims("3");
    const int n = p.integer("n", 3);
    const int diagonal = p.integer("diagonal", 0);
    p.require(n >= 1 && n <= 64, "n", "expected 1 <= n <= 64");
    p.require(diagonal == 0 || diagonal == 1, "diagonal", "expected 0 or 1");
    inst.alg = BlockAlgebra(dims);
    FunctionalFamily f;
    for (int i = 0; i < n; ++i) {
      std::vector<Matrix> blocks;
      for (int d : dims) {
        if (diagonal) {
          Matrix m = Matrix::Zero(d, d);
          for (int j = 0; j < d; ++j) m(j, j) = rng.uniform();
          blocks.push_back(std::move(m));
        } else {
          const int r = rng.integer(1, d);
          const Matrix g = rng.gaussian(d, r);
          blocks.push_back(g * g.adjoint() / static_cast<double>(d));
        }
      }
      f.elements.push_back(AlgebraElement(std::move(blocks)).hermitian_part());
    }
    inst.functionals = std::move(f);
    inst.metadata.params = p.effective();
  } else {
    throw PreconditionError("unknown generator kind \"" + kind + "\"");
  }

  if (inst.povm) require_valid_povm(inst.alg, *inst.povm, tol);
  if (inst.pvm_pair) {
    require_valid_pvm(inst.alg, inst.pvm_pair->p, tol);
    require_valid_pvm(inst.alg, inst.pvm_pair->q, tol);
  }
  if (inst.functionals) require_valid_family(inst.alg, *inst.functionals, tol);
  return inst;
}

Instance sweep_instance(std::uint64_t seed, const SweepRanges& r) {
  Rng rng(seed ^ 0x5bd1e9955bd1e995ULL);
  std::vector<int> dims;
  int total = 0;
  const int blocks = rng.integer(1, r.max_blocks);
  for (int k = 0; k < blocks && total < r.max_total_dim; ++k) {
    const int d = rng.integer(1, std::min(r.max_block_dim, r.max_total_dim - total));
    dims.push_back(d);
    total += d;
  }
  const int n = rng.integer(r.min_outputs, r.max_outputs);
  const double delta = rng.uniform(0.0, r.max_delta);
  static const char* kinds[] = {"trace", "random", "rank1"};
  const std::string state = kinds[rng.integer(0, 2)];
  std::string ds;
  for (std::size_t k = 0; k < dims.size(); ++k) ds += (k ? "," : "") + std::to_string(dims[k]);
  return gen_instance("random_povm_near_pvm", seed,
                      {{"dims", ds}, {"n", std::to_string(n)}, {"delta", Json(delta).dump()}, {"state", state}});
}

}  // namespace povmround
