#include "systems.hpp"

#include <cmath>

#include <json.hpp>

namespace jbf {

JordanSystem::JordanSystem(std::vector<BlockSpec> blocks,
                           std::map<std::string, double> params)
    : blocks_(std::move(blocks)), params_(std::move(params)) {
  if (blocks_.empty()) throw InputError("system needs at least one block");
  for (const auto& b : blocks_) {
    if (b.size < 1) throw InputError("block size must be >= 1");
    if (static_cast<int>(b.entries.size()) != b.size)
      throw InputError("block with size " + std::to_string(b.size) + " has " +
                       std::to_string(b.entries.size()) + " entries");
    offsets_.push_back(n_);
    n_ += b.size;
  }
  for (const auto& b : blocks_)
    for (const auto& e : b.entries)
      if (e.arity() != n_)
        throw InputError("entry arity " + std::to_string(e.arity()) +
                         " does not match system dimension " + std::to_string(n_));
}

JordanSystem JordanSystem::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("system descriptor: ") + e.what());
  }
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array())
    throw InputError("system descriptor: missing \"blocks\" array");

  std::map<std::string, double> params;
  if (j.contains("params"))
    for (auto& [k, v] : j["params"].items()) {
      if (!v.is_number()) throw InputError("system descriptor: param " + k + " not numeric");
      params[k] = v.get<double>();
    }

  int n = 0;
  for (const auto& jb : j["blocks"]) {
    if (!jb.contains("size") || !jb["size"].is_number_integer())
      throw InputError("system descriptor: block without integer size");
    n += jb["size"].get<int>();
  }
  if (j.contains("n") && j["n"].get<int>() != n)
    throw InputError("system descriptor: declared n does not match block sizes");

  std::vector<BlockSpec> blocks;
  for (const auto& jb : j["blocks"]) {
    BlockSpec b;
    b.size = jb["size"].get<int>();
    if (!jb.contains("entries") || !jb["entries"].is_array())
      throw InputError("system descriptor: block without entries");
    for (const auto& e : jb["entries"])
      b.entries.push_back(Field::parse(e.get<std::string>(), n, params));
    blocks.push_back(std::move(b));
  }
  return JordanSystem(std::move(blocks), std::move(params));
}

SqMat<double> JordanSystem::assemble(const Point& p) const {
  SqMat<double> A(static_cast<std::size_t>(n_));
  for (std::size_t a = 0; a < blocks_.size(); ++a) {
    const auto& b = blocks_[a];
    const int off = offsets_[a];
    for (int m = 0; m < b.size; ++m) {
      const double v = b.entries[static_cast<std::size_t>(m)].eval(p);
      for (int i = 0; i + m < b.size; ++i)
        A(static_cast<std::size_t>(off + i), static_cast<std::size_t>(off + i + m)) = v;
    }
  }
  return A;
}

SqMat<Grad> JordanSystem::assemble_ugrad(const Point& p) const {
  SqMat<Grad> A(static_cast<std::size_t>(n_));
  for (std::size_t a = 0; a < blocks_.size(); ++a) {
    const auto& b = blocks_[a];
    const int off = offsets_[a];
    for (int m = 0; m < b.size; ++m) {
      const Grad v = b.entries[static_cast<std::size_t>(m)].eval_ugrad(p);
      for (int i = 0; i + m < b.size; ++i)
        A(static_cast<std::size_t>(off + i), static_cast<std::size_t>(off + i + m)) = v;
    }
  }
  return A;
}

std::vector<double> JordanSystem::char_poly(const Point& p) const {
  return faddeev_leverrier(assemble(p));
}

std::vector<double> JordanSystem::lindeg_residual(const Point& p) const {
  const std::size_t n = static_cast<std::size_t>(n_);
  const std::vector<Grad> coeffs = faddeev_leverrier(assemble_ugrad(p));
  const SqMat<double> A = assemble(p);

  // Powers A^{n-1} .. A^0
  std::vector<SqMat<double>> pow(n);
  pow[0] = SqMat<double>::identity(n);  // A^0
  for (std::size_t k = 1; k < n; ++k) pow[k] = pow[k - 1] * A;

  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {  // coefficient f_{i+1}, power n-1-i
    const SqMat<double>& Ap = pow[n - 1 - i];
    std::vector<double> g = coeffs[i].g;
    g.resize(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t j = 0; j < n; ++j) row[j] += g[s] * Ap(s, j);
  }
  return row;
}

std::vector<double> JordanSystem::block_degeneracy(const Point& p) const {
  std::vector<double> out;
  for (std::size_t a = 0; a < blocks_.size(); ++a) {
    Gradient g = blocks_[a].entries[0].grad(p);
    out.push_back(g.du[static_cast<std::size_t>(offsets_[a])]);
  }
  return out;
}

std::optional<std::string> JordanSystem::eigenvalue_collision(const Point& p,
                                                              double tol) const {
  std::vector<double> ev;
  for (const auto& b : blocks_) ev.push_back(b.entries[0].eval(p));
  for (std::size_t a = 0; a < ev.size(); ++a)
    for (std::size_t b = a + 1; b < ev.size(); ++b)
      if (std::abs(ev[a] - ev[b]) < tol)
        return "blocks " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
               " have nearly equal eigenvalues (" + std::to_string(ev[a]) + ")";
  return std::nullopt;
}

}  // namespace jbf
