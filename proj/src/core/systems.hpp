#pragma once

#include <optional>
#include <string>
#include <vector>

#include "field.hpp"

namespace jbf {

// Dense square matrix over any scalar; sizes here are tiny (n <= 8).
template <class T>
class SqMat {
 public:
  SqMat() = default;
  explicit SqMat(std::size_t n) : n_(n), a_(n * n, T(0.0)) {}

  std::size_t n() const { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  SqMat operator*(const SqMat& b) const {
    SqMat r(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t j = 0; j < n_; ++j)
          r(i, j) = r(i, j) + (*this)(i, k) * b(k, j);
    return r;
  }

  T trace() const {
    T s(0.0);
    for (std::size_t i = 0; i < n_; ++i) s = s + (*this)(i, i);
    return s;
  }

  static SqMat identity(std::size_t n) {
    SqMat r(n);
    for (std::size_t i = 0; i < n; ++i) r(i, i) = T(1.0);
    return r;
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> a_;
};

// Coefficients (f1..fn) of det(lambda I - A) = lambda^n + f1 lambda^{n-1} + ...
// by the Faddeev-LeVerrier recursion.  Works over duals, which is how the
// coefficient gradients are obtained.
template <class T>
std::vector<T> faddeev_leverrier(const SqMat<T>& A) {
  const std::size_t n = A.n();
  std::vector<T> f;
  f.reserve(n);
  SqMat<T> M = A;
  f.push_back(T(-1.0) * M.trace());
  for (std::size_t k = 2; k <= n; ++k) {
    SqMat<T> shifted = M;
    for (std::size_t i = 0; i < n; ++i)
      shifted(i, i) = shifted(i, i) + f.back();
    M = A * shifted;
    f.push_back(T(-1.0 / static_cast<double>(k)) * M.trace());
  }
  return f;
}

struct BlockSpec {
  int size = 0;
  std::vector<Field> entries;  // lambda^1 .. lambda^size, each of arity n
};

// Block-diagonal system u_t = A(u) u_x with upper-triangular Toeplitz blocks.
class JordanSystem {
 public:
  JordanSystem(std::vector<BlockSpec> blocks,
               std::map<std::string, double> params = {});

  static JordanSystem from_json(const std::string& json_text);

  int n() const { return n_; }
  std::size_t block_count() const { return blocks_.size(); }
  const BlockSpec& block(std::size_t a) const { return blocks_[a]; }
  int block_offset(std::size_t a) const { return offsets_[a]; }
  const std::map<std::string, double>& params() const { return params_; }

  SqMat<double> assemble(const Point& p) const;
  SqMat<Grad> assemble_ugrad(const Point& p) const;

  std::vector<double> char_poly(const Point& p) const;

  // Row vector  grad f1 A^{n-1} + grad f2 A^{n-2} + ... + grad fn.
  std::vector<double> lindeg_residual(const Point& p) const;

  // d lambda_a^1 / d u_a^1 per block.
  std::vector<double> block_degeneracy(const Point& p) const;

  // Advisory check of the distinct-eigenvalue hypothesis at a point.
  std::optional<std::string> eigenvalue_collision(const Point& p,
                                                  double tol = 1e-8) const;

 private:
  std::vector<BlockSpec> blocks_;
  std::vector<int> offsets_;
  int n_ = 0;
  std::map<std::string, double> params_;
};

}  // namespace jbf
