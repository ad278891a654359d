#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tbcurv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense tensor of rank `Rank` with every index ranging over 0..dim-1.
/// Row-major: the last index varies fastest.
template <std::size_t Rank>
class CubeTensor {
 public:
  CubeTensor() = default;
  explicit CubeTensor(int dim, double fill = 0.0) : dim_(dim), data_(size_for(dim), fill) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> flat() const noexcept { return data_; }
  std::span<double> flat() noexcept { return data_; }

  template <class... I>
  double& operator()(I... idx) noexcept {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(static_cast<int>(idx)...)];
  }
  template <class... I>
  double operator()(I... idx) const noexcept {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(static_cast<int>(idx)...)];
  }

  double& at(const std::array<int, Rank>& idx) noexcept { return data_[offset_array(idx)]; }
  double at(const std::array<int, Rank>& idx) const noexcept { return data_[offset_array(idx)]; }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  CubeTensor& operator+=(const CubeTensor& o) {
    assert(o.dim_ == dim_);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CubeTensor& operator-=(const CubeTensor& o) {
    assert(o.dim_ == dim_);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CubeTensor& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  friend CubeTensor operator+(CubeTensor a, const CubeTensor& b) { return a += b; }
  friend CubeTensor operator-(CubeTensor a, const CubeTensor& b) { return a -= b; }
  friend CubeTensor operator*(CubeTensor a, double s) { return a *= s; }
  friend CubeTensor operator*(double s, CubeTensor a) { return a *= s; }

 private:
  static std::size_t size_for(int dim) {
    std::size_t s = 1;
    for (std::size_t r = 0; r < Rank; ++r) s *= static_cast<std::size_t>(dim);
    return s;
  }
  template <class... I>
  std::size_t offset(I... idx) const noexcept {
    std::size_t off = 0;
    ((assert(idx >= 0 && idx < dim_), off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return off;
  }
  std::size_t offset_array(const std::array<int, Rank>& idx) const noexcept {
    std::size_t off = 0;
    for (int i : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return off;
  }

  int dim_ = 0;
  std::vector<double> data_;
};

/// Γ^a_{bc}, stored as (a, b, c).
using Christoffel = CubeTensor<3>;
using Tensor4 = CubeTensor<4>;
using Tensor5 = CubeTensor<5>;

inline double kronecker(int i, int j) noexcept { return i == j ? 1.0 : 0.0; }

}  // namespace tbcurv
