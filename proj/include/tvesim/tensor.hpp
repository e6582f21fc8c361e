#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace tvesim {

// Symmetric 3x3 tensor stored as (xx, yy, zz, xy, xz, yz).
// Double contraction weights the off-diagonal slots twice.
struct SymTensor3 {
  std::array<double, 6> a{};

  static SymTensor3 zero() { return {}; }

  static SymTensor3 identity() {
    SymTensor3 t;
    t.a = {1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    return t;
  }

  double& operator[](std::size_t i) { return a[i]; }
  double operator[](std::size_t i) const { return a[i]; }

  double trace() const { return a[0] + a[1] + a[2]; }

  // Deviatoric part: subtracts (tr/3) I, exact in the 3x3 algebra even for
  // plane-strain fields whose zz slot is zero.
  SymTensor3 dev() const {
    const double third = trace() / 3.0;
    SymTensor3 t = *this;
    t.a[0] -= third;
    t.a[1] -= third;
    t.a[2] -= third;
    return t;
  }

  SymTensor3& operator+=(const SymTensor3& o) {
    for (std::size_t i = 0; i < 6; ++i) a[i] += o.a[i];
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    for (std::size_t i = 0; i < 6; ++i) a[i] -= o.a[i];
    return *this;
  }
  SymTensor3& operator*=(double s) {
    for (std::size_t i = 0; i < 6; ++i) a[i] *= s;
    return *this;
  }

  friend SymTensor3 operator+(SymTensor3 l, const SymTensor3& r) { return l += r; }
  friend SymTensor3 operator-(SymTensor3 l, const SymTensor3& r) { return l -= r; }
  friend SymTensor3 operator*(SymTensor3 l, double s) { return l *= s; }
  friend SymTensor3 operator*(double s, SymTensor3 r) { return r *= s; }
};

// Full contraction A:B = sum_ij A_ij B_ij.
inline double ddot(const SymTensor3& x, const SymTensor3& y) {
  return x.a[0] * y.a[0] + x.a[1] * y.a[1] + x.a[2] * y.a[2] +
         2.0 * (x.a[3] * y.a[3] + x.a[4] * y.a[4] + x.a[5] * y.a[5]);
}

// Frobenius norm |A| = sqrt(A:A).
inline double tnorm(const SymTensor3& x) { return std::sqrt(ddot(x, x)); }

// Pointwise elastic stiffness acting on symmetric 3x3 tensors.
// Either isotropic (lambda, mu) or a full component matrix c[al][be] over the
// slot ordering above; minor symmetry is implied by the storage, major
// symmetry (c = c^T) is required of anisotropic input.
class ElasticModuli {
 public:
  static ElasticModuli isotropic(double lambda, double mu) {
    ElasticModuli m;
    m.iso_ = true;
    m.lambda_ = lambda;
    m.mu_ = mu;
    return m;
  }

  static ElasticModuli anisotropic(const std::array<double, 36>& c) {
    ElasticModuli m;
    m.iso_ = false;
    m.c_ = c;
    return m;
  }

  bool isotropic_form() const { return iso_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double c(std::size_t al, std::size_t be) const { return c_[6 * al + be]; }

  SymTensor3 apply(const SymTensor3& x) const {
    SymTensor3 r;
    if (iso_) {
      const double lt = lambda_ * x.trace();
      r.a[0] = 2.0 * mu_ * x.a[0] + lt;
      r.a[1] = 2.0 * mu_ * x.a[1] + lt;
      r.a[2] = 2.0 * mu_ * x.a[2] + lt;
      r.a[3] = 2.0 * mu_ * x.a[3];
      r.a[4] = 2.0 * mu_ * x.a[4];
      r.a[5] = 2.0 * mu_ * x.a[5];
      return r;
    }
    // (Dx)_al = sum_be c[al][be] w_be x_be with w = (1,1,1,2,2,2).
    for (std::size_t al = 0; al < 6; ++al) {
      double s = 0.0;
      for (std::size_t be = 0; be < 6; ++be) {
        const double w = be < 3 ? 1.0 : 2.0;
        s += c_[6 * al + be] * w * x.a[be];
      }
      r.a[al] = s;
    }
    return r;
  }

  // Component matrix of the action in the slot basis; feeding it back into
  // anisotropic() reproduces the same operator.
  std::array<double, 36> component_matrix() const {
    if (!iso_) return c_;
    std::array<double, 36> c{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) c[6 * i + j] = lambda_;
    for (std::size_t i = 0; i < 3; ++i) c[6 * i + i] += 2.0 * mu_;
    for (std::size_t i = 3; i < 6; ++i) c[6 * i + i] = mu_;
    return c;
  }

 private:
  bool iso_ = true;
  double lambda_ = 0.0;
  double mu_ = 0.0;
  std::array<double, 36> c_{};
};

}  // namespace tvesim
