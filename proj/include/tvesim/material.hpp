#pragma once

#include <array>
#include <vector>

#include "tvesim/mesh.hpp"
#include "tvesim/tensor.hpp"

namespace tvesim {

// Fourth order elasticity field D(x): constant, isotropic with nodal Lame
// fields, or fully anisotropic nodal component matrices. Symmetry of
// anisotropic input and pointwise positive definiteness are validated on
// construction; the smallest contraction-metric eigenvalue is exposed.
class MaterialField {
 public:
  static MaterialField constant_isotropic(double lambda, double mu);
  static MaterialField isotropic_nodal(std::vector<double> lambda, std::vector<double> mu);
  static MaterialField anisotropic_nodal(std::vector<std::array<double, 36>> c, double sym_tol = 1e-12);

  // P1-interpolated moduli at barycentric (l1, l2) of element e.
  ElasticModuli at(const Mesh& mesh, int e, double l1, double l2) const;

  double min_eigenvalue() const { return dmin_; }
  bool spatially_constant() const { return kind_ == Kind::const_iso; }

 private:
  enum class Kind { const_iso, nodal_iso, nodal_aniso };
  Kind kind_ = Kind::const_iso;
  double lambda0_ = 0.0, mu0_ = 0.0;
  std::vector<double> lambda_, mu_;
  std::vector<std::array<double, 36>> c_;
  double dmin_ = 0.0;

  void validate();
};

// Smallest eigenvalue of the moduli in the tensor contraction metric,
// i.e. inf over unit |xi| of xi : D xi.
double moduli_min_eigenvalue(const ElasticModuli& m);

}  // namespace tvesim
