#pragma once

#include <array>
#include <memory>

#include "neumann_layers/radial_ode.hpp"

namespace nlayers {

struct ValueSlope {
  double value = 0.0;
  double slope = 0.0;
};

enum class BasisRepresentation { ClosedFormN3, Tabulated };

// Fundamental pair of L u = -u'' - (N-1)/r u' + u = 0: xi regular at 0, zeta with zeta'(1)=0,
// normalized by r^{N-1}(xi' zeta - xi zeta') = 1.
class GreenBasis {
 public:
  int dimension() const { return N_; }
  BasisRepresentation representation() const { return representation_; }
  double sphere_area() const { return sphere_area_; }

  ValueSlope xi(double r) const;    // r in [0, 1]
  ValueSlope zeta(double r) const;  // r in (0, 1]

  // Radius below which zeta falls back to its r -> 0 asymptotics (tabulated form).
  static constexpr double kZetaCutoff = 1e-4;

  friend GreenBasis build_basis(int N, const IntegratorParams& params, bool force_tabulated);

 private:
  int N_ = 3;
  BasisRepresentation representation_ = BasisRepresentation::ClosedFormN3;
  double sphere_area_ = 0.0;
  double origin_offset_ = 1e-6;
  double zeta_scale_ = 1.0;
  std::shared_ptr<const Trajectory> xi_traj_;
  std::shared_ptr<const Trajectory> zeta_traj_;
};

GreenBasis build_basis(int N, const IntegratorParams& params = {}, bool force_tabulated = false);

// (xi_ab, zeta_ab) = coefficients * (xi, zeta).
class AnnulusBasis {
 public:
  AnnulusBasis(const GreenBasis& basis, double a, double b);

  const GreenBasis& base() const { return *basis_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::array<std::array<double, 2>, 2>& coefficients() const { return coef_; }
  // xi'(a) zeta'(b) - xi'(b) zeta'(a); 0 reported for the special rows.
  double denominator() const { return denominator_; }

  ValueSlope xi(double r) const;
  ValueSlope zeta(double r) const;

 private:
  std::shared_ptr<const GreenBasis> basis_;
  double a_, b_;
  std::array<std::array<double, 2>, 2> coef_{};
  double denominator_ = 0.0;

  void check_range(double r) const;
};

AnnulusBasis annulus_basis(const GreenBasis& basis, double a, double b);

// G_{[a,b]}(r,s) = s^{N-1} xi_ab(min(r,s)) zeta_ab(max(r,s)).
double green_eval(const AnnulusBasis& ab, double r, double s);

struct PhiValue {
  double value;
  double slope;
};

PhiValue phi_eval(const AnnulusBasis& ab, double s);

}  // namespace nlayers
