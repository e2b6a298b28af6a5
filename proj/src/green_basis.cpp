#include "neumann_layers/green_basis.hpp"

#include <cmath>
#include <sstream>

#include "neumann_layers/errors.hpp"
#include "neumann_layers/quadrature.hpp"

namespace nlayers {

namespace {

ValueSlope sinh_over_r(double r) {
  if (r < 0.1) {
    const double r2 = r * r;
    double value = 1.0 + r2 / 6.0 * (1.0 + r2 / 20.0 * (1.0 + r2 / 42.0 * (1.0 + r2 / 72.0)));
    double slope = r * (1.0 / 3.0 + r2 * (1.0 / 30.0 + r2 * (1.0 / 840.0 + r2 / 45360.0)));
    return {value, slope};
  }
  return {std::sinh(r) / r, (std::cosh(r) * r - std::sinh(r)) / (r * r)};
}

ValueSlope combine(double ca, const ValueSlope& x, double cb, const ValueSlope& z) {
  ValueSlope out;
  if (ca != 0.0) {
    out.value += ca * x.value;
    out.slope += ca * x.slope;
  }
  if (cb != 0.0) {
    out.value += cb * z.value;
    out.slope += cb * z.slope;
  }
  return out;
}

}  // namespace

ValueSlope GreenBasis::xi(double r) const {
  if (r < 0.0 || r > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "xi evaluated at r=" << r;
    raise(ErrorKind::OutOfInterval, msg.str());
  }
  if (representation_ == BasisRepresentation::ClosedFormN3) return sinh_over_r(r);
  if (r < origin_offset_) {
    const double u0 = 1.0 / (N_ - 2);
    const double A = u0 / (2.0 * N_);
    const double B = A / (4.0 * (N_ + 2.0));
    return {u0 + A * r * r + B * r * r * r * r, 2.0 * A * r + 4.0 * B * r * r * r};
  }
  RadialState s = xi_traj_->eval(std::min(r, 1.0));
  return {s.u, s.du};
}

ValueSlope GreenBasis::zeta(double r) const {
  if (r <= 0.0 || r > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "zeta evaluated at r=" << r;
    raise(ErrorKind::OutOfInterval, msg.str());
  }
  if (representation_ == BasisRepresentation::ClosedFormN3) {
    const double e = std::exp(r);
    return {e / r, e * (r - 1.0) / (r * r)};
  }
  if (r < kZetaCutoff) {
    return {std::pow(r, 2.0 - N_), -(N_ - 2.0) * std::pow(r, 1.0 - N_)};
  }
  RadialState s = zeta_traj_->eval(std::min(r, 1.0));
  return {zeta_scale_ * s.u, zeta_scale_ * s.du};
}

GreenBasis build_basis(int N, const IntegratorParams& params, bool force_tabulated) {
  if (N < 3) raise(ErrorKind::InvalidArgument, "the Green basis requires N >= 3");
  params.validate();
  GreenBasis basis;
  basis.N_ = N;
  basis.sphere_area_ = unit_sphere_area(N);
  basis.origin_offset_ = params.origin_offset;
  if (N == 3 && !force_tabulated) {
    basis.representation_ = BasisRepresentation::ClosedFormN3;
    return basis;
  }
  basis.representation_ = BasisRepresentation::Tabulated;
  const RadialState start = origin_series_start_linear(N, 1.0 / (N - 2), params.origin_offset);
  auto xi_traj = std::make_shared<Trajectory>(integrate_linear(N, start.r, 1.0, start, params));
  auto zeta_traj = std::make_shared<Trajectory>(
      integrate_linear(N, 1.0, GreenBasis::kZetaCutoff, RadialState{1.0, 1.0, 0.0}, params));
  // Wronskian of xi with the trial zeta at r = 1: 1^{N-1}(xi'(1)*1 - xi(1)*0).
  const double wronskian = xi_traj->back().du;
  basis.zeta_scale_ = 1.0 / wronskian;
  basis.xi_traj_ = std::move(xi_traj);
  basis.zeta_traj_ = std::move(zeta_traj);
  return basis;
}

AnnulusBasis::AnnulusBasis(const GreenBasis& basis, double a, double b)
    : basis_(std::make_shared<GreenBasis>(basis)), a_(a), b_(b) {
  if (!(a >= 0.0 && a < b && b <= 1.0)) {
    std::ostringstream msg;
    msg << "require 0 <= a < b <= 1, got [" << a << ", " << b << "]";
    raise(ErrorKind::InvalidArgument, msg.str());
  }
  if (b - a < 1e-8) raise(ErrorKind::DegenerateInterval, "interval shorter than 1e-8");
  const bool ball = (a == 0.0), full = (b == 1.0);
  if (ball && full) {
    coef_ = {{{1.0, 0.0}, {0.0, 1.0}}};
  } else if (ball) {
    const ValueSlope xb = basis.xi(b), zb = basis.zeta(b);
    coef_ = {{{1.0 / xb.slope, 0.0}, {-zb.slope, xb.slope}}};
  } else if (full) {
    const ValueSlope xa = basis.xi(a), za = basis.zeta(a);
    coef_ = {{{-za.slope, xa.slope}, {0.0, -1.0 / za.slope}}};
  } else {
    const ValueSlope xa = basis.xi(a), za = basis.zeta(a);
    const ValueSlope xb = basis.xi(b), zb = basis.zeta(b);
    denominator_ = xa.slope * zb.slope - xb.slope * za.slope;
    if (!(denominator_ > 0.0)) raise(ErrorKind::DegenerateInterval, "non-positive annulus denominator");
    const double s = std::sqrt(denominator_);
    coef_ = {{{-za.slope / s, xa.slope / s}, {-zb.slope / s, xb.slope / s}}};
  }
}

void AnnulusBasis::check_range(double r) const {
  const double slack = 1e-12;
  if (r < a_ - slack || r > b_ + slack) {
    std::ostringstream msg;
    msg << "radius " << r << " outside [" << a_ << ", " << b_ << "]";
    raise(ErrorKind::OutOfInterval, msg.str());
  }
}

ValueSlope AnnulusBasis::xi(double r) const {
  check_range(r);
  r = std::max(r, 0.0);
  const ValueSlope x = basis_->xi(r);
  const ValueSlope z = coef_[0][1] != 0.0 ? basis_->zeta(r) : ValueSlope{};
  return combine(coef_[0][0], x, coef_[0][1], z);
}

ValueSlope AnnulusBasis::zeta(double r) const {
  check_range(r);
  const ValueSlope x = coef_[1][0] != 0.0 ? basis_->xi(r) : ValueSlope{};
  const ValueSlope z = basis_->zeta(r);
  return combine(coef_[1][0], x, coef_[1][1], z);
}

AnnulusBasis annulus_basis(const GreenBasis& basis, double a, double b) {
  return AnnulusBasis(basis, a, b);
}

double green_eval(const AnnulusBasis& ab, double r, double s) {
  const int N = ab.base().dimension();
  const double lo = std::min(r, s), hi = std::max(r, s);
  return std::pow(s, N - 1) * ab.xi(lo).value * ab.zeta(hi).value;
}

PhiValue phi_eval(const AnnulusBasis& ab, double s) {
  if (!(s > ab.a() && s < ab.b())) {
    std::ostringstream msg;
    msg << "phi evaluated at s=" << s << " outside the open interval";
    raise(ErrorKind::OutOfInterval, msg.str());
  }
  const int N = ab.base().dimension();
  const double area = ab.base().sphere_area();
  const ValueSlope x = ab.xi(s), z = ab.zeta(s);
  const double lx = x.slope / x.value, lz = z.slope / z.value;
  return {area / (x.value * z.value), -area * std::pow(s, N - 1) * (lx * lx - lz * lz)};
}

}  // namespace nlayers
