#include "aphi/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace aphi {
namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 rot_x_prime(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return r;
}

Mat3 rot_y_prime(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return r;
}

Mat3 rot_z_prime(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return r;
}

bool finite(const Mat3& m) { return m.allFinite(); }

}  // namespace

double VehicleParams::p1() const {
  return L * std::cos(alpha) + k_f * std::sin(alpha);
}

double VehicleParams::p2() const {
  return L * std::sin(alpha) - k_f * std::cos(alpha);
}

void VehicleParams::validate() const {
  auto fail = [](const std::string& what) {
    throw ValidationError("VehicleParams: " + what);
  };
  if (!(m > 0.0)) fail("m > 0");
  if (!finite(J) || (J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12 * J.norm())
    fail("J symmetric");
  if (Eigen::LLT<Mat3>(J).info() != Eigen::Success) fail("J positive definite");
  if (!(L > 0.0)) fail("L > 0");
  if (!(alpha > 0.0 && alpha < M_PI / 2)) fail("0 < alpha < pi/2");
  if (!(k_f > 0.0)) fail("k_f > 0");
  if (!(g > 0.0)) fail("g > 0");
}

void check_attitude(const Vec3& phi) {
  if (!phi.allFinite()) throw SingularAttitude("non-finite attitude");
  if (std::abs(std::cos(phi[1])) <= std::sin(kSingularityMargin)) {
    std::ostringstream os;
    os << "pitch " << phi[1] << " rad is at the Euler-angle singularity";
    throw SingularAttitude(os.str());
  }
}

Mat3 rotation_matrix(const Vec3& phi) {
  return rot_z(phi[2]) * rot_y(phi[1]) * rot_x(phi[0]);
}

Mat3 rotation_matrix_partial(const Vec3& phi, int axis) {
  switch (axis) {
    case 0: return rot_z(phi[2]) * rot_y(phi[1]) * rot_x_prime(phi[0]);
    case 1: return rot_z(phi[2]) * rot_y_prime(phi[1]) * rot_x(phi[0]);
    case 2: return rot_z_prime(phi[2]) * rot_y(phi[1]) * rot_x(phi[0]);
    default: throw std::out_of_range("rotation_matrix_partial: axis");
  }
}

Mat3 euler_rate_map(const Vec3& phi) {
  check_attitude(phi);
  const double cr = std::cos(phi[0]), sr = std::sin(phi[0]);
  const double cp = std::cos(phi[1]), sp = std::sin(phi[1]);
  Mat3 q;
  q << 1, 0, -sp,
       0, cr, sr * cp,
       0, -sr, cr * cp;
  return q;
}

Mat3 euler_rate_map_partial(const Vec3& phi, int axis) {
  const double cr = std::cos(phi[0]), sr = std::sin(phi[0]);
  const double cp = std::cos(phi[1]), sp = std::sin(phi[1]);
  Mat3 d = Mat3::Zero();
  switch (axis) {
    case 0:
      d << 0, 0, 0,
           0, -sr, cr * cp,
           0, -cr, -sr * cp;
      break;
    case 1:
      d << 0, 0, -cp,
           0, 0, -sr * sp,
           0, 0, -cr * sp;
      break;
    case 2:
      break;
    default:
      throw std::out_of_range("euler_rate_map_partial: axis");
  }
  return d;
}

Mat3 euler_rate_map_dot(const Vec3& phi, const Vec3& phi_dot) {
  return euler_rate_map_partial(phi, 0) * phi_dot[0] +
         euler_rate_map_partial(phi, 1) * phi_dot[1];
}

Mat6 input_map(const Vec3& phi) {
  Mat6 b = Mat6::Zero();
  b.topLeftCorner<3, 3>() = rotation_matrix(phi);
  b.bottomRightCorner<3, 3>() = euler_rate_map(phi).transpose();
  return b;
}

Mat6 input_map_inverse(const Vec3& phi) {
  Mat6 b = Mat6::Zero();
  b.topLeftCorner<3, 3>() = rotation_matrix(phi).transpose();
  b.bottomRightCorner<3, 3>() = euler_rate_map(phi).transpose().inverse();
  return b;
}

Mat6 mass_matrix(const Vec3& phi, const VehicleParams& params) {
  const Mat3 q = euler_rate_map(phi);
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = params.m * Mat3::Identity();
  m.bottomRightCorner<3, 3>() = q.transpose() * params.J * q;
  return m;
}

Vec6 coriolis_vector(const Vec3& phi, const Vec3& phi_dot,
                     const VehicleParams& params) {
  const Mat3 q = euler_rate_map(phi);
  const Mat3 q_dot = euler_rate_map_dot(phi, phi_dot);
  const Vec3 omega = q * phi_dot;
  Vec6 c = Vec6::Zero();
  c.tail<3>() = q.transpose() *
                (params.J * q_dot * phi_dot + omega.cross(params.J * omega));
  return c;
}

Vec6 gravity_vector(const VehicleParams& params) {
  Vec6 g = Vec6::Zero();
  g[2] = params.m * params.g;
  return g;
}

Mat6 allocation_matrix(const VehicleParams& params) {
  const double sa = std::sin(params.alpha), ca = std::cos(params.alpha);
  const double p1 = params.p1(), p2 = params.p2();
  const double h3 = std::sqrt(3.0) / 2.0;
  Mat6 xi;
  // clang-format off
  xi << 0.5 * sa,  -sa,      0.5 * sa, 0.5 * sa, -sa,     0.5 * sa,
        -h3 * sa,  0.0,      h3 * sa,  -h3 * sa, 0.0,     h3 * sa,
        ca,        ca,       ca,       ca,       ca,      ca,
        -0.5 * p1, -p1,      -0.5 * p1, 0.5 * p1, p1,     0.5 * p1,
        h3 * p1,   0.0,      -h3 * p1, -h3 * p1, 0.0,     h3 * p1,
        p2,        -p2,      p2,       -p2,      p2,      -p2;
  // clang-format on
  return xi;
}

Allocation::Allocation(const VehicleParams& params)
    : xi_(allocation_matrix(params)) {
  Eigen::JacobiSVD<Mat6> svd(xi_);
  const auto& s = svd.singularValues();
  cond_ = s[5] > 0.0 ? s[0] / s[5] : std::numeric_limits<double>::infinity();
  if (!(cond_ <= 1e12)) {
    std::ostringstream os;
    os << "allocation matrix condition number " << cond_ << " exceeds 1e12";
    throw NonInvertibleAllocation(os.str());
  }
  xi_inv_ = xi_.partialPivLu().inverse();
}

GeneralizedWrench thrust_to_wrench(const ThrustVector& thrust, const Vec3& phi,
                                   const Allocation& alloc) {
  return {input_map(phi) * (alloc.matrix() * thrust.T)};
}

GeneralizedWrench thrust_to_wrench(const ThrustVector& thrust, const Vec3& phi,
                                   const VehicleParams& params) {
  return thrust_to_wrench(thrust, phi, Allocation(params));
}

ThrustVector wrench_to_thrust(const GeneralizedWrench& tau, const Vec3& phi,
                              const Allocation& alloc) {
  return {alloc.inverse() * (input_map_inverse(phi) * tau.w)};
}

ThrustVector wrench_to_thrust(const GeneralizedWrench& tau, const Vec3& phi,
                              const VehicleParams& params) {
  return wrench_to_thrust(tau, phi, Allocation(params));
}

Vec6 forward_dynamics(const PlantState& state, const GeneralizedWrench& tau,
                      const GeneralizedWrench& tau_ext,
                      const VehicleParams& params) {
  const Vec3 phi = state.phi();
  const Mat3 q = euler_rate_map(phi);
  const Vec6 rhs = tau.w + tau_ext.w -
                   coriolis_vector(phi, state.phi_dot(), params) -
                   gravity_vector(params);
  Vec6 q_ddot;
  q_ddot.head<3>() = rhs.head<3>() / params.m;
  // (Q^T J Q)^-1 = Q^-1 J^-1 Q^-T
  const Mat3 q_inv = q.inverse();
  q_ddot.tail<3>() =
      q_inv * params.J.llt().solve(q_inv.transpose() * rhs.tail<3>());
  return q_ddot;
}

double total_energy(const PlantState& state, const VehicleParams& params) {
  const Mat6 m = mass_matrix(state.phi(), params);
  return 0.5 * state.q_dot.dot(m * state.q_dot) + params.m * params.g * state.q[2];
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
  return s;
}

}  // namespace aphi
