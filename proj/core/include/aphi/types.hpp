#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace aphi {

using Vec3 = Eigen::Matrix<double, 3, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec36 = Eigen::Matrix<double, 36, 1>;
using Mat3 = Eigen::Matrix<double, 3, 3>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6x36 = Eigen::Matrix<double, 6, 36>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pitch too close to +-pi/2 for the ZYX Euler-rate map to be inverted.
class SingularAttitude : public Error {
 public:
  using Error::Error;
};

/// Allocation matrix is (numerically) singular for the given geometry.
class NonInvertibleAllocation : public Error {
 public:
  using Error::Error;
};

/// A state entry blew past the divergence threshold.
class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

/// An environment wrench exceeded its configured cap.
class EnvironmentOverload : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Generalized wrench acting on q = [p; phi]: rows 1-3 are world-frame forces
/// (N), rows 4-6 are the generalized torques conjugate to the Euler angles.
struct GeneralizedWrench {
  Vec6 w = Vec6::Zero();
};

/// Per-motor thrusts (N).
struct ThrustVector {
  Vec6 T = Vec6::Zero();
};

}  // namespace aphi
