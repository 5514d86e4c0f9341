#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nondecomp {

inline constexpr const char* kVersion = "0.1.0";

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// All numerics run in double; convergence diagnostics are tolerance-sensitive.
using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };

}  // namespace nondecomp
