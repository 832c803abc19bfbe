#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mlcd {

using cdouble = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Scalar field of a model or basis.
enum class Field { Real, Complex };

inline const char* to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

template <typename Scalar>
constexpr Field field_of() {
  if constexpr (std::is_same_v<Scalar, double>) {
    return Field::Real;
  } else {
    return Field::Complex;
  }
}

/// Raised when a model cannot be assembled from its inputs.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by readers on malformed or inconsistent files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double abs2(double v) { return v * v; }
inline double abs2(const cdouble& v) { return std::norm(v); }

}  // namespace mlcd
