#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ehjb {

/// Spatial dimensions are tiny (1 or 2); vectors and matrices are dynamic-size
/// but stack-allocated up to kMaxDim so hot loops never touch the heap.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Second-order jet of a scalar function at a point: value is implicit,
/// only the point, gradient and (symmetric) Hessian enter the HJB operator.
struct Jet {
  Vec x;
  Vec p;
  Mat X;
};

inline Vec vec1(double x) {
  Vec v(1);
  v << x;
  return v;
}

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

/// Base for all domain errors thrown by the library. `code()` is a stable
/// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define EHJB_DEFINE_ERROR(NAME)                          \
  class NAME : public Error {                            \
   public:                                               \
    explicit NAME(const std::string& msg)                \
        : Error(#NAME, msg) {}                           \
  }

EHJB_DEFINE_ERROR(OutsideCollar);
EHJB_DEFINE_ERROR(OutsideDomain);
EHJB_DEFINE_ERROR(BadDelta);
EHJB_DEFINE_ERROR(EmptyControlSet);
EHJB_DEFINE_ERROR(MissingCost);
EHJB_DEFINE_ERROR(MissingTerminalCost);
EHJB_DEFINE_ERROR(NonDiagonalDiffusion);
EHJB_DEFINE_ERROR(ShapeMismatch);
EHJB_DEFINE_ERROR(TooCoarse);
EHJB_DEFINE_ERROR(NoConvergence);
EHJB_DEFINE_ERROR(SingularOperator);
EHJB_DEFINE_ERROR(GridMismatch);
EHJB_DEFINE_ERROR(ScheduleTooShort);
EHJB_DEFINE_ERROR(BadStart);
EHJB_DEFINE_ERROR(ConfigError);
EHJB_DEFINE_ERROR(UnsupportedShape);
EHJB_DEFINE_ERROR(InvalidBarrier);

#undef EHJB_DEFINE_ERROR

}  // namespace ehjb
