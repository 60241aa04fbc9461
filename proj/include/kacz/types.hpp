#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kacz {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Sorted row indices selecting a subset of equations.
using IndexSet = std::vector<Index>;

/// Tolerances shared by the dense kernels.
namespace tol {
inline constexpr double abs = 1e-10;
inline constexpr double rel = 1e-10;
inline constexpr double orth = 1e-10;

/// Consistency tolerance for ||A x* - b||_inf.
inline double consistency(const Vector& b) {
  return 1e-8 * (1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0));
}
}  // namespace tol

}  // namespace kacz
