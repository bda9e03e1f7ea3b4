#pragma once

#include <functional>

namespace wkam {

/// Adaptive Gauss-Kronrod quadrature of f over [a,b] with an absolute
/// error target. Throws ConvergenceError when the estimate stays above it.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace wkam
