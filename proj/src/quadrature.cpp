#include "wkam/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wkam/core.hpp"

namespace wkam {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  // boost's tolerance is relative to the L1 norm; a tight relative target
  // followed by an absolute check on the returned estimate.
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 8, 1e-12, &err, &l1);
  if (!(err <= abs_tol)) throw ConvergenceError("adaptive quadrature did not converge", err);
  return value;
}

}  // namespace wkam
