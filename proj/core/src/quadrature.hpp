#pragma once
// thin wrapper over boost adaptive Gauss-Kronrod, absolute-tolerance flavoured
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dl {

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-10) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 17, tol, &err);
    return v;
}

}  // namespace dl
