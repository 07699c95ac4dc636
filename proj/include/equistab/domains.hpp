#pragma once

#include <string>
#include <utility>
#include <vector>

namespace equistab {

/// Boundary curve of the +Z3t stability domain,
/// gamma(s) = ((s^2-1)(1+cos(s pi/3)) / (2 s sin(s pi/3)), (s^2-1)/(s sin(s pi/3))),
/// defined for s in [1, 3).
std::pair<double, double> gamma_curve(double s);

/// psi = gamma_1 o gamma_2^{-1}, computed by bisection of the monotone
/// second component. Requires b > 0.
double psi(double b);

/// Table-2 membership: -Z4c, -Z3t -> a < b; +Z4c -> 2a < b; +Z3t -> a < psi(b).
/// Strict inequalities; boundary points are outside.
bool in_domain(const std::string& label, double a, double b);

struct DomainSample {
    double a = 0.0;
    double b = 0.0;
    bool inside = false;
    int unstable = 0;   // spectral root count at alpha = alpha0, T = 2 pi
    bool agree = true;  // predicate vs spectrum, ignored near the boundary
    double boundary_dist = 0.0;
};

/// Grid sweep over (0, amax] x (0, bmax] with n points per axis, comparing the
/// Table-2 predicate with the independent quasipolynomial root count.
/// jobs <= 0 uses hardware concurrency.
std::vector<DomainSample> sample_domain(const std::string& label, double amax,
                                        double bmax, int n, int jobs = 0);

/// True iff two non-adjacent segments of the polyline intersect.
bool self_intersects(const std::vector<std::pair<double, double>>& polyline);

/// Distance from (a, b) to the domain boundary of the labeled group.
double boundary_distance(const std::string& label, double a, double b);

}  // namespace equistab
