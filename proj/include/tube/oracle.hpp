#pragma once

#include "tube/geometry.hpp"

#include <functional>
#include <vector>

namespace tube {

// Lowest radial Dirichlet eigenvalue for angular index n on the annulus R - eps < r < R + eps,
// from roots of J_n(ka) Y_n(kb) - J_n(kb) Y_n(ka).
double annulus_eigenvalue(double R, double eps, int n);
// Same on the spherical shell with spherical Bessel functions and angular index l.
double shell_eigenvalue(double R, double eps, int l);

// Lowest eigenvalue of -(p f')' + q f = Lambda w f, f(a) = f(b) = 0, by RK4 shooting.
double sturm_liouville_lowest(const std::function<double(double)>& p, const std::function<double(double)>& q,
                              const std::function<double(double)>& w, double a, double b, double lambdaLo,
                              int steps = 4000);

double annulus_eigenvalue_shooting(double R, double eps, int n);
double shell_eigenvalue_shooting(double R, double eps, int l);
// geodesic band of half-width eps around the latitude theta0 on the sphere of radius Rs
double band_eigenvalue_shooting(double theta0, double Rs, double eps, int n);

// Lowest `count` eigenvalues of the renormalized tube operator (Lambda - lambda0 / eps^2), sorted with
// multiplicity, for the catalog entries that separate. Empty when no exact reference exists.
struct ExactTube {
    std::vector<double> bessel;   // closed-form roots (annulus, shell); empty for the band
    std::vector<double> shooting; // RK4 shooting
};
ExactTube exact_tube_spectrum(const Geometry& geom, double eps, int count);

// Lowest `count` eigenvalues of Delta_L + W_L with multiplicity where a closed form exists; empty otherwise.
std::vector<double> closed_form_limit(const Geometry& geom, int count);
// Lowest `count` eigenvalues of d^2/ds^2 + W on a circle of length len by a truncated Fourier basis.
std::vector<double> fourier_limit(double len, double W, int count);

} // namespace tube
