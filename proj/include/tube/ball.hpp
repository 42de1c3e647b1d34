#pragma once

#include "tube/types.hpp"

#include <vector>

namespace tube {

// Bessel helpers (std special functions underneath)
double bessel_j(double nu, double x);
double bessel_y(double nu, double x);
// k-th positive zero of J_nu, k >= 1, bracketed then bisected
double bessel_j_zero(int nu, int k);

struct BallSpectrum {
    int codim = 1;
    std::vector<double> lambda; // distinct, ascending
    double epsStar = 0.0;

    double ground_state(double r) const;
};

BallSpectrum ball_spectrum(int codim, int count = 8);
double ball_eigenvalue(int codim, int k);
double ground_state(int codim, double r);

// Quadrature over the unit ball on a tensor node set.
// codim 1: nodes w_j = -1 + 2j/n, j = 0..n (boundary included, weight 0 contribution since u = 0 there).
// codim 2: polar rings r_j = (j + 1/2) dr, dr = 1/(n_r - 1/2), angles 2 pi q / n_theta.
struct FiberQuadrature {
    int codim = 1;
    std::vector<double> w1;        // codim 1 coordinates
    std::vector<double> r, theta;  // codim 2 coordinates
    std::vector<double> weight;    // per node, ring-major for codim 2

    std::size_t size() const { return weight.size(); }
    Vec point(std::size_t q) const; // Cartesian fiber point
};

FiberQuadrature fiber_quadrature(int codim, int n, int nTheta = 0);

struct FiberProjection {
    double coefficient = 0.0;
    std::vector<double> projected;
};

FiberProjection fiber_project(const std::vector<double>& u, const FiberQuadrature& quad);

} // namespace tube
