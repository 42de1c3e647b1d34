#include "tube/ball.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tube {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Frame: return "frame";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Contract: return "contract";
    }
    return "unknown";
}

double bessel_j(double nu, double x)
{
    if (x < 0.0) {
        double s = (static_cast<long>(nu) % 2 == 0) ? 1.0 : -1.0;
        return s * std::cyl_bessel_j(nu, -x);
    }
    return std::cyl_bessel_j(nu, x);
}

double bessel_y(double nu, double x) { return std::cyl_neumann(nu, x); }

double bessel_j_zero(int nu, int k)
{
    if (nu < 0 || k < 1)
        throw Error(ErrorKind::Domain, "bessel_j_zero: need nu >= 0 and k >= 1");
    // McMahon's estimate sets the scan range; the scan counts sign changes from the origin
    const double pi = std::numbers::pi;
    double beta = (k + 0.5 * nu - 0.25) * pi;
    double guess = beta - (4.0 * nu * nu - 1.0) / (8.0 * beta);
    auto f = [nu](double x) { return bessel_j(nu, x); };
    const double step = 0.01;
    double x0 = 1e-3, f0 = f(x0);
    double a = 0.0, b = 0.0;
    int seen = 0;
    while (x0 < guess + 3.0) {
        double x1 = x0 + step, f1 = f(x1);
        if ((f0 < 0.0) != (f1 < 0.0) && ++seen == k) {
            a = x0;
            b = x1;
            break;
        }
        x0 = x1;
        f0 = f1;
    }
    if (seen != k)
        throw Error(ErrorKind::Convergence, "bessel_j_zero: bracket failed");
    double fa = f(a);
    while ((b - a) > 1e-15 * b) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b)
            break;
        double fm = f(m);
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double ball_eigenvalue(int codim, int k)
{
    if (codim != 1 && codim != 2)
        throw Error(ErrorKind::Unsupported, "ball_eigenvalue: codim must be 1 or 2");
    if (k < 0)
        throw Error(ErrorKind::Domain, "ball_eigenvalue: k must be >= 0");
    if (codim == 1) {
        double v = (k + 1) * std::numbers::pi / 2.0;
        return v * v;
    }
    return ball_spectrum(2, k + 1).lambda[k];
}

BallSpectrum ball_spectrum(int codim, int count)
{
    if (codim != 1 && codim != 2)
        throw Error(ErrorKind::Unsupported, "ball_spectrum: codim must be 1 or 2");
    count = std::max(count, 2);
    BallSpectrum out;
    out.codim = codim;
    if (codim == 1) {
        for (int k = 0; k < count; ++k) {
            double v = (k + 1) * std::numbers::pi / 2.0;
            out.lambda.push_back(v * v);
        }
    } else {
        // all j_{nu,n} below a cutoff that certainly covers `count` values
        std::vector<double> zeros;
        for (int nu = 0; nu <= count + 2; ++nu)
            for (int n = 1; n <= count + 1; ++n)
                zeros.push_back(bessel_j_zero(nu, n));
        std::sort(zeros.begin(), zeros.end());
        for (double z : zeros) {
            double v = z * z;
            if (out.lambda.empty() || v > out.lambda.back() * (1.0 + 1e-12))
                out.lambda.push_back(v);
            if (static_cast<int>(out.lambda.size()) == count)
                break;
        }
    }
    out.epsStar = std::sqrt(1.0 - out.lambda[0] / out.lambda[1]);
    return out;
}

double ground_state(int codim, double r)
{
    if (r < 0.0 || r > 1.0)
        throw Error(ErrorKind::Domain, "ground_state: r outside [0,1]");
    if (codim == 1)
        return std::cos(std::numbers::pi * r / 2.0);
    if (codim == 2) {
        static const double j01 = bessel_j_zero(0, 1);
        static const double norm = 1.0 / (std::sqrt(std::numbers::pi) * std::abs(bessel_j(1.0, j01)));
        return norm * bessel_j(0.0, j01 * r);
    }
    throw Error(ErrorKind::Unsupported, "ground_state: codim must be 1 or 2");
}

double BallSpectrum::ground_state(double r) const { return tube::ground_state(codim, r); }

Vec FiberQuadrature::point(std::size_t q) const
{
    Vec p(codim);
    if (codim == 1) {
        p(0) = w1[q];
    } else {
        std::size_t nt = theta.size();
        p(0) = r[q / nt] * std::cos(theta[q % nt]);
        p(1) = r[q / nt] * std::sin(theta[q % nt]);
    }
    return p;
}

FiberQuadrature fiber_quadrature(int codim, int n, int nTheta)
{
    FiberQuadrature fq;
    fq.codim = codim;
    if (codim == 1) {
        if (n < 2)
            throw Error(ErrorKind::Validation, "fiber_quadrature: need n >= 2");
        double h = 2.0 / n;
        for (int j = 0; j <= n; ++j) {
            fq.w1.push_back(-1.0 + j * h);
            // composite Simpson when possible, trapezoid otherwise
            double wt;
            if (n % 2 == 0)
                wt = (j == 0 || j == n) ? h / 3.0 : (j % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
            else
                wt = (j == 0 || j == n) ? h / 2.0 : h;
            fq.weight.push_back(wt);
        }
    } else if (codim == 2) {
        if (n < 2)
            throw Error(ErrorKind::Validation, "fiber_quadrature: need n_r >= 2");
        if (nTheta <= 0)
            nTheta = 2 * n;
        double dr = 1.0 / (n - 0.5);
        double dt = 2.0 * std::numbers::pi / nTheta;
        for (int j = 0; j < n; ++j)
            fq.r.push_back(j == n - 1 ? 1.0 : (j + 0.5) * dr);
        for (int q = 0; q < nTheta; ++q)
            fq.theta.push_back(q * dt);
        for (int j = 0; j < n; ++j)
            for (int q = 0; q < nTheta; ++q) {
                // midpoint rule on [j dr, (j+1) dr]; the outer half ring sits on the boundary
                double ring = (j == n - 1) ? 0.0 : fq.r[j] * dr;
                fq.weight.push_back(ring * dt);
            }
    } else {
        throw Error(ErrorKind::Unsupported, "fiber_quadrature: codim must be 1 or 2");
    }
    return fq;
}

FiberProjection fiber_project(const std::vector<double>& u, const FiberQuadrature& quad)
{
    if (u.size() != quad.size())
        throw Error(ErrorKind::Shape, "fiber_project: sample count does not match the fiber grid");
    FiberProjection out;
    std::vector<double> u0(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) {
        Vec p = quad.point(q);
        u0[q] = ground_state(quad.codim, std::min(1.0, p.norm()));
        out.coefficient += quad.weight[q] * u0[q] * u[q];
    }
    out.projected.resize(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q)
        out.projected[q] = out.coefficient * u0[q];
    return out;
}

} // namespace tube
