#include "tube/oracle.hpp"

#include "tube/fermi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tube {

namespace {

constexpr double kPi = std::numbers::pi;

// first sign change of f on [lo, ...) scanning with step, refined by bisection
double first_root(const std::function<double(double)>& f, double lo, double step, int maxSteps = 200000)
{
    double a = lo, fa = f(a);
    for (int i = 0; i < maxSteps; ++i) {
        double b = a + step, fb = f(b);
        if (fa == 0.0)
            return a;
        if ((fa < 0) != (fb < 0)) {
            for (int it = 0; it < 200 && b - a > 1e-15 * std::abs(b); ++it) {
                double c = 0.5 * (a + b), fc = f(c);
                if ((fa < 0) != (fc < 0))
                    b = c;
                else
                    a = c, fa = fc;
            }
            return 0.5 * (a + b);
        }
        a = b;
        fa = fb;
    }
    throw Error(ErrorKind::Convergence, "oracle root scan failed");
}

std::vector<double> with_multiplicity(const std::function<double(int)>& value, const std::function<int(int)>& mult,
                                      int count)
{
    std::vector<double> out;
    for (int j = 0; static_cast<int>(out.size()) < 4 * count + 8 && j <= count + 2; ++j)
        for (int r = 0; r < mult(j); ++r)
            out.push_back(value(j));
    std::sort(out.begin(), out.end());
    out.resize(std::min<size_t>(out.size(), count));
    return out;
}

} // namespace

double annulus_eigenvalue(double R, double eps, int n)
{
    double a = R - eps, b = R + eps;
    auto f = [&](double k) {
        return std::cyl_bessel_j(n, k * a) * std::cyl_neumann(n, k * b) -
               std::cyl_bessel_j(n, k * b) * std::cyl_neumann(n, k * a);
    };
    double lo = std::sqrt(std::max(1e-6, kPi * kPi / (4 * eps * eps) - 1.0 / (a * a) - 1.0));
    double k = first_root(f, lo, 1e-3 * lo);
    return k * k;
}

double shell_eigenvalue(double R, double eps, int l)
{
    double a = R - eps, b = R + eps;
    auto f = [&](double k) {
        return std::sph_bessel(l, k * a) * std::sph_neumann(l, k * b) -
               std::sph_bessel(l, k * b) * std::sph_neumann(l, k * a);
    };
    double lo = std::sqrt(std::max(1e-6, kPi * kPi / (4 * eps * eps) - 1.0));
    double k = first_root(f, lo, 1e-3 * lo);
    return k * k;
}

double sturm_liouville_lowest(const std::function<double(double)>& p, const std::function<double(double)>& q,
                              const std::function<double(double)>& w, double a, double b, double lambdaLo, int steps)
{
    const double h = (b - a) / steps;
    // y = (f, p f'); returns f(b) for a shot with f(a) = 0, p f'(a) = 1
    auto shoot = [&](double lam) {
        auto rhs = [&](double s, double f, double g, double& df, double& dg) {
            df = g / p(s);
            dg = (q(s) - lam * w(s)) * f;
        };
        double f = 0.0, g = 1.0, s = a;
        for (int i = 0; i < steps; ++i) {
            double k1f, k1g, k2f, k2g, k3f, k3g, k4f, k4g;
            rhs(s, f, g, k1f, k1g);
            rhs(s + h / 2, f + h / 2 * k1f, g + h / 2 * k1g, k2f, k2g);
            rhs(s + h / 2, f + h / 2 * k2f, g + h / 2 * k2g, k3f, k3g);
            rhs(s + h, f + h * k3f, g + h * k3g, k4f, k4g);
            f += h / 6 * (k1f + 2 * k2f + 2 * k3f + k4f);
            g += h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g);
            s += h;
        }
        return f;
    };
    double scale = std::max(1.0, std::abs(lambdaLo));
    return first_root(shoot, lambdaLo, 1e-3 * scale);
}

double annulus_eigenvalue_shooting(double R, double eps, int n)
{
    double a = R - eps, b = R + eps;
    double lo = kPi * kPi / (4 * eps * eps) - 1.0 / (a * a) - 1.0;
    return sturm_liouville_lowest([](double r) { return r; }, [n](double r) { return n * n / r; },
                                  [](double r) { return r; }, a, b, lo);
}

double shell_eigenvalue_shooting(double R, double eps, int l)
{
    double a = R - eps, b = R + eps;
    double lo = kPi * kPi / (4 * eps * eps) - 1.0;
    return sturm_liouville_lowest([](double r) { return r * r; }, [l](double) { return double(l * (l + 1)); },
                                  [](double r) { return r * r; }, a, b, lo);
}

double band_eigenvalue_shooting(double theta0, double Rs, double eps, int n)
{
    double d = eps / Rs;
    double a = theta0 - d, b = theta0 + d;
    if (a <= 0.0 || b >= kPi)
        throw Error(ErrorKind::Domain, "band reaches a pole");
    double cot = 1.0 / std::tan(std::min(a, kPi - b));
    double lo = kPi * kPi / (4 * eps * eps) - (2.0 + cot * cot) / (Rs * Rs) - 1.0;
    return sturm_liouville_lowest([](double t) { return std::sin(t); },
                                  [n](double t) { return n * n / std::sin(t); },
                                  [Rs](double t) { return Rs * Rs * std::sin(t); }, a, b, lo);
}

ExactTube exact_tube_spectrum(const Geometry& geom, double eps, int count)
{
    const auto& P = geom.spec().params;
    const double shift = kPi * kPi / (4 * eps * eps);
    ExactTube out;
    auto angular = [](int j) { return j == 0 ? 1 : 2; };
    switch (geom.spec().kind) {
    case GeomKind::CircleInPlane:
        out.bessel = with_multiplicity([&](int n) { return annulus_eigenvalue(P[0], eps, n) - shift; }, angular, count);
        out.shooting =
            with_multiplicity([&](int n) { return annulus_eigenvalue_shooting(P[0], eps, n) - shift; }, angular, count);
        break;
    case GeomKind::SphereInR3:
        out.bessel = with_multiplicity([&](int l) { return shell_eigenvalue(P[0], eps, l) - shift; },
                                       [](int l) { return 2 * l + 1; }, count);
        out.shooting = with_multiplicity([&](int l) { return shell_eigenvalue_shooting(P[0], eps, l) - shift; },
                                         [](int l) { return 2 * l + 1; }, count);
        break;
    case GeomKind::LatitudeCircleOnSphere: {
        double Rs = P.size() > 1 ? P[1] : 1.0;
        out.shooting = with_multiplicity(
            [&](int n) { return band_eigenvalue_shooting(P[0], Rs, eps, n) - shift; }, angular, count);
        break;
    }
    default: break;
    }
    return out;
}

std::vector<double> closed_form_limit(const Geometry& geom, int count)
{
    const auto& P = geom.spec().params;
    switch (geom.spec().kind) {
    case GeomKind::CircleInPlane: {
        double R = P[0];
        return with_multiplicity([R](int n) { return (n * n - 0.25) / (R * R); },
                                 [](int n) { return n == 0 ? 1 : 2; }, count);
    }
    case GeomKind::SphereInR3: {
        double R = P[0];
        return with_multiplicity([R](int l) { return l * (l + 1) / (R * R); }, [](int l) { return 2 * l + 1; },
                                 count);
    }
    case GeomKind::LatitudeCircleOnSphere: {
        double Rs = P.size() > 1 ? P[1] : 1.0;
        double rad = Rs * std::sin(P[0]);
        double WL = effective_potential(geom, Vec::Constant(1, 0.0));
        return with_multiplicity([&](int n) { return n * n / (rad * rad) + WL; },
                                 [](int n) { return n == 0 ? 1 : 2; }, count);
    }
    default: return {};
    }
}

std::vector<double> fourier_limit(double len, double W, int count)
{
    // the operator is diagonal in exp(2 pi i n s / len)
    std::vector<double> out;
    for (int n = -count; n <= count; ++n) {
        double k = 2 * kPi * n / len;
        out.push_back(k * k + W);
    }
    std::sort(out.begin(), out.end());
    out.resize(count);
    return out;
}

} // namespace tube
