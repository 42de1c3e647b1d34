#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tube/oracle.hpp"

#include <cmath>
#include <numbers>

using namespace tube;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("annulus roots agree with shooting")
{
    for (double eps : {0.2, 0.1, 0.05})
        for (int n : {0, 1, 2, 3}) {
            double b = annulus_eigenvalue(1.0, eps, n), s = annulus_eigenvalue_shooting(1.0, eps, n);
            CHECK(std::abs(b - s) < 1e-6 * b);
            // renormalized value approaches n^2 - 1/4
            double ren = b - pi * pi / (4 * eps * eps);
            CHECK(std::abs(ren - (n * n - 0.25)) < 0.1 + 2 * eps * n * n);
        }
}

TEST_CASE("shell roots agree with shooting")
{
    for (double eps : {0.2, 0.05})
        for (int l : {0, 1, 2}) {
            double b = shell_eigenvalue(1.0, eps, l), s = shell_eigenvalue_shooting(1.0, eps, l);
            CHECK(std::abs(b - s) < 1e-6 * b);
        }
    // l = 0 shell: u = r f is a plain sine, Lambda = (pi / 2 eps)^2 exactly
    CHECK(std::abs(shell_eigenvalue(1.0, 0.1, 0) - pi * pi / 0.04) < 1e-9 * pi * pi / 0.04);
}

TEST_CASE("band on the sphere")
{
    // equatorial band, n = 0: symmetric, approaches W_L = -1/2
    double eps = 0.05;
    double v = band_eigenvalue_shooting(pi / 2, 1.0, eps, 0) - pi * pi / (4 * eps * eps);
    CHECK(std::abs(v + 0.5) < 0.05);
    double v1 = band_eigenvalue_shooting(pi / 2, 1.0, eps, 1) - pi * pi / (4 * eps * eps);
    CHECK(std::abs(v1 - 0.5) < 0.05);
    CHECK_THROWS_AS(band_eigenvalue_shooting(0.05, 1.0, 0.1, 0), Error);
}

TEST_CASE("shooting on a plain interval")
{
    // -f'' = Lambda f on (0, 2): pi^2 / 4
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    double l = sturm_liouville_lowest(one, zero, one, 0.0, 2.0, 0.0);
    CHECK(std::abs(l - pi * pi / 4) < 1e-10);
}

TEST_CASE("limit spectra")
{
    auto c = closed_form_limit(Geometry(circle_in_plane(1.0)), 4);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == doctest::Approx(-0.25));
    CHECK(c[1] == doctest::Approx(0.75));
    CHECK(c[2] == doctest::Approx(0.75));
    CHECK(c[3] == doctest::Approx(3.75));
    auto f = fourier_limit(2 * pi, -0.25, 4);
    for (int j = 0; j < 4; ++j)
        CHECK(std::abs(f[j] - c[j]) < 1e-12);
    auto s = closed_form_limit(Geometry(sphere_in_r3(1.0)), 4);
    CHECK(s == std::vector<double>{0, 2, 2, 2});
    auto b = closed_form_limit(Geometry(latitude_circle(pi / 2)), 3);
    CHECK(b[0] == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(closed_form_limit(Geometry(space_curve(1.0, 0.3)), 3).empty());
}

TEST_CASE("exact tube spectra")
{
    ExactTube t = exact_tube_spectrum(Geometry(circle_in_plane(1.0)), 0.1, 4);
    REQUIRE(t.bessel.size() == 4);
    CHECK(t.bessel[1] == doctest::Approx(t.bessel[2]));
    for (int j = 0; j < 4; ++j)
        CHECK(std::abs(t.bessel[j] - t.shooting[j]) < 1e-6 * (t.bessel[j] + pi * pi / 0.04));
    ExactTube s = exact_tube_spectrum(Geometry(sphere_in_r3(1.0)), 0.1, 4);
    CHECK(s.bessel[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(s.bessel[1] == s.bessel[3]);
}
