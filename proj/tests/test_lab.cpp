#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tube/lab.hpp"

#include <cmath>
#include <numbers>

using namespace tube;

namespace {

StudyConfig small_circle()
{
    StudyConfig c;
    c.epsilons = {0.2, 0.1, 0.05};
    c.k = 3;
    c.nx = 64;
    c.nfiber = 8;
    c.refine = false;
    c.samples = 20;
    return c;
}

template <class F>
void expect_kind(F&& f, ErrorKind kind)
{
    try {
        f();
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == kind);
    }
}

} // namespace

TEST_CASE("config validation")
{
    StudyConfig c = small_circle();
    CHECK_NOTHROW(validate(c));
    auto bad = [&](auto edit, ErrorKind kind) {
        StudyConfig d = small_circle();
        edit(d);
        expect_kind([&] { validate(d); }, kind);
    };
    bad([](StudyConfig& d) { d.k = 0; }, ErrorKind::Validation);
    bad([](StudyConfig& d) { d.epsilons.clear(); }, ErrorKind::Validation);
    bad([](StudyConfig& d) { d.epsilons = {0.9}; }, ErrorKind::Validation);
    bad([](StudyConfig& d) { d.samples = 0; }, ErrorKind::Validation);
    bad([](StudyConfig& d) { d.times = {-1.0}; }, ErrorKind::Validation);
}

TEST_CASE("auto alpha covers the negative potential")
{
    StudyConfig c = small_circle();
    double a = resolve_alpha(c);
    // circle: sup(-W_L) = 1/4
    CHECK(a >= 0.25);
    c.alpha = 3.0;
    CHECK(resolve_alpha(c) == 3.0);
}

TEST_CASE("parallel_for fills every slot and rethrows")
{
    std::vector<int> v(37, 0);
    parallel_for(37, 3, [&](int i) { v[i] = i * i; });
    for (int i = 0; i < 37; ++i)
        CHECK(v[i] == i * i);
    CHECK_THROWS_AS(parallel_for(5, 2, [](int i) {
        if (i == 3)
            throw Error(ErrorKind::Domain, "x");
    }),
                    Error);
}

TEST_CASE("eigen study on the circle")
{
    StudyConfig c = small_circle();
    EigenStudy st = eigenvalue_convergence_study(c);
    REQUIRE(st.rows.size() == 9);
    CHECK(st.muLimit[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(st.muLimit[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(st.tubeOracleDefect < 1e-6);
    CHECK(st.limitOracleDefect < 1e-6);
    for (int k = 0; k < 3; ++k)
        CHECK(st.rows[6 + k].abs_err < st.rows[k].abs_err);
    CHECK(std::abs(st.lambda0 - std::numbers::pi * std::numbers::pi / 4) < 1e-12);
    for (const EigenRow& r : st.rows) {
        CHECK(std::isfinite(r.exact_tube));
        CHECK(r.grid_nx == 64);
    }

    EigenStudy again = eigenvalue_convergence_study(c);
    for (std::size_t i = 0; i < st.rows.size(); ++i)
        CHECK(st.rows[i].lambda_eps == again.rows[i].lambda_eps);

    c.threads = 2;
    EigenStudy threaded = eigenvalue_convergence_study(c);
    for (std::size_t i = 0; i < st.rows.size(); ++i)
        CHECK(st.rows[i].lambda_eps == threaded.rows[i].lambda_eps);
}

TEST_CASE("eigen study with refinement reports a grid delta")
{
    StudyConfig c = small_circle();
    c.epsilons = {0.2};
    c.k = 1;
    c.nx = 32;
    c.refine = true;
    EigenStudy st = eigenvalue_convergence_study(c);
    REQUIRE(st.rows.size() == 1);
    CHECK(std::isfinite(st.rows[0].grid_delta));
    CHECK(std::abs(st.rows[0].lambda_refined - st.rows[0].lambda_eps) == doctest::Approx(st.rows[0].grid_delta));
}

TEST_CASE("semigroup study on the circle")
{
    StudyConfig c = small_circle();
    SemigroupStudy st = semigroup_convergence_study(c);
    CHECK(st.pairs >= 3);
    CHECK(st.contractOk);
    for (double t : c.times) {
        CHECK(st.err("range_E0", 0.05, t) < st.err("range_E0", 0.2, t));
        CHECK(st.err("generic", 0.05, t) < st.err("generic", 0.2, t));
        CHECK(std::abs(st.err("sequence", 0.05, t) - st.err("generic", 0.05, t)) < 1e-3);
    }
    CHECK(std::isnan(st.err("nothing", 0.05, 1.0)));
}

TEST_CASE("kato and coercivity on the circle")
{
    StudyConfig c = small_circle();
    KatoStudy k = kato_check(c);
    REQUIRE(k.rows.size() == 3);
    for (const KatoRow& r : k.rows) {
        CHECK(std::isfinite(r.ratio));
        CHECK(r.nonFinite == 0);
        CHECK(r.minF0 > 0);
    }
    // on lifted smooth functions the ratio shrinks with eps
    CHECK(k.rows[2].ratioE0 < k.rows[0].ratioE0);
    CHECK(std::isfinite(k.K));

    CoercivityStudy co = coercivity_check(c, k.K);
    CHECK(co.contractOk);
    for (const CoercivityRow& r : co.rows) {
        CHECK(r.violations == 0);
        CHECK(r.marginInduced >= 0);
        CHECK(r.marginReference >= 0);
    }
}

TEST_CASE("asymptotics on curved and flat tubes")
{
    std::vector<double> eps{0.2, 0.1, 0.05};
    AsymptoticsStudy circ = asymptotics_check(Geometry(circle_in_plane(1.0)), eps);
    CHECK(circ.contractOk);
    for (int q = 0; q < 4; ++q)
        CHECK(circ.slope[q] >= 0.9);

    AsymptoticsStudy flat = asymptotics_check(Geometry(plane_curve(2 * std::numbers::pi, std::vector<double>(8, 0.0))), eps);
    CHECK(flat.contractOk);
    for (const AsymptoticsRow& r : flat.rows)
        for (int q = 0; q < 4; ++q)
            CHECK(r.q[q] == 0.0);
}

TEST_CASE("smoothed noise is seeded and normalized")
{
    SpMat m(4, 4);
    for (int i = 0; i < 4; ++i)
        m.insert(i, i) = 1.0 + i;
    Vector a = smoothed_noise(m, 7), b = smoothed_noise(m, 7), c = smoothed_noise(m, 8);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() > 0.0);
    CHECK(std::sqrt(a.dot(m * a)) == doctest::Approx(1.0).epsilon(1e-12));
}
