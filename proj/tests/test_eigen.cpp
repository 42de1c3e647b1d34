#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tube/eigen.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace tube;

namespace {

const double pi = std::numbers::pi;

// three-point Dirichlet Laplacian on (-1, 1) with a consistent P1 mass
void interval_pencil(int cells, SpMat& a, SpMat& m)
{
    int n = cells - 1;
    double h = 2.0 / cells;
    std::vector<Eigen::Triplet<double>> ta, tm;
    for (int i = 0; i < n; ++i) {
        ta.emplace_back(i, i, 2 / h);
        tm.emplace_back(i, i, 4 * h / 6);
        if (i + 1 < n) {
            ta.emplace_back(i, i + 1, -1 / h);
            ta.emplace_back(i + 1, i, -1 / h);
            tm.emplace_back(i, i + 1, h / 6);
            tm.emplace_back(i + 1, i, h / 6);
        }
    }
    a.resize(n, n);
    m.resize(n, n);
    a.setFromTriplets(ta.begin(), ta.end());
    m.setFromTriplets(tm.begin(), tm.end());
}

} // namespace

TEST_CASE("interval Dirichlet pencil")
{
    SpMat a, m;
    interval_pencil(200, a, m);
    SpectrumResult r = lowest_eigenpairs(a, m, 4);
    CHECK(r.method == "lobpcg");
    CHECK(std::abs(r.eigenvalues(0) - pi * pi / 4) < 1e-4 * pi * pi / 4);
    SpectrumResult d = dense_eigenpairs(a, m, 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(r.eigenvalues(j) - d.eigenvalues(j)) < 1e-8 * d.eigenvalues(j));
        CHECK(std::abs(r.eigenvalues(j) - pi * pi * (j + 1) * (j + 1) / 4) < 1e-3 * r.eigenvalues(j));
    }
    // ascending, M-orthonormal, residuals below tolerance
    for (int j = 1; j < 4; ++j)
        CHECK(r.eigenvalues(j) > r.eigenvalues(j - 1));
    Matrix G = r.eigenvectors.transpose() * (m * r.eigenvectors);
    CHECK((G - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 0; j < 4; ++j) {
        CHECK(r.residuals(j) <= r.tol * std::max(1.0, r.eigenvalues(j)));
        Vector v = r.eigenvectors.col(j);
        double rq = v.dot(a * v) / v.dot(m * v);
        CHECK(std::abs(rq - r.eigenvalues(j)) <= 10 * r.tol);
    }
}

TEST_CASE("identity pencil")
{
    SpMat m, a;
    interval_pencil(50, a, m);
    SpectrumResult r = lowest_eigenpairs(m, m, 5);
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(r.eigenvalues(j) - 1.0) < 1e-12);
}

TEST_CASE("annulus pencil against the dense solver")
{
    Geometry geom(circle_in_plane(1.0));
    FermiGrid g = build_grid(geom, 64, 32);
    FiberPencil fp = fiber_pencil(g);
    double alpha = 1.0;
    FormPair f = assemble_rescaled_form(g, fp, 0.2, alpha);
    SpectrumResult r = lowest_eigenpairs(f, 6);
    SpectrumResult d = dense_eigenpairs(f.stiffness, f.mass, 6);
    for (int j = 0; j < 6; ++j)
        CHECK(std::abs(r.eigenvalues(j) - d.eigenvalues(j)) < 1e-8 * std::max(1.0, std::abs(d.eigenvalues(j))));
    // deterministic given the seed
    SpectrumResult again = lowest_eigenpairs(f, 6);
    CHECK((again.eigenvalues - r.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    // warm start from the dense vectors converges at once
    SolverOptions warm;
    warm.warmStart = d.eigenvectors;
    SpectrumResult w = lowest_eigenpairs(f, 6, warm);
    CHECK(w.iterations <= 3);
    CHECK(std::abs(w.eigenvalues(5) - d.eigenvalues(5)) < 1e-8 * std::abs(d.eigenvalues(5)));
}

TEST_CASE("solver errors")
{
    SpMat a, m;
    interval_pencil(400, a, m);
    SolverOptions opt;
    opt.maxIter = 3;
    try {
        lowest_eigenpairs(a, m, 4, opt);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Convergence);
    }
    CHECK_THROWS_AS(lowest_eigenpairs(a, m, 21), Error);
    opt = SolverOptions{};
    opt.tol = 1e-12;
    CHECK_THROWS_AS(lowest_eigenpairs(a, m, 2, opt), Error);
    SpMat small, sm;
    interval_pencil(10, small, sm);
    CHECK_THROWS_AS(lowest_eigenpairs(a, sm, 2), Error);
}

TEST_CASE("heat semigroup on the spanned subspace")
{
    SpMat a, m;
    interval_pencil(100, a, m);
    SpectrumResult r = dense_eigenpairs(a, m, 8);
    Vector v0 = r.eigenvectors.col(0);
    for (double t : {0.1, 1.0, 3.0}) {
        HeatResult h = heat_apply(r, t, v0, m);
        CHECK((h.u - std::exp(-0.5 * t * r.eigenvalues(0)) * v0).cwiseAbs().maxCoeff() < 1e-12);
    }
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Vector u(a.rows());
    for (int i = 0; i < u.size(); ++i)
        u(i) = nd(rng);
    HeatResult h12 = heat_apply(r, 1.5, u, m);
    HeatResult h1 = heat_apply(r, 1.0, u, m);
    HeatResult h2 = heat_apply(r, 0.5, h1.u, m);
    CHECK((h12.u - h2.u).norm() < 1e-10 * h12.u.norm());
    // large t: ground mode dominates
    double t = 4.0;
    HeatResult hl = heat_apply(r, t, u, m);
    Vector ground = std::exp(-0.5 * t * r.eigenvalues(0)) * v0.dot(m * u) * v0;
    CHECK((hl.u - ground).norm() < 1e-6 * ground.norm());
    // orthogonal to all pairs
    Vector o = u - r.eigenvectors * (r.eigenvectors.transpose() * (m * u));
    HeatResult ho = heat_apply(r, 1.0, o, m);
    CHECK(ho.u.norm() < 1e-10 * o.norm());
    CHECK(ho.truncationBound > 0.0);
    CHECK(ho.truncationBound <= std::sqrt(o.dot(m * o)));
    // shift
    HeatResult hs = heat_apply(r, 1.0, v0, m, r.eigenvalues(0));
    CHECK((hs.u - v0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(heat_apply(r, 0.0, u, m), Error);
    try {
        heat_apply(r, -1.0, u, m);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
}

TEST_CASE("dual norm")
{
    SpMat a, m;
    interval_pencil(30, a, m);
    Vector r = Vector::LinSpaced(a.rows(), -1, 2);
    Matrix M(m);
    double want = std::sqrt(r.dot(M.ldlt().solve(r)));
    CHECK(std::abs(dual_norm(m, r) - want) < 1e-10 * want);
    CHECK(dual_norm(m, Vector::Zero(a.rows())) == 0.0);
}
