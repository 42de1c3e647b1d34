#include "tube/fermi.hpp"

#include "tube/ball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tube {

Mat FermiJet::a_at(const Vec& w) const
{
    Mat a = a0;
    for (int al = 0; al < codim; ++al) {
        a += w(al) * a1[al];
        for (int be = 0; be < codim; ++be)
            a += w(al) * w(be) * a2[al][be];
    }
    return a;
}

Mat FermiJet::b_at(const Vec& w) const
{
    Mat b = Mat::Identity(codim, codim);
    for (int al = 0; al < codim; ++al)
        for (int be = 0; be < codim; ++be)
            b += w(al) * w(be) * b2[al][be];
    return b;
}

Mat FermiJet::c_at(const Vec& w) const
{
    Mat c = Mat::Zero(l, codim);
    for (int al = 0; al < codim; ++al)
        c += w(al) * c1[al];
    return c;
}

Mat FermiJet::metric_at(const Vec& w) const
{
    Mat a = a_at(w), b = b_at(w), c = c_at(w);
    Mat g(l + codim, l + codim);
    g.topLeftCorner(l, l) = a + c * b.inverse() * c.transpose();
    g.topRightCorner(l, codim) = c;
    g.bottomLeftCorner(codim, l) = c.transpose();
    g.bottomRightCorner(codim, codim) = b;
    return g;
}

double FermiJet::logrho_at(const Vec& w) const
{
    double v = 0.0;
    for (int al = 0; al < codim; ++al) {
        v += w(al) * logrho1[al];
        for (int be = 0; be < codim; ++be)
            v += w(al) * w(be) * logrho2(al, be);
    }
    return v;
}

FermiJet metric_jet(const Geometry& geom, const Vec& x)
{
    CurvatureData cd = geom.curvature_at(x);
    const int l = cd.l, k = cd.codim;
    FermiJet j;
    j.l = l;
    j.codim = k;
    j.a0 = cd.gL;
    j.a1.resize(k);
    j.c1.resize(k);
    j.a2.assign(k, std::vector<Mat>(k));
    j.b2.assign(k, std::vector<Mat>(k));
    j.logrho1.resize(k);
    j.logrho2 = Matrix::Zero(k, k);
    for (int al = 0; al < k; ++al) {
        const Mat& A = cd.weingarten[al];
        j.a1[al] = -2.0 * sym(cd.gL * A);
        j.logrho1[al] = -A.trace();
        j.c1[al] = Mat::Zero(l, k);
        for (int i = 0; i < l; ++i)
            for (int s = 0; s < k; ++s)
                j.c1[al](i, s) = cd.conn[i](al, s);
    }
    for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be) {
            const Mat &Aa = cd.weingarten[al], &Ab = cd.weingarten[be];
            Mat a2 = 0.5 * (Aa.transpose() * cd.gL * Ab + Ab.transpose() * cd.gL * Aa);
            for (int i = 0; i < l; ++i)
                for (int jj = 0; jj < l; ++jj)
                    a2(i, jj) -= 0.5 * (cd.mixed_curv(i, al, jj, be) + cd.mixed_curv(i, be, jj, al));
            j.a2[al][be] = a2;
            Mat b2(k, k);
            for (int mu = 0; mu < k; ++mu)
                for (int s = 0; s < k; ++s)
                    b2(mu, s) = -(cd.fiber_curv(mu, al, s, be) + cd.fiber_curv(mu, be, s, al)) / 6.0;
            j.b2[al][be] = b2;
            double rmu = 0.0, ri = 0.0;
            for (int mu = 0; mu < k; ++mu)
                rmu += 0.5 * (cd.fiber_curv(mu, al, mu, be) + cd.fiber_curv(mu, be, mu, al));
            for (int a = 0; a < l; ++a)
                ri += 0.5 * (cd.ambient(a, l + al, a, l + be) + cd.ambient(a, l + be, a, l + al));
            j.logrho2(al, be) = -0.5 * ((Aa * Ab).trace() + rmu / 3.0 + ri);
        }
    return j;
}

void logrho_from_blocks(const FermiJet& jet, std::vector<double>& first, Matrix& second)
{
    const int k = jet.codim;
    Mat ginv = jet.a0.inverse();
    first.assign(k, 0.0);
    second = Matrix::Zero(k, k);
    for (int al = 0; al < k; ++al)
        first[al] = 0.5 * (ginv * jet.a1[al]).trace();
    for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be) {
            Mat ma = ginv * jet.a1[al], mb = ginv * jet.a1[be];
            Mat mab = ginv * jet.a2[al][be];
            second(al, be) = 0.5 * (mab - 0.25 * (ma * mb + mb * ma)).trace() + 0.5 * jet.b2[al][be].trace();
        }
}

double effective_potential(const CurvatureData& cd)
{
    return 0.5 * cd.scalL - 0.25 * cd.tensionNormSq - (cd.scalM + cd.ricBar + cd.rBar) / 6.0;
}

double effective_potential(const Geometry& geom, const Vec& x) { return effective_potential(geom.curvature_at(x)); }

double effective_potential_raw(const CurvatureData& cd)
{
    const int l = cd.l, k = cd.codim;
    double v = 0.25 * cd.tensionNormSq;
    for (int al = 0; al < k; ++al) {
        Mat a = cd.weingarten[al];
        double rmu = 0.0, ri = 0.0;
        for (int mu = 0; mu < k; ++mu)
            rmu += cd.fiber_curv(mu, al, mu, al);
        for (int i = 0; i < l; ++i)
            ri += cd.ambient(i, l + al, i, l + al);
        v -= 0.5 * ((a * a).trace() + rmu / 3.0 + ri);
    }
    return v;
}

namespace {

struct Stencil {
    const Geometry& geom;
    int l, k, d;
    double h;

    Stencil(const Geometry& g, double step) : geom(g), l(g.l()), k(g.codim()), d(g.l() + g.codim()), h(step) {}

    double logrho(const Vec& z) const
    {
        return std::log(geom.exact_tube_metric(z.head(l), z.tail(k)).rho);
    }

    Vec grad(const Vec& z, double step) const
    {
        Vec gr(d);
        for (int a = 0; a < d; ++a) {
            Vec p = z;
            auto at = [&](double s) {
                p(a) = z(a) + s;
                return logrho(p);
            };
            gr(a) = (at(-2 * step) - 8 * at(-step) + 8 * at(step) - at(2 * step)) / (12 * step);
        }
        return gr;
    }

    Vec flux(const Vec& z) const
    {
        TubeMetric tm = geom.exact_tube_metric(z.head(l), z.tail(k));
        double vol = std::sqrt(tm.g.determinant());
        return vol * tm.g.inverse() * grad(z, h);
    }

    // the whole nested stencil stays inside the coordinate domain
    bool fits(const Vec& z) const
    {
        double reach = 4.0 * h;
        if (z.tail(k).norm() + reach * std::sqrt(double(k)) >= geom.injectivity_bound())
            return false;
        auto axes = geom.param_axes();
        for (int i = 0; i < l; ++i)
            if (!axes[i].periodic && (z(i) - reach <= axes[i].lo || z(i) + reach >= axes[i].hi))
                return false;
        return true;
    }
};

Vec join(const Vec& x, const Vec& w)
{
    Vec z(x.size() + w.size());
    z << x, w;
    return z;
}

Stencil make_stencil(const Geometry& geom, const Vec& z, double h)
{
    Stencil st(geom, h);
    if (st.fits(z))
        return st;
    st.h = h / 8.0;
    if (st.fits(z))
        return st;
    throw Error(ErrorKind::Domain, "potential stencil leaves the tube coordinate domain");
}

} // namespace

Vec grad_log_rho(const Geometry& geom, const Vec& x, const Vec& w, double h)
{
    Vec z = join(x, w);
    Stencil st = make_stencil(geom, z, h);
    return st.grad(z, st.h);
}

double potential_W(const Geometry& geom, const Vec& x, const Vec& w, double h)
{
    Vec z = join(x, w);
    Stencil st = make_stencil(geom, z, h);
    const int d = st.d;
    TubeMetric tm = geom.exact_tube_metric(x, w);
    double vol = std::sqrt(tm.g.determinant());
    double div = 0.0;
    for (int a = 0; a < d; ++a) {
        Vec p = z;
        auto at = [&](double s) {
            p(a) = z(a) + s;
            return st.flux(p)(a);
        };
        double hh = st.h;
        div += (at(-2 * hh) - 8 * at(-hh) + 8 * at(hh) - at(2 * hh)) / (12 * hh);
    }
    div /= vol;
    Vec gr = st.grad(z, st.h);
    double sq = gr.dot(tm.g.inverse() * gr);
    return 0.5 * div - 0.25 * sq;
}

PotentialField::PotentialField(Geometry geom, std::vector<Vec> xSamples) : geom_(std::move(geom))
{
    double lam0 = ball_eigenvalue(geom_.codim(), 0);
    for (const Vec& x : xSamples)
        supNegWL_ = std::max(supNegWL_, -WL(x));
    alphaFloor_ = lam0 + supNegWL_;
}

double PotentialField::WL(const Vec& x) const { return effective_potential(geom_, x); }

double PotentialField::Wfull(const Vec& x, const Vec& w) const { return potential_W(geom_, x, w); }

double PotentialField::W_eps(const Vec& x, const Vec& w, double eps) const { return potential_W(geom_, x, eps * w); }

PotentialField potential_field(const Geometry& geom, const std::vector<Vec>& xSamples)
{
    return PotentialField(geom, xSamples);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RemainderFit jet_remainder_slope(const Geometry& geom, const Vec& x, JetQuantity quantity)
{
    FermiJet jet = metric_jet(geom, x);
    const int l = geom.l(), k = geom.codim();
    std::vector<Vec> dirs;
    if (k == 1) {
        dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    } else {
        for (int q = 0; q < 8; ++q) {
            Vec d(2);
            double t = 2.0 * std::numbers::pi * q / 8 + 0.1;
            d << std::cos(t), std::sin(t);
            dirs.push_back(d);
        }
    }
    RemainderFit fit;
    double scale = 1.0 + jet.a0.cwiseAbs().maxCoeff();
    for (int p = 3; p <= 8; ++p) {
        double r = std::ldexp(geom.eps_max(), -p);
        double worst = 0.0;
        for (const Vec& d : dirs) {
            Vec w = r * d;
            TubeMetric tm = geom.exact_tube_metric(x, w);
            if (quantity == JetQuantity::Metric) {
                Mat b = tm.g.bottomRightCorner(k, k), c = tm.g.topRightCorner(l, k);
                Mat a = tm.g.topLeftCorner(l, l) - c * b.inverse() * c.transpose();
                worst = std::max(worst, (a - jet.a_at(w)).cwiseAbs().maxCoeff());
                worst = std::max(worst, (b - jet.b_at(w)).cwiseAbs().maxCoeff());
                worst = std::max(worst, (c - jet.c_at(w)).cwiseAbs().maxCoeff());
            } else {
                worst = std::max(worst, std::abs(std::log(tm.rho) - jet.logrho_at(w)));
            }
        }
        fit.radii.push_back(r);
        fit.remainders.push_back(worst);
    }
    double biggest = *std::max_element(fit.remainders.begin(), fit.remainders.end());
    // a polynomial metric matches its jet up to rounding at every radius
    if (biggest <= 1e-13 * scale) {
        fit.exactMatch = true;
        fit.slope = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.slope = loglog_slope(fit.radii, fit.remainders);
    return fit;
}

} // namespace tube
