#include "tube/assembly.hpp"

#include "tube/ball.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace tube {

namespace {

constexpr double kPi = std::numbers::pi;

struct CellInfo {
    Vec x;         // submanifold midpoint
    Vec w;         // Cartesian fiber midpoint (empty for limit cells)
    double r = 0.0, theta = 0.0;
    double omega = 1.0; // m0 density in computational coordinates
    Mat jinv;      // d(computational)/d(x, w)
};

struct CellCoef {
    Mat K;
    double c = 0.0;
};

// Exact integrals of products of multilinear basis functions and their derivatives on one cell.
struct RefCell {
    int d = 0, corners = 0;
    std::vector<std::vector<Matrix>> G; // G[a][b](p, q) = int d_a phi_p d_b phi_q
    Matrix M;                           // int phi_p phi_q

    explicit RefCell(const std::vector<double>& h) : d(static_cast<int>(h.size())), corners(1 << h.size())
    {
        auto m1 = [](double hh, int i, int j) { return hh / 6.0 * (i == j ? 2.0 : 1.0); };
        auto k1 = [](double hh, int i, int j) { return (i == j ? 1.0 : -1.0) / hh; };
        auto dm = [](int i, int) { return i == 0 ? -0.5 : 0.5; };   // int phi_i' phi_j
        auto md = [](int, int j) { return j == 0 ? -0.5 : 0.5; };   // int phi_i phi_j'
        G.assign(d, std::vector<Matrix>(d, Matrix::Zero(corners, corners)));
        M = Matrix::Zero(corners, corners);
        for (int p = 0; p < corners; ++p)
            for (int q = 0; q < corners; ++q) {
                auto bit = [](int c, int a) { return (c >> a) & 1; };
                double mm = 1.0;
                for (int a = 0; a < d; ++a)
                    mm *= m1(h[a], bit(p, a), bit(q, a));
                M(p, q) = mm;
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        double v = 1.0;
                        for (int c = 0; c < d; ++c) {
                            int pc = bit(p, c), qc = bit(q, c);
                            if (a == b && c == a)
                                v *= k1(h[c], pc, qc);
                            else if (a != b && c == a)
                                v *= dm(pc, qc);
                            else if (a != b && c == b)
                                v *= md(pc, qc);
                            else
                                v *= m1(h[c], pc, qc);
                        }
                        G[a][b](p, q) = v;
                    }
            }
    }
};

Vec pt(double a)
{
    return Vec::Constant(1, a);
}

// Iterate cells; fn(info, nodes) gets the global (x-major) node index of each corner.
template <class Fn>
void for_each_cell(const FermiGrid& g, bool withFiber, Fn&& fn)
{
    const int lx = static_cast<int>(g.xAxes.size());
    const int lf = withFiber ? static_cast<int>(g.fAxes.size()) : 0;
    std::vector<Axis> axes(g.xAxes);
    if (withFiber)
        axes.insert(axes.end(), g.fAxes.begin(), g.fAxes.end());
    const int d = lx + lf;
    std::vector<int> idx(d, 0);
    std::vector<int> nodes(1 << d);
    auto xnode = [&](const std::vector<int>& node) {
        int v = 0;
        for (int a = 0; a < lx; ++a)
            v = v * g.xAxes[a].n + node[a];
        return v;
    };
    auto fnode = [&](const std::vector<int>& node) {
        int v = 0;
        for (int a = lx; a < d; ++a)
            v = v * axes[a].n + node[a];
        return v;
    };
    std::vector<int> node(d);
    while (true) {
        CellInfo info;
        info.x = Vec(lx);
        for (int a = 0; a < lx; ++a)
            info.x(a) = axes[a].coord(idx[a]) + 0.5 * axes[a].h;
        double sdet = g.geom.sqrt_det_gL(info.x);
        info.omega = sdet;
        info.jinv = Mat::Identity(d, d);
        if (withFiber) {
            if (g.polar) {
                info.r = axes[lx].coord(idx[lx]) + 0.5 * axes[lx].h;
                info.theta = axes[lx + 1].coord(idx[lx + 1]) + 0.5 * axes[lx + 1].h;
                info.w = Vec(2);
                info.w << info.r * std::cos(info.theta), info.r * std::sin(info.theta);
                info.omega *= info.r;
                double c = std::cos(info.theta), s = std::sin(info.theta);
                info.jinv(lx, lx) = c;
                info.jinv(lx, lx + 1) = s;
                info.jinv(lx + 1, lx) = -s / info.r;
                info.jinv(lx + 1, lx + 1) = c / info.r;
            } else {
                info.w = Vec(1);
                info.w(0) = axes[lx].coord(idx[lx]) + 0.5 * axes[lx].h;
            }
        }
        for (int p = 0; p < (1 << d); ++p) {
            for (int a = 0; a < d; ++a) {
                int i = idx[a] + ((p >> a) & 1);
                node[a] = axes[a].periodic ? i % axes[a].n : i;
            }
            nodes[p] = withFiber ? xnode(node) * g.nFiberNodes + fnode(node) : xnode(node);
        }
        fn(info, nodes);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == axes[a].cells()) {
            idx[a] = 0;
            --a;
        }
        if (a < 0)
            break;
    }
}

std::vector<double> spacings(const FermiGrid& g, bool withFiber)
{
    std::vector<double> h;
    for (const Axis& a : g.xAxes)
        h.push_back(a.h);
    if (withFiber)
        for (const Axis& a : g.fAxes)
            h.push_back(a.h);
    return h;
}

// Assemble sum over cells of K_ab G_ab + c M with a coefficient callback, over unknowns.
template <class Coef>
SpMat assemble(const FermiGrid& g, bool withFiber, Coef&& coef)
{
    RefCell ref(spacings(g, withFiber));
    const int d = ref.d, nc = ref.corners;
    std::vector<Eigen::Triplet<double>> trip;
    int n = withFiber ? g.unknowns() : g.nXNodes;
    auto unknown = [&](int node) {
        if (!withFiber)
            return node;
        int f = g.fiberUnknown[node % g.nFiberNodes];
        return f < 0 ? -1 : (node / g.nFiberNodes) * g.nFiberUnknowns + f;
    };
    std::vector<int> un(nc);
    for_each_cell(g, withFiber, [&](const CellInfo& info, const std::vector<int>& nodes) {
        CellCoef cc = coef(info);
        for (int p = 0; p < nc; ++p)
            un[p] = unknown(nodes[p]);
        for (int p = 0; p < nc; ++p) {
            if (un[p] < 0)
                continue;
            for (int q = p; q < nc; ++q) {
                if (un[q] < 0)
                    continue;
                double v = cc.c * ref.M(p, q);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        if (cc.K(a, b) != 0.0)
                            v += cc.K(a, b) * ref.G[a][b](p, q);
                trip.emplace_back(un[p], un[q], v);
                if (q != p)
                    trip.emplace_back(un[q], un[p], v);
            }
        }
    });
    SpMat a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

// horizontal-lift correction cw(i, alpha) = w^mu C_{i mu}^alpha
Mat horizontal_shift(const CurvatureData& cd, const Vec& w)
{
    Mat cw = Mat::Zero(cd.l, cd.codim);
    for (int i = 0; i < cd.l; ++i)
        for (int al = 0; al < cd.codim; ++al)
            for (int mu = 0; mu < cd.codim; ++mu)
                cw(i, al) += w(mu) * cd.conn[i](mu, al);
    return cw;
}

// reference dual metric split: horizontal part and the vertical identity
Mat qh_dual(const CurvatureData& cd, const Vec& w)
{
    const int l = cd.l, k = cd.codim;
    Mat ginv = cd.gL.inverse();
    Mat cw = horizontal_shift(cd, w);
    Mat h(l + k, l + k);
    h.topLeftCorner(l, l) = ginv;
    h.topRightCorner(l, k) = -ginv * cw;
    h.bottomLeftCorner(k, l) = -cw.transpose() * ginv;
    h.bottomRightCorner(k, k) = cw.transpose() * ginv * cw;
    return h;
}

Mat vertical_dual(int l, int k)
{
    Mat v = Mat::Zero(l + k, l + k);
    v.bottomRightCorner(k, k).setIdentity();
    return v;
}

void check_eps(const FermiGrid& g, double eps)
{
    if (!(eps > 0.0) || eps > g.geom.eps_max() * (1.0 + 1e-12))
        throw Error(ErrorKind::Domain, "epsilon outside (0, eps_max] for this geometry");
}

void check_mass(const SpMat& m)
{
    for (int k = 0; k < m.outerSize(); ++k)
        if (!(m.coeff(k, k) > 0.0))
            throw Error(ErrorKind::Assembly, "assembled mass matrix has a non-positive diagonal");
}

} // namespace

Vec FermiGrid::x_of(int xnode) const
{
    const int lx = static_cast<int>(xAxes.size());
    Vec x(lx);
    for (int a = lx - 1; a >= 0; --a) {
        x(a) = xAxes[a].coord(xnode % xAxes[a].n);
        xnode /= xAxes[a].n;
    }
    return x;
}

Vec FermiGrid::w_of(int fnode) const
{
    if (!polar)
        return pt(fAxes[0].coord(fnode));
    int nt = fAxes[1].n;
    double r = fAxes[0].coord(fnode / nt), t = fAxes[1].coord(fnode % nt);
    Vec w(2);
    w << r * std::cos(t), r * std::sin(t);
    return w;
}

int FermiGrid::fiber_node(int funk) const
{
    for (int f = 0; f < nFiberNodes; ++f)
        if (fiberUnknown[f] == funk)
            return f;
    return -1;
}

FermiGrid build_grid(const Geometry& geom, int nx, int nfiber)
{
    if (nx < 16 || nfiber < 8)
        throw Error(ErrorKind::Validation, "build_grid: need n_x >= 16 and n_fiber >= 8");
    FermiGrid g(geom);
    g.l = geom.l();
    g.codim = geom.codim();
    g.nx = nx;
    g.nfiber = nfiber;
    auto axes = geom.param_axes();
    if (geom.spec().kind == GeomKind::SphereInR3) {
        if (nx % 2 != 0)
            throw Error(ErrorKind::Validation, "build_grid: SphereInR3 needs an even n_x");
        int nt = nx / 2;
        double h = kPi / nt;
        g.xAxes.push_back({nt, 0.5 * h, h, false, false, false});
        g.xAxes.push_back({nx, 0.0, 2 * kPi / nx, true, false, false});
    } else {
        const ParamAxis& a = axes[0];
        g.xAxes.push_back({nx, a.lo, (a.hi - a.lo) / nx, true, false, false});
    }
    if (g.codim == 1) {
        g.fAxes.push_back({nfiber + 1, -1.0, 2.0 / nfiber, false, true, true});
    } else {
        g.polar = true;
        double dr = 1.0 / (nfiber - 0.5);
        g.fAxes.push_back({nfiber, 0.5 * dr, dr, false, false, true});
        g.fAxes.push_back({2 * nfiber, 0.0, 2 * kPi / (2 * nfiber), true, false, false});
    }
    g.nXNodes = 1;
    for (const Axis& a : g.xAxes)
        g.nXNodes *= a.n;
    g.nFiberNodes = 1;
    for (const Axis& a : g.fAxes)
        g.nFiberNodes *= a.n;
    g.fiberUnknown.assign(g.nFiberNodes, -1);
    std::vector<double> fweight(g.nFiberNodes);
    int count = 0;
    for (int f = 0; f < g.nFiberNodes; ++f) {
        bool dir;
        double wt;
        if (!g.polar) {
            const Axis& a = g.fAxes[0];
            dir = (f == 0 && a.dirLo) || (f == a.n - 1 && a.dirHi);
            wt = (f == 0 || f == a.n - 1) ? 0.5 * a.h : a.h;
        } else {
            const Axis &ar = g.fAxes[0], &at = g.fAxes[1];
            int ir = f / at.n;
            dir = ir == ar.n - 1;
            wt = (dir ? 0.5 * ar.h : ar.h) * ar.coord(ir) * at.h;
        }
        fweight[f] = wt;
        if (!dir)
            g.fiberUnknown[f] = count++;
    }
    g.nFiberUnknowns = count;
    g.weights.resize(static_cast<Eigen::Index>(g.nXNodes) * g.nFiberNodes);
    g.dirichletMask.resize(g.weights.size());
    for (int xn = 0; xn < g.nXNodes; ++xn) {
        double xw = geom.sqrt_det_gL(g.x_of(xn));
        for (const Axis& a : g.xAxes)
            xw *= a.h;
        for (int f = 0; f < g.nFiberNodes; ++f) {
            g.weights(xn * g.nFiberNodes + f) = xw * fweight[f];
            g.dirichletMask[xn * g.nFiberNodes + f] = g.fiberUnknown[f] < 0;
        }
    }
    return g;
}

FiberPencil fiber_pencil(const FermiGrid& grid)
{
    // fiber-only grid on the same fiber axes
    FermiGrid fg(grid.geom);
    fg.l = 0;
    fg.codim = grid.codim;
    fg.polar = grid.polar;
    fg.fAxes = grid.fAxes;
    fg.nXNodes = 1;
    fg.nFiberNodes = grid.nFiberNodes;
    fg.nFiberUnknowns = grid.nFiberUnknowns;
    fg.fiberUnknown = grid.fiberUnknown;
    RefCell ref(spacings(fg, true));
    const int d = ref.d, nc = ref.corners, n = fg.nFiberUnknowns;
    FiberPencil fp;
    fp.K = Matrix::Zero(n, n);
    fp.M = Matrix::Zero(n, n);
    for_each_cell(fg, true, [&](const CellInfo& info, const std::vector<int>& nodes) {
        Mat K = Mat::Identity(d, d);
        double om = 1.0;
        if (fg.polar) {
            om = info.r;
            K(0, 0) = info.r;
            K(1, 1) = 1.0 / info.r;
        }
        for (int p = 0; p < nc; ++p) {
            int up = fg.fiberUnknown[nodes[p]];
            if (up < 0)
                continue;
            for (int q = 0; q < nc; ++q) {
                int uq = fg.fiberUnknown[nodes[q]];
                if (uq < 0)
                    continue;
                double v = 0.0;
                for (int a = 0; a < d; ++a)
                    v += K(a, a) * ref.G[a][a](p, q);
                fp.K(up, uq) += v;
                fp.M(up, uq) += om * ref.M(p, q);
            }
        }
    });
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(fp.K, fp.M);
    fp.lambda0h = es.eigenvalues()(0);
    fp.lambda1h = es.eigenvalues()(1);
    fp.u0 = es.eigenvectors().col(0);
    if (fp.u0.sum() < 0)
        fp.u0 = -fp.u0;
    fp.u0 /= std::sqrt(fp.u0.dot(fp.M * fp.u0));
    return fp;
}

FiberPencil fiber_pencil(int codim, int nfiber)
{
    GeometrySpec spec = codim == 1 ? circle_in_plane(1.0) : space_curve(1.0, 0.0);
    return fiber_pencil(build_grid(Geometry(spec), 16, nfiber));
}

FormParts assemble_parts(const FermiGrid& grid)
{
    const int l = grid.l, k = grid.codim, d = l + k;
    const Geometry& geom = grid.geom;
    FormParts parts;
    parts.mass = assemble(grid, true, [&](const CellInfo& c) { return CellCoef{Mat::Zero(d, d), c.omega}; });
    check_mass(parts.mass);
    parts.qH = assemble(grid, true, [&](const CellInfo& c) {
        CurvatureData cd = geom.curvature_at(c.x);
        return CellCoef{c.omega * c.jinv * qh_dual(cd, c.w) * c.jinv.transpose(), 0.0};
    });
    parts.qVraw = assemble(grid, true, [&](const CellInfo& c) {
        return CellCoef{c.omega * c.jinv * vertical_dual(l, k) * c.jinv.transpose(), 0.0};
    });
    parts.q0direct = assemble(grid, true, [&](const CellInfo& c) {
        CurvatureData cd = geom.curvature_at(c.x);
        Mat cw = horizontal_shift(cd, c.w);
        // g0 = [[gL + cw cw^T, cw], [cw^T, I]], inverted as a whole
        Mat g0(d, d);
        g0.topLeftCorner(l, l) = cd.gL + cw * cw.transpose();
        g0.topRightCorner(l, k) = cw;
        g0.bottomLeftCorner(k, l) = cw.transpose();
        g0.bottomRightCorner(k, k).setIdentity();
        return CellCoef{c.omega * c.jinv * g0.inverse() * c.jinv.transpose(), 0.0};
    });
    parts.massWL = assemble(grid, true, [&](const CellInfo& c) {
        return CellCoef{Mat::Zero(d, d), c.omega * effective_potential(geom, c.x)};
    });
    return parts;
}

FormPair assemble_rescaled_form(const FermiGrid& grid, const FiberPencil& fiber, double eps, double alpha)
{
    check_eps(grid, eps);
    const int l = grid.l, k = grid.codim, d = l + k;
    const Geometry& geom = grid.geom;
    Mat D = Mat::Identity(d, d);
    D.bottomRightCorner(k, k) *= 1.0 / eps;
    const double shift = fiber.lambda0h / (eps * eps);
    FormPair fp;
    fp.epsilon = eps;
    fp.alpha = alpha;
    fp.lambda0h = fiber.lambda0h;
    fp.kind = "rescaled";
    fp.stiffness = assemble(grid, true, [&](const CellInfo& c) {
        Vec w = eps * c.w;
        TubeMetric tm = geom.exact_tube_metric(c.x, w);
        Mat gs = D * tm.g.inverse() * D;
        double W = potential_W(geom, c.x, w);
        return CellCoef{c.omega * c.jinv * gs * c.jinv.transpose(), c.omega * (W + alpha - shift)};
    });
    fp.mass = assemble(grid, true, [&](const CellInfo& c) { return CellCoef{Mat::Zero(d, d), c.omega}; });
    check_mass(fp.mass);
    return fp;
}

FormPair assemble_reference_form(const FermiGrid& grid, const FiberPencil& fiber, double eps, double alpha)
{
    check_eps(grid, eps);
    const int l = grid.l, k = grid.codim, d = l + k;
    const Geometry& geom = grid.geom;
    const double shift = fiber.lambda0h / (eps * eps);
    FormPair fp;
    fp.epsilon = eps;
    fp.alpha = alpha;
    fp.lambda0h = fiber.lambda0h;
    fp.kind = "reference";
    // horizontal block carries no epsilon; only the vertical identity is scaled
    fp.stiffness = assemble(grid, true, [&](const CellInfo& c) {
        CurvatureData cd = geom.curvature_at(c.x);
        Mat h = qh_dual(cd, c.w) + vertical_dual(l, k) / (eps * eps);
        return CellCoef{c.omega * c.jinv * h * c.jinv.transpose(), c.omega * (alpha - shift)};
    });
    fp.mass = assemble(grid, true, [&](const CellInfo& c) { return CellCoef{Mat::Zero(d, d), c.omega}; });
    check_mass(fp.mass);
    return fp;
}

SpMat q0_matrix(const FormParts& parts, const FiberPencil& fiber)
{
    (void)fiber;
    // qV + qH + lambda0h M = (qVraw - lambda0h M) + qH + lambda0h M
    return SpMat(parts.qVraw + parts.qH);
}

FormPair assemble_limit_form(const FermiGrid& grid, double alpha)
{
    const int l = grid.l;
    const Geometry& geom = grid.geom;
    FormPair fp;
    fp.alpha = alpha;
    fp.kind = "limit";
    fp.stiffness = assemble(grid, false, [&](const CellInfo& c) {
        CurvatureData cd = geom.curvature_at(c.x);
        return CellCoef{c.omega * cd.gL.inverse(), c.omega * (effective_potential(cd) + alpha)};
    });
    fp.mass = assemble(grid, false, [&](const CellInfo& c) { return CellCoef{Mat::Zero(l, l), c.omega}; });
    check_mass(fp.mass);
    return fp;
}

Vector fiber_coefficients(const FermiGrid& grid, const FiberPencil& fiber, const Vector& u)
{
    if (u.size() != grid.unknowns())
        throw Error(ErrorKind::Shape, "vector does not match the grid");
    const int nf = grid.nFiberUnknowns;
    Vector mu0 = fiber.M * fiber.u0;
    Vector c(grid.nXNodes);
    for (int x = 0; x < grid.nXNodes; ++x)
        c(x) = mu0.dot(u.segment(static_cast<Eigen::Index>(x) * nf, nf));
    return c;
}

Vector lift_E0(const FermiGrid& grid, const FiberPencil& fiber, const Vector& v)
{
    if (v.size() != grid.nXNodes)
        throw Error(ErrorKind::Shape, "limit vector does not match the grid");
    const int nf = grid.nFiberUnknowns;
    Vector u(grid.unknowns());
    for (int x = 0; x < grid.nXNodes; ++x)
        u.segment(static_cast<Eigen::Index>(x) * nf, nf) = v(x) * fiber.u0;
    return u;
}

Vector project_E0(const FermiGrid& grid, const FiberPencil& fiber, const Vector& u)
{
    return lift_E0(grid, fiber, fiber_coefficients(grid, fiber, u));
}

void dump_matrix(const SpMat& a, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Validation, "cannot open " + path);
    char buf[96];
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                          static_cast<long long>(it.col() + 1), it.value());
            out << buf;
        }
}

} // namespace tube
