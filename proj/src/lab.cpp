#include "tube/lab.hpp"

#include "tube/ball.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace tube {

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// rethrow with the epsilon attached, keeping the kind
template <class Fn>
auto at_eps(double eps, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), "eps=" + fmt(eps) + ": " + e.what());
    }
}

struct GridSet {
    FermiGrid grid;
    FiberPencil fiber;
    FormPair limit;
    SpectrumResult limitSpec;
};

GridSet make_grid_set(const Geometry& geom, int nx, int nfiber, double alpha, int pairs)
{
    FermiGrid g = build_grid(geom, nx, nfiber);
    FiberPencil fp = fiber_pencil(g);
    FormPair lim = assemble_limit_form(g, alpha);
    SolverOptions opt;
    opt.method = SolverMethod::Auto;
    SpectrumResult ls = lowest_eigenpairs(lim, std::min({pairs, 20, g.nXNodes}), opt);
    return {std::move(g), std::move(fp), std::move(lim), std::move(ls)};
}

Matrix lifted_columns(const GridSet& gs, int count)
{
    int c = std::min<int>(count, static_cast<int>(gs.limitSpec.eigenvectors.cols()));
    Matrix w(gs.grid.unknowns(), c);
    for (int j = 0; j < c; ++j)
        w.col(j) = lift_E0(gs.grid, gs.fiber, gs.limitSpec.eigenvectors.col(j));
    return w;
}

SpectrumResult solve_tube(const StudyConfig& cfg, const GridSet& gs, const FormPair& f, int k)
{
    SolverOptions opt;
    opt.tol = cfg.tol;
    opt.seed = cfg.seed;
    opt.maxIter = cfg.maxIter;
    opt.warmStart = lifted_columns(gs, k + 3);
    return lowest_eigenpairs(f, k, opt);
}

// fiber coordinate of a grid unknown
template <class Fn>
Vector grid_function(const FermiGrid& g, Fn&& fn)
{
    Vector u(g.unknowns());
    const int nf = g.nFiberUnknowns;
    std::vector<Vec> ws(nf);
    for (int f = 0; f < nf; ++f)
        ws[f] = g.w_of(g.fiber_node(f));
    for (int x = 0; x < g.nXNodes; ++x) {
        Vec X = g.x_of(x);
        for (int f = 0; f < nf; ++f)
            u(static_cast<Eigen::Index>(x) * nf + f) = fn(X, ws[f]);
    }
    return u;
}

// two smooth functions on L
std::pair<double, double> smooth_pair(const Geometry& geom, const Vec& x)
{
    if (geom.l() == 2) {
        double th = x(0), ph = x(1);
        return {1 + std::cos(th) + 0.5 * std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph)};
    }
    ParamAxis a = geom.param_axes()[0];
    double s = 2 * kPi * (x(0) - a.lo) / (a.hi - a.lo);
    return {1 + std::cos(s) + 0.5 * std::sin(2 * s), std::sin(s)};
}

double mnorm(const SpMat& m, const Vector& u)
{
    return std::sqrt(std::max(0.0, u.dot(m * u)));
}

} // namespace

int default_threads()
{
    if (const char* env = std::getenv("TUBE_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn)
{
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::vector<Vec> x_samples(const Geometry& geom, int perAxis)
{
    std::vector<Vec> xs;
    auto axes = geom.param_axes();
    if (geom.l() == 2) {
        for (int i = 0; i < perAxis; ++i)
            for (int j = 0; j < perAxis; ++j) {
                Vec x(2);
                x << (i + 0.5) * kPi / perAxis, 2 * kPi * j / perAxis;
                xs.push_back(x);
            }
    } else {
        for (int i = 0; i < perAxis; ++i)
            xs.push_back(Vec::Constant(1, axes[0].lo + (axes[0].hi - axes[0].lo) * i / perAxis));
    }
    return xs;
}

void validate(const StudyConfig& cfg)
{
    Geometry geom(cfg.geom);
    auto fail = [](const std::string& m) { throw Error(ErrorKind::Validation, m); };
    if (cfg.epsilons.empty())
        fail("epsilon ladder is empty");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        double e = cfg.epsilons[i];
        if (!(e > 0.0) || e > geom.eps_max() * (1 + 1e-12))
            fail("epsilon " + fmt(e) + " outside (0, eps_max = " + fmt(geom.eps_max()) + "]");
        if (i > 0 && !(e < cfg.epsilons[i - 1]))
            fail("epsilon ladder must be strictly descending");
    }
    if (cfg.k < 1 || cfg.k > 20)
        fail("k must be in [1, 20]");
    if (cfg.nx < 16 || cfg.nfiber < 8)
        fail("grid needs n_x >= 16 and n_fiber >= 8");
    if (cfg.samples < 1)
        fail("samples must be positive");
    if (!(cfg.tol >= 1e-10))
        fail("solver tolerance must be >= 1e-10");
    if (cfg.maxIter < 1)
        fail("iteration cap must be positive");
    if (cfg.threads < 1)
        fail("threads must be positive");
    for (double t : cfg.times)
        if (!(t >= 0.1))
            fail("semigroup times must be >= 0.1");
    if (cfg.alpha && !std::isfinite(*cfg.alpha))
        fail("alpha must be finite");
}

double resolve_alpha(const StudyConfig& cfg)
{
    if (cfg.alpha)
        return *cfg.alpha;
    Geometry geom(cfg.geom);
    return PotentialField(geom, x_samples(geom)).alphaFloor();
}

Vector smoothed_noise(const SpMat& mass, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vector xi(mass.rows());
    for (Eigen::Index i = 0; i < xi.size(); ++i)
        xi(i) = nd(rng);
    Vector u = mass * xi;
    return u / mnorm(mass, u);
}

// ---------------------------------------------------------------- eigenvalues

EigenStudy eigenvalue_convergence_study(const StudyConfig& cfg)
{
    validate(cfg);
    auto t0 = std::chrono::steady_clock::now();
    Geometry geom(cfg.geom);
    EigenStudy st;
    st.alpha = resolve_alpha(cfg);
    st.lambda0 = ball_eigenvalue(geom.codim(), 0);
    const int k = cfg.k;
    const GeomKind kind = geom.spec().kind;

    st.muLimit = closed_form_limit(geom, k);
    if (!st.muLimit.empty()) {
        st.muSource = "closed form";
        if (kind == GeomKind::CircleInPlane || kind == GeomKind::LatitudeCircleOnSphere) {
            ParamAxis a = geom.param_axes()[0];
            auto f = fourier_limit(a.hi - a.lo, effective_potential(geom, Vec::Constant(1, 0.0)), k);
            st.limitOracleDefect = 0.0;
            for (int j = 0; j < k; ++j)
                st.limitOracleDefect = std::max(st.limitOracleDefect, std::abs(f[j] - st.muLimit[j]));
            if (st.limitOracleDefect > 1e-6)
                throw Error(ErrorKind::Contract, "limit spectrum disagrees with its Fourier oracle");
        }
    } else {
        int fine = 4 * cfg.nx;
        FermiGrid g = build_grid(geom, fine, 8);
        FormPair lim = assemble_limit_form(g, 0.0);
        SolverOptions opt;
        opt.method = SolverMethod::Auto;
        opt.tol = cfg.tol;
        SpectrumResult s = lowest_eigenpairs(lim, k, opt);
        st.muLimit.assign(s.eigenvalues.data(), s.eigenvalues.data() + k);
        st.muSource = "limit pencil n_x=" + std::to_string(fine);
    }

    // exact tube spectra where the tube separates
    std::vector<std::vector<double>> exact(cfg.epsilons.size());
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        ExactTube ex = exact_tube_spectrum(geom, cfg.epsilons[i], k);
        if (!ex.bessel.empty()) {
            double shift = kPi * kPi / (4 * cfg.epsilons[i] * cfg.epsilons[i]);
            double d = 0.0;
            for (int j = 0; j < k; ++j)
                d = std::max(d, std::abs(ex.bessel[j] - ex.shooting[j]) / (std::abs(ex.bessel[j]) + shift));
            st.tubeOracleDefect = std::isnan(st.tubeOracleDefect) ? d : std::max(st.tubeOracleDefect, d);
            exact[i] = ex.bessel;
        } else {
            exact[i] = ex.shooting;
        }
    }
    if (st.tubeOracleDefect > 1e-6)
        throw Error(ErrorKind::Contract, "Bessel and shooting oracles disagree");

    GridSet base = make_grid_set(geom, cfg.nx, cfg.nfiber, st.alpha, k + 3);
    std::optional<GridSet> fine;
    if (cfg.refine)
        fine.emplace(make_grid_set(geom, 2 * cfg.nx, 2 * cfg.nfiber, st.alpha, k + 3));

    const int ne = static_cast<int>(cfg.epsilons.size());
    std::vector<std::vector<EigenRow>> perEps(ne);
    parallel_for(ne, cfg.threads, [&](int i) {
        double eps = cfg.epsilons[i];
        at_eps(eps, [&] {
            FormPair f = assemble_rescaled_form(base.grid, base.fiber, eps, st.alpha);
            SpectrumResult s = solve_tube(cfg, base, f, k);
            SpectrumResult sr;
            if (fine) {
                FormPair ff = assemble_rescaled_form(fine->grid, fine->fiber, eps, st.alpha);
                sr = solve_tube(cfg, *fine, ff, k);
            }
            for (int j = 0; j < k; ++j) {
                EigenRow r;
                r.epsilon = eps;
                r.k = j;
                r.lambda_eps = s.eigenvalues(j) - st.alpha;
                r.mu_limit = st.muLimit[j];
                r.abs_err = std::abs(r.lambda_eps - r.mu_limit);
                r.limit_same_grid = base.limitSpec.eigenvalues(j) - st.alpha;
                if (j < static_cast<int>(exact[i].size()))
                    r.exact_tube = exact[i][j];
                r.grid_nx = cfg.nx;
                r.grid_nfiber = cfg.nfiber;
                r.lambda0_h = base.fiber.lambda0h;
                r.residual = s.residuals(j);
                r.iterations = s.iterations;
                if (fine) {
                    r.lambda_refined = sr.eigenvalues(j) - st.alpha;
                    r.grid_delta = r.lambda_refined - r.lambda_eps;
                    r.gated = r.abs_err > 5 * std::abs(r.grid_delta);
                }
                perEps[i].push_back(r);
            }
            return 0;
        });
    });
    for (auto& v : perEps)
        st.rows.insert(st.rows.end(), v.begin(), v.end());

    st.slopes.assign(k, kNaN);
    for (int j = 0; j < k; ++j) {
        std::vector<double> e, a;
        for (int i = 0; i < ne; ++i) {
            const EigenRow& r = st.rows[i * k + j];
            if (r.abs_err > 0) {
                e.push_back(r.epsilon);
                a.push_back(r.abs_err);
            }
        }
        if (e.size() >= 2)
            st.slopes[j] = loglog_slope(e, a);
        int grows = 0;
        for (int i = 0; i + 1 < ne; ++i) {
            const EigenRow &r0 = st.rows[i * k + j], &r1 = st.rows[(i + 1) * k + j];
            if (r0.gated && r1.gated && !(r1.abs_err < r0.abs_err)) {
                ++grows;
                st.flags.push_back("k=" + std::to_string(j) + ": error does not decrease from eps=" +
                                   fmt(r0.epsilon) + " to eps=" + fmt(r1.epsilon) + " (grid-limited)");
            }
        }
        if (grows > 1)
            st.contractOk = false;
    }
    st.seconds = seconds_since(t0);
    return st;
}

// ---------------------------------------------------------------- semigroup

double SemigroupStudy::err(const std::string& datum, double eps, double t) const
{
    for (const SemigroupRow& r : rows)
        if (r.datum == datum && r.epsilon == eps && r.t == t)
            return r.err;
    return kNaN;
}

SemigroupStudy semigroup_convergence_study(const StudyConfig& cfg)
{
    validate(cfg);
    auto t0 = std::chrono::steady_clock::now();
    Geometry geom(cfg.geom);
    SemigroupStudy st;
    st.alpha = resolve_alpha(cfg);
    FermiGrid grid = build_grid(geom, cfg.nx, cfg.nfiber);
    FiberPencil fp = fiber_pencil(grid);
    FormPair lim = assemble_limit_form(grid, st.alpha);

    // number of pairs: stop at a spectral gap so no cluster is cut
    Vector levs;
    if (grid.nXNodes <= kDenseLimit) {
        Matrix L(lim.stiffness), M(lim.mass);
        levs = Eigen::GeneralizedSelfAdjointEigenSolver<Matrix>(L, M, Eigen::EigenvaluesOnly).eigenvalues();
    } else {
        levs = lowest_eigenpairs(lim, 20).eigenvalues;
    }
    int pairs = 1;
    for (int j = 1; j <= std::min<int>(20, static_cast<int>(levs.size()) - 1); ++j)
        if (levs(j) - levs(j - 1) > 0.1 * (1 + std::abs(levs(j - 1))))
            pairs = j;
    st.pairs = pairs;
    SolverOptions lopt;
    lopt.method = SolverMethod::Auto;
    lopt.tol = cfg.tol;
    GridSet gs{grid, fp, lim, lowest_eigenpairs(lim, pairs, lopt)};

    const SpMat& Mlim = lim.mass;
    // tube mass does not depend on eps
    FormPair first = assemble_reference_form(grid, fp, cfg.epsilons[0], st.alpha);
    const SpMat M = first.mass;

    auto normalized = [&](Vector u) { return Vector(u / mnorm(M, u)); };
    Vector vx(grid.nXNodes);
    for (int x = 0; x < grid.nXNodes; ++x)
        vx(x) = smooth_pair(geom, grid.x_of(x)).first;
    std::vector<std::pair<std::string, Vector>> data;
    data.emplace_back("range_E0", normalized(lift_E0(grid, fp, vx)));
    data.emplace_back("generic", normalized(grid_function(grid, [&](const Vec& x, const Vec& w) {
                          auto [v, v2] = smooth_pair(geom, x);
                          return (1 - w.squaredNorm()) * (v + 0.5 * v2 * w(0));
                      })));
    data.emplace_back("odd", normalized(grid_function(grid, [&](const Vec& x, const Vec& w) {
                          return smooth_pair(geom, x).first * w(0) * (1 - w.squaredNorm());
                      })));
    st.perturbationNorm = 1e-2;
    Vector p = st.perturbationNorm * smoothed_noise(M, cfg.seed);
    const Vector& generic = data[1].second;

    // limit side once per datum and time
    std::vector<std::vector<Vector>> limitSide(data.size() + 1);
    std::vector<std::vector<double>> limitBound(data.size() + 1);
    for (std::size_t d = 0; d < data.size(); ++d)
        for (double t : cfg.times) {
            HeatResult h = heat_apply(gs.limitSpec, t, fiber_coefficients(grid, fp, data[d].second), Mlim, st.alpha);
            limitSide[d].push_back(lift_E0(grid, fp, h.u));
            limitBound[d].push_back(h.truncationBound);
        }
    limitSide[data.size()] = limitSide[1];
    limitBound[data.size()] = limitBound[1];

    const int ne = static_cast<int>(cfg.epsilons.size());
    std::vector<std::vector<SemigroupRow>> perEps(ne);
    parallel_for(ne, cfg.threads, [&](int i) {
        double eps = cfg.epsilons[i];
        at_eps(eps, [&] {
            FormPair f = assemble_rescaled_form(grid, fp, eps, st.alpha);
            SpectrumResult s = solve_tube(cfg, gs, f, pairs);
            for (std::size_t d = 0; d <= data.size(); ++d) {
                bool seq = d == data.size();
                Vector u = seq ? Vector(generic + eps * p) : data[d].second;
                for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
                    HeatResult h = heat_apply(s, cfg.times[ti], u, M, st.alpha);
                    SemigroupRow r;
                    r.epsilon = eps;
                    r.t = cfg.times[ti];
                    r.datum = seq ? "sequence" : data[d].first;
                    r.err = mnorm(M, h.u - limitSide[d][ti]);
                    r.truncation = std::max(h.truncationBound, limitBound[d][ti]);
                    perEps[i].push_back(r);
                }
            }
            return 0;
        });
    });
    for (auto& v : perEps)
        st.rows.insert(st.rows.end(), v.begin(), v.end());

    for (const char* datum : {"range_E0", "generic", "sequence", "odd"}) {
        std::vector<double> supT(ne, 0.0);
        for (double t : cfg.times)
            for (int i = 0; i < ne; ++i) {
                double e = st.err(datum, cfg.epsilons[i], t);
                supT[i] = std::max(supT[i], e);
                if (i > 0 && !(e < st.err(datum, cfg.epsilons[i - 1], t))) {
                    st.contractOk = false;
                    st.flags.push_back(std::string(datum) + ": error does not decrease at t=" + fmt(t) +
                                       " from eps=" + fmt(cfg.epsilons[i - 1]) + " to eps=" + fmt(cfg.epsilons[i]));
                }
            }
        for (int i = 1; i < ne; ++i)
            if (!(supT[i] < supT[i - 1])) {
                st.contractOk = false;
                st.flags.push_back(std::string(datum) + ": sup over t does not decrease at eps=" +
                                   fmt(cfg.epsilons[i]));
            }
    }
    st.seconds = seconds_since(t0);
    return st;
}

// ---------------------------------------------------------------- Kato

KatoStudy kato_check(const StudyConfig& cfg)
{
    validate(cfg);
    auto t0 = std::chrono::steady_clock::now();
    Geometry geom(cfg.geom);
    KatoStudy st;
    st.alpha = resolve_alpha(cfg);
    const double lam0 = ball_eigenvalue(geom.codim(), 0);
    if (st.alpha < lam0)
        throw Error(ErrorKind::Validation, "kato check needs alpha >= lambda0");
    const double epsStar = ball_spectrum(geom.codim()).epsStar;
    for (double e : cfg.epsilons)
        if (e > epsStar * epsStar)
            st.flags.push_back("eps=" + fmt(e) + " above epsStar^2");

    FermiGrid grid = build_grid(geom, cfg.nx, cfg.nfiber);
    FiberPencil fp = fiber_pencil(grid);
    FormParts parts = assemble_parts(grid);
    const int n = grid.unknowns();
    std::vector<Vector> samples, e0;
    for (int s = 0; s < cfg.samples; ++s) {
        samples.push_back(smoothed_noise(parts.mass, cfg.seed + s));
        if (s < 10) {
            Vector p = project_E0(grid, fp, samples.back());
            e0.push_back(p / mnorm(parts.mass, p));
        }
    }

    const int ne = static_cast<int>(cfg.epsilons.size());
    st.rows.resize(ne);
    parallel_for(ne, cfg.threads, [&](int i) {
        double eps = cfg.epsilons[i];
        at_eps(eps, [&] {
            SpMat S = assemble_rescaled_form(grid, fp, eps, st.alpha).stiffness;
            SpMat S0 = assemble_reference_form(grid, fp, eps, st.alpha).stiffness;
            SpMat D = S - S0 - parts.massWL;
            KatoRow r;
            r.epsilon = eps;
            r.minF0 = std::numeric_limits<double>::infinity();
            auto ratio = [&](const Vector& u, bool track) {
                double f0 = 0.5 * u.dot(S0 * u);
                double lhs = 0.5 * std::abs(u.dot(D * u));
                if (track)
                    r.minF0 = std::min(r.minF0, f0 / u.dot(parts.mass * u));
                double q = lhs / (eps * f0);
                if (!(f0 > 0.0) || !std::isfinite(q)) {
                    ++r.nonFinite;
                    return 0.0;
                }
                return q;
            };
            for (const Vector& u : samples)
                r.ratio = std::max(r.ratio, ratio(u, true));
            for (const Vector& u : e0)
                r.ratioE0 = std::max(r.ratioE0, ratio(u, false));
            if (cfg.denseWorstCase && n <= kDenseLimit) {
                Matrix Dd(D), Sd(S0);
                Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Dd, Sd, Eigen::EigenvaluesOnly);
                r.worstCase = es.eigenvalues().cwiseAbs().maxCoeff() / eps;
            }
            st.rows[i] = r;
            return 0;
        });
    });
    std::vector<double> e, q;
    bool finite = true;
    for (const KatoRow& r : st.rows) {
        e.push_back(r.epsilon);
        q.push_back(r.ratio);
        st.K = std::max(st.K, r.ratio);
        if (r.nonFinite > 0 || !(r.minF0 > 0.0)) {
            finite = false;
            st.flags.push_back("eps=" + fmt(r.epsilon) + ": non-positive reference energy or non-finite ratio");
        }
    }
    st.slope = ne >= 2 ? loglog_slope(e, q) : 0.0;
    // growth as eps decreases shows up as a negative slope
    st.contractOk = finite && st.slope >= -0.2;
    st.seconds = seconds_since(t0);
    return st;
}

// ---------------------------------------------------------------- coercivity

namespace {
constexpr double kMarginRounding = 1e-10;
}

CoercivityStudy coercivity_check(const StudyConfig& cfg, double K)
{
    validate(cfg);
    auto t0 = std::chrono::steady_clock::now();
    Geometry geom(cfg.geom);
    CoercivityStudy st;
    st.K = K;
    BallSpectrum bs = ball_spectrum(geom.codim());
    st.epsStar = bs.epsStar;
    FermiGrid grid = build_grid(geom, cfg.nx, cfg.nfiber);
    FiberPencil fp = fiber_pencil(grid);
    // q0 carries the grid's fiber eigenvalue, so the automatic floor uses it too
    double floor = PotentialField(geom, x_samples(geom)).alphaFloor() - bs.lambda[0] + fp.lambda0h;
    st.alpha = cfg.alpha ? *cfg.alpha : floor;
    if (st.alpha < floor - 1e-12)
        throw Error(ErrorKind::Validation, "coercivity check needs alpha >= " + fmt(floor));

    FormParts parts = assemble_parts(grid);
    SpMat Q0 = q0_matrix(parts, fp);
    std::vector<Vector> samples;
    samples.push_back(lift_E0(grid, fp, Vector::Ones(grid.nXNodes)));
    for (int s = 0; s < cfg.samples; ++s)
        samples.push_back(smoothed_noise(parts.mass, cfg.seed + s));

    const int ne = static_cast<int>(cfg.epsilons.size());
    st.rows.resize(ne);
    parallel_for(ne, cfg.threads, [&](int i) {
        double eps = cfg.epsilons[i];
        at_eps(eps, [&] {
            SpMat S = assemble_rescaled_form(grid, fp, eps, st.alpha).stiffness;
            SpMat S0 = assemble_reference_form(grid, fp, eps, st.alpha).stiffness;
            CoercivityRow r;
            r.epsilon = eps;
            r.marginInduced = r.marginReference = std::numeric_limits<double>::infinity();
            r.inHypothesis = eps <= st.epsStar && (std::isnan(K) || eps <= 1.0 / (2 * K));
            for (std::size_t s = 0; s < samples.size(); ++s) {
                const Vector& u = samples[s];
                double q = u.dot(Q0 * u);
                double m1 = 0.5 * u.dot(S * u) / q - 0.25;
                double m2 = 0.5 * u.dot(S0 * u) / q - 0.5;
                if (s == 0)
                    r.groundMargin = m1;
                r.marginInduced = std::min(r.marginInduced, m1);
                r.marginReference = std::min(r.marginReference, m2);
                // the sphere ground state sits on equality; allow rounding from the 1/eps^2 cancellation
                if (!(m1 >= -kMarginRounding) || !(m2 >= -kMarginRounding)) {
                    if (r.violations == 0)
                        r.violating = u;
                    ++r.violations;
                }
            }
            st.rows[i] = std::move(r);
            return 0;
        });
    });
    for (const CoercivityRow& r : st.rows)
        if (r.inHypothesis && r.violations > 0)
            st.contractOk = false;
    st.seconds = seconds_since(t0);
    return st;
}

// ---------------------------------------------------------------- asymptotic orders

AsymptoticsStudy asymptotics_check(const Geometry& geom, const std::vector<double>& epsilons)
{
    auto t0 = std::chrono::steady_clock::now();
    AsymptoticsStudy st;
    const int l = geom.l(), k = geom.codim(), d = l + k;
    for (double e : epsilons)
        if (!(e > 0.0) || e > geom.eps_max() * (1 + 1e-12))
            throw Error(ErrorKind::Validation, "epsilon " + fmt(e) + " outside (0, eps_max]");
    st.epsilons = epsilons;
    std::vector<Vec> xs = x_samples(geom, 8);
    std::vector<Vec> ws;
    if (k == 1) {
        for (double w : {-1.0, -0.5, 0.5, 1.0})
            ws.push_back(Vec::Constant(1, w));
    } else {
        for (double r : {0.5, 1.0})
            for (int q = 0; q < 8; ++q) {
                Vec w(2);
                double t = 2 * kPi * q / 8 + 0.1;
                w << r * std::cos(t), r * std::sin(t);
                ws.push_back(w);
            }
    }
    for (double eps : epsilons) {
        AsymptoticsRow row;
        row.epsilon = eps;
        Mat D = Mat::Identity(d, d);
        D.bottomRightCorner(k, k) *= 1.0 / eps;
        for (const Vec& x : xs) {
            CurvatureData cd = geom.curvature_at(x);
            double WL = effective_potential(cd);
            for (const Vec& w : ws) {
                Vec we = eps * w;
                TubeMetric tm = geom.exact_tube_metric(x, we);
                // reference metric at the same point
                Mat cw = Mat::Zero(l, k);
                for (int i = 0; i < l; ++i)
                    for (int a = 0; a < k; ++a)
                        for (int mu = 0; mu < k; ++mu)
                            cw(i, a) += we(mu) * cd.conn[i](mu, a);
                Mat g0(d, d);
                g0.topLeftCorner(l, l) = cd.gL + cw * cw.transpose();
                g0.topRightCorner(l, k) = cw;
                g0.bottomLeftCorner(k, l) = cw.transpose();
                g0.bottomRightCorner(k, k).setIdentity();
                Mat H0 = Mat::Zero(d, d);
                for (int mu = 0; mu < k; ++mu)
                    for (int nu = 0; nu < k; ++nu)
                        for (int a = 0; a < k; ++a)
                            for (int b = 0; b < k; ++b)
                                H0(l + mu, l + nu) += w(a) * w(b) * cd.fiber_curv(mu, a, nu, b) / 3.0;
                Mat H = D * (tm.g.inverse() - g0.inverse()) * D - H0;
                row.q[0] = std::max(row.q[0], H.norm());
                row.q[1] = std::max(row.q[1], std::abs(tm.rho - 1.0));
                Vec grad = grad_log_rho(geom, x, we);
                Vec target = Vec::Zero(d);
                for (int a = 0; a < k; ++a)
                    target(l + a) = -cd.weingarten[a].trace();
                row.q[2] = std::max(row.q[2], (grad - target).norm());
                row.q[3] = std::max(row.q[3], std::abs(potential_W(geom, x, we) - WL));
            }
        }
        st.rows.push_back(row);
    }
    // rounding floors: exact evaluations vs nested finite differences
    const double floors[4] = {1e-12, 1e-12, 1e-9, 1e-8};
    for (int q = 0; q < 4; ++q) {
        std::vector<double> e, v;
        double biggest = 0.0;
        for (const AsymptoticsRow& r : st.rows) {
            e.push_back(r.epsilon);
            v.push_back(r.q[q]);
            biggest = std::max(biggest, r.q[q]);
        }
        if (biggest <= floors[q]) {
            st.vanishing[q] = true;
            st.slope[q] = std::numeric_limits<double>::infinity();
            continue;
        }
        st.slope[q] = e.size() >= 2 ? loglog_slope(e, v) : kNaN;
        if (!(st.slope[q] >= 0.9))
            st.contractOk = false;
    }
    st.seconds = seconds_since(t0);
    return st;
}

} // namespace tube
