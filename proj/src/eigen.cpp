#include "tube/eigen.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace tube {

namespace {

// Columns of V made M-orthonormal via the Gram matrix spectrum; nearly dependent directions are dropped.
// Returns the coefficient matrix T with (V T)^T M (V T) = I.
Matrix gram_basis(const Matrix& MV, const Matrix& V, double drop)
{
    Matrix S = V.transpose() * MV;
    S = sym(S);
    Vector d = S.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Matrix Sn = d.asDiagonal() * S * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(Sn);
    const Vector& ev = es.eigenvalues();
    int keep = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > drop * ev(ev.size() - 1))
            ++keep;
    Matrix T = d.asDiagonal() * es.eigenvectors().rightCols(keep);
    for (int j = 0; j < keep; ++j)
        T.col(j) /= std::sqrt(ev(ev.size() - keep + j));
    return T;
}

void check_pencil(const SpMat& a, const SpMat& m, int k)
{
    if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows())
        throw Error(ErrorKind::Shape, "pencil matrices have inconsistent shapes");
    if (k < 1 || k > 20)
        throw Error(ErrorKind::Validation, "eigenpair count must be in [1, 20]");
    if (k > a.rows())
        throw Error(ErrorKind::Validation, "more eigenpairs requested than unknowns");
}

SpectrumResult finish(const SpMat& a, const SpMat& m, Matrix X, int k)
{
    // final Rayleigh-Ritz on the converged block
    Matrix MX = m * X, AX = a * X;
    Matrix T = gram_basis(MX, X, 1e-14);
    X = X * T;
    AX = AX * T;
    Matrix H = sym(Matrix(X.transpose() * AX));
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    SpectrumResult res;
    res.eigenvalues = es.eigenvalues().head(k);
    res.eigenvectors = X * es.eigenvectors().leftCols(k);
    res.residuals.resize(k);
    for (int j = 0; j < k; ++j) {
        Vector v = res.eigenvectors.col(j);
        if (v.sum() < 0)
            res.eigenvectors.col(j) = -v;
        Vector r = a * v - res.eigenvalues(j) * (m * v);
        res.residuals(j) = dual_norm(m, r);
    }
    return res;
}

} // namespace

double dual_norm(const SpMat& m, const Vector& r)
{
    if (r.squaredNorm() == 0.0)
        return 0.0;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg(m);
    cg.setTolerance(1e-13);
    cg.setMaxIterations(2000);
    Vector y = cg.solve(r);
    return std::sqrt(std::max(0.0, r.dot(y)));
}

SpectrumResult dense_eigenpairs(const SpMat& a, const SpMat& m, int k)
{
    check_pencil(a, m, k);
    if (a.rows() > kDenseLimit)
        throw Error(ErrorKind::Unsupported, "dense solver limited to 2500 unknowns");
    Matrix A(a), M(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, M);
    SpectrumResult res = finish(a, m, es.eigenvectors().leftCols(k), k);
    res.method = "dense";
    return res;
}

SpectrumResult lowest_eigenpairs(const FormPair& pencil, int k, const SolverOptions& opt)
{
    return lowest_eigenpairs(pencil.stiffness, pencil.mass, k, opt);
}

SpectrumResult lowest_eigenpairs(const SpMat& a, const SpMat& m, int k, const SolverOptions& opt)
{
    check_pencil(a, m, k);
    if (!(opt.tol >= 1e-10))
        throw Error(ErrorKind::Validation, "solver tolerance must be >= 1e-10");
    const int n = static_cast<int>(a.rows());
    if (opt.method == SolverMethod::Dense || (opt.method == SolverMethod::Auto && n <= kDenseLimit)) {
        SpectrumResult r = dense_eigenpairs(a, m, k);
        r.tol = opt.tol;
        r.seed = opt.seed;
        return r;
    }
    const int b = std::min(k + 3, n);

    Vector Ad = a.diagonal(), Md = m.diagonal();
    Vector prec(n), Minv(n);
    for (int i = 0; i < n; ++i) {
        prec(i) = 1.0 / std::max(std::abs(Ad(i)), Md(i));
        Minv(i) = 1.0 / Md(i);
    }

    // initial block
    Matrix X(n, b);
    int w0 = 0;
    if (opt.warmStart.size() > 0) {
        if (opt.warmStart.rows() != n)
            throw Error(ErrorKind::Shape, "warm start has the wrong length");
        w0 = static_cast<int>(std::min<Eigen::Index>(opt.warmStart.cols(), b));
        X.leftCols(w0) = opt.warmStart.leftCols(w0);
    }
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    for (int j = w0; j < b; ++j)
        for (int i = 0; i < n; ++i)
            X(i, j) = nd(rng);

    Matrix MX = m * X;
    Matrix T = gram_basis(MX, X, 1e-12);
    if (T.cols() < b)
        throw Error(ErrorKind::Convergence, "degenerate initial block");
    X = X * T;
    MX = MX * T;
    Matrix AX = a * X;
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym(Matrix(X.transpose() * AX)));
        X = X * es.eigenvectors();
        AX = AX * es.eigenvectors();
        MX = MX * es.eigenvectors();
    }
    Vector lam = (X.transpose() * AX).diagonal();
    Matrix P, AP, MP;
    Vector resid(b);
    int it = 0;
    for (; it < opt.maxIter; ++it) {
        Matrix R = AX - MX * lam.asDiagonal();
        bool done = true;
        for (int j = 0; j < b; ++j) {
            resid(j) = std::sqrt(R.col(j).cwiseAbs2().dot(Minv));
            if (j < k && resid(j) > opt.tol * std::max(1.0, std::abs(lam(j))))
                done = false;
        }
        if (done)
            break;
        Matrix W = prec.asDiagonal() * R;
        // orthogonalize against X, then normalize columns
        W -= X * (MX.transpose() * W);
        Matrix V(n, 3 * b);
        int nv = 0;
        V.leftCols(b) = X;
        nv = b;
        V.middleCols(nv, b) = W;
        nv += b;
        if (P.cols() > 0) {
            V.middleCols(nv, P.cols()) = P;
            nv += static_cast<int>(P.cols());
        }
        V.conservativeResize(n, nv);
        Matrix AW = a * W, MW = m * W;
        Matrix AV(n, nv), MV(n, nv);
        AV.leftCols(b) = AX;
        MV.leftCols(b) = MX;
        AV.middleCols(b, b) = AW;
        MV.middleCols(b, b) = MW;
        if (P.cols() > 0) {
            AV.rightCols(P.cols()) = AP;
            MV.rightCols(P.cols()) = MP;
        }
        Matrix TV = gram_basis(MV, V, 1e-10);
        Matrix H = sym(Matrix(TV.transpose() * (V.transpose() * AV) * TV));
        Eigen::SelfAdjointEigenSolver<Matrix> es(H);
        Matrix C = TV * es.eigenvectors().leftCols(b); // coefficients in V
        Matrix Xn = V * C, AXn = AV * C, MXn = MV * C;
        // search direction: part of the update outside the old block
        Matrix Cp = C;
        Cp.topRows(b).setZero();
        P = V * Cp;
        AP = AV * Cp;
        MP = MV * Cp;
        X = Xn;
        AX = AXn;
        MX = MXn;
        lam = es.eigenvalues().head(b);
        if (it % 25 == 24) {
            // refresh products to stop drift
            AX = a * X;
            MX = m * X;
            Matrix Tx = gram_basis(MX, X, 1e-14);
            X = X * Tx;
            AX = AX * Tx;
            MX = MX * Tx;
            Eigen::SelfAdjointEigenSolver<Matrix> ex(sym(Matrix(X.transpose() * AX)));
            X = X * ex.eigenvectors();
            AX = AX * ex.eigenvectors();
            MX = MX * ex.eigenvectors();
            lam = ex.eigenvalues();
            AP = a * P;
            MP = m * P;
        }
    }
    if (it >= opt.maxIter) {
        std::string msg = "LOBPCG did not converge in " + std::to_string(opt.maxIter) + " iterations; residuals";
        char buf[32];
        for (int j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof buf, " %.3g", resid(j));
            msg += buf;
        }
        throw Error(ErrorKind::Convergence, msg);
    }
    SpectrumResult res = finish(a, m, X, k);
    res.iterations = it;
    res.method = "lobpcg";
    res.tol = opt.tol;
    res.seed = opt.seed;
    return res;
}

HeatResult heat_apply(const SpectrumResult& spec, double t, const Vector& u, const SpMat& m, double shift)
{
    if (!(t > 0.0))
        throw Error(ErrorKind::Domain, "heat_apply needs t > 0");
    if (u.size() != spec.eigenvectors.rows() || m.rows() != u.size())
        throw Error(ErrorKind::Shape, "heat_apply: vector does not match the spectrum");
    Vector Mu = m * u;
    Vector coef = spec.eigenvectors.transpose() * Mu;
    HeatResult h;
    h.u = Vector::Zero(u.size());
    for (int j = 0; j < coef.size(); ++j)
        h.u += std::exp(-0.5 * t * (spec.eigenvalues(j) - shift)) * coef(j) * spec.eigenvectors.col(j);
    double last = spec.eigenvalues(spec.eigenvalues.size() - 1);
    h.truncationBound = std::exp(-0.5 * t * (last - shift)) * std::sqrt(std::max(0.0, u.dot(Mu)));
    return h;
}

} // namespace tube
