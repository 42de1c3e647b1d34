#include "tube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace tube {

namespace {

constexpr double kPi = std::numbers::pi;

// Periodic antiderivative of a smooth function, tabulated with Simpson and read back by cubic Hermite.
class Primitive {
public:
    Primitive() = default;
    Primitive(std::function<double(double)> f, double period, int n) : f_(std::move(f)), period_(period), n_(n)
    {
        h_ = period / n;
        val_.resize(n + 1);
        der_.resize(n + 1);
        val_[0] = 0.0;
        for (int j = 0; j <= n; ++j)
            der_[j] = f_(j * h_);
        for (int j = 0; j < n; ++j) {
            double mid = f_((j + 0.5) * h_);
            val_[j + 1] = val_[j] + h_ / 6.0 * (der_[j] + 4.0 * mid + der_[j + 1]);
        }
    }

    double total() const { return val_[n_]; }

    double operator()(double t) const
    {
        double turns = std::floor(t / period_);
        double r = t - turns * period_;
        int j = std::min(n_ - 1, static_cast<int>(r / h_));
        double s = (r - j * h_) / h_;
        double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
        double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
        double v = h00 * val_[j] + h10 * h_ * der_[j] + h01 * val_[j + 1] + h11 * h_ * der_[j + 1];
        return v + turns * total();
    }

private:
    std::function<double(double)> f_;
    double period_ = 1.0, h_ = 1.0;
    int n_ = 1;
    std::vector<double> val_, der_;
};

void require(bool ok, ErrorKind kind, const std::string& msg)
{
    if (!ok)
        throw Error(kind, msg);
}

} // namespace

const char* to_string(GeomKind kind)
{
    switch (kind) {
    case GeomKind::CircleInPlane: return "CircleInPlane";
    case GeomKind::PlaneCurve: return "PlaneCurve";
    case GeomKind::SpaceCurve: return "SpaceCurve";
    case GeomKind::SphereInR3: return "SphereInR3";
    case GeomKind::LatitudeCircleOnSphere: return "LatitudeCircleOnSphere";
    }
    return "?";
}

GeomKind geom_kind_from_string(const std::string& name)
{
    for (GeomKind k : {GeomKind::CircleInPlane, GeomKind::PlaneCurve, GeomKind::SpaceCurve, GeomKind::SphereInR3,
                       GeomKind::LatitudeCircleOnSphere})
        if (name == to_string(k))
            return k;
    throw Error(ErrorKind::Unsupported, "unknown geometry kind '" + name + "'");
}

GeometrySpec circle_in_plane(double R) { return {GeomKind::CircleInPlane, {R}, 1, 2, 1, 1}; }

GeometrySpec plane_curve(double length, std::vector<double> kappa)
{
    GeometrySpec s{GeomKind::PlaneCurve, {length}, 1, 2, 1, 1};
    s.params.insert(s.params.end(), kappa.begin(), kappa.end());
    return s;
}

GeometrySpec space_curve(double a, double h, int turns) { return {GeomKind::SpaceCurve, {a, h, double(turns)}, 1, 3, 2, 1}; }
GeometrySpec sphere_in_r3(double R) { return {GeomKind::SphereInR3, {R}, 2, 3, 1, 1}; }
GeometrySpec latitude_circle(double theta0, double sphereRadius)
{
    return {GeomKind::LatitudeCircleOnSphere, {theta0, sphereRadius}, 1, 2, 1, 1};
}

GeometrySpec flipped(GeometrySpec spec)
{
    spec.normalSign = -spec.normalSign;
    return spec;
}

Riemann space_form(int m, double K)
{
    Riemann r;
    r.m = m;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d)
                    r(a, b, c, d) = K * ((a == c && b == d ? 1.0 : 0.0) - (a == d && b == c ? 1.0 : 0.0));
    return r;
}

double CurvatureData::fiber_curv(int mu, int alpha, int nu, int beta) const
{
    return ambient(l + mu, l + alpha, l + nu, l + beta);
}

double CurvatureData::mixed_curv(int i, int alpha, int j, int beta) const
{
    Mat einv = tangentFrame.inverse();
    double s = 0.0;
    for (int a = 0; a < l; ++a)
        for (int b = 0; b < l; ++b)
            s += einv(a, i) * einv(b, j) * ambient(a, l + alpha, b, l + beta);
    return s;
}

Mat CurvatureData::weingarten_on(int alpha) const
{
    return tangentFrame.inverse() * weingarten[alpha] * tangentFrame;
}

void refresh_scalars(CurvatureData& cd)
{
    int m = cd.l + cd.codim;
    cd.scalM = cd.ricBar = cd.rBar = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            cd.scalM += cd.ambient(a, b, a, b);
    for (int i = 0; i < cd.l; ++i)
        for (int a = 0; a < m; ++a)
            cd.ricBar += cd.ambient(i, a, i, a);
    for (int i = 0; i < cd.l; ++i)
        for (int j = 0; j < cd.l; ++j)
            cd.rBar += cd.ambient(i, j, i, j);
    cd.tensionNormSq = 0.0;
    for (const Mat& a : cd.weingarten)
        cd.tensionNormSq += a.trace() * a.trace();
}

CurvatureData reframe(const CurvatureData& cd, const Mat& qt, const Mat& qn)
{
    CurvatureData out = cd;
    int m = cd.l + cd.codim;
    out.tangentFrame = cd.tangentFrame * qt;
    for (int a = 0; a < cd.codim; ++a) {
        Mat acc = Mat::Zero(cd.l, cd.l);
        for (int b = 0; b < cd.codim; ++b)
            acc += qn(b, a) * cd.weingarten[b];
        out.weingarten[a] = acc;
    }
    for (int i = 0; i < cd.l; ++i)
        out.conn[i] = qn.transpose() * cd.conn[i] * qn;
    Matrix q = Matrix::Zero(m, m);
    q.topLeftCorner(cd.l, cd.l) = qt;
    q.bottomRightCorner(cd.codim, cd.codim) = qn;
    Riemann r;
    r.m = m;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    double s = 0.0;
                    for (int a2 = 0; a2 < m; ++a2)
                        for (int b2 = 0; b2 < m; ++b2)
                            for (int c2 = 0; c2 < m; ++c2)
                                for (int d2 = 0; d2 < m; ++d2)
                                    s += q(a2, a) * q(b2, b) * q(c2, c) * q(d2, d) * cd.ambient(a2, b2, c2, d2);
                    r(a, b, c, d) = s;
                }
    out.ambient = r;
    refresh_scalars(out);
    return out;
}

struct Geometry::Impl {
    // PlaneCurve
    double length = 0.0;
    double a0 = 0.0;
    std::vector<double> ca, cb; // cosine/sine coefficients, index k >= 1
    double nyq = 0.0;           // Nyquist cosine coefficient (even sample count)
    int nyqIndex = 0;
    bool straight = false;
    Primitive px, py;
    double kappaMax = 0.0;

    // SpaceCurve
    double a = 1.0, h = 0.0;
    Primitive c0Int, arcInt;
    double twist = 0.0, arcLength = 0.0, curvMax = 0.0;

    double kappa(double s) const
    {
        double w = 2.0 * kPi / length;
        double v = a0;
        for (std::size_t k = 1; k < ca.size(); ++k)
            v += ca[k] * std::cos(w * k * s) + cb[k] * std::sin(w * k * s);
        if (nyqIndex > 0)
            v += nyq * std::cos(w * nyqIndex * s);
        return v;
    }

    double turning(double s) const
    {
        double w = 2.0 * kPi / length;
        double v = a0 * s;
        for (std::size_t k = 1; k < ca.size(); ++k)
            v += (ca[k] * std::sin(w * k * s) - cb[k] * std::cos(w * k * s) + cb[k]) / (w * k);
        if (nyqIndex > 0)
            v += nyq * std::sin(w * nyqIndex * s) / (w * nyqIndex);
        return v;
    }

    // SpaceCurve pieces
    Eigen::Vector3d d1(double t) const { return {-a * std::sin(t), a * std::cos(t), 2 * h * std::cos(2 * t)}; }
    Eigen::Vector3d d2(double t) const { return {-a * std::cos(t), -a * std::sin(t), -4 * h * std::sin(2 * t)}; }
    Eigen::Vector3d n1(double t) const { return {-std::cos(t), -std::sin(t), 0.0}; }
    Eigen::Vector3d n2(double t) const { return d1(t).normalized().cross(n1(t)); }
    double c0(double t) const { return Eigen::Vector3d(std::sin(t), -std::cos(t), 0.0).dot(n2(t)); }
    double speed(double t) const { return d1(t).norm(); }
    double phase(double t) const { return -c0Int(t) + twist * arcInt(t) / arcLength; }
    double connection(double t) const { return twist * speed(t) / arcLength; }
    std::array<Eigen::Vector3d, 2> frame(double t) const
    {
        double p = phase(t);
        Eigen::Vector3d u = n1(t), v = n2(t);
        return {std::cos(p) * u + std::sin(p) * v, -std::sin(p) * u + std::cos(p) * v};
    }
};

Geometry::Geometry(GeometrySpec spec) : spec_(std::move(spec))
{
    for (double p : spec_.params)
        require(std::isfinite(p), ErrorKind::Validation, "geometry parameters must be finite");
    require(spec_.normalSign == 1 || spec_.normalSign == -1, ErrorKind::Validation, "normalSign must be +1 or -1");
    auto impl = std::make_shared<Impl>();
    auto& P = spec_.params;
    switch (spec_.kind) {
    case GeomKind::CircleInPlane:
        require(P.size() == 1 && P[0] > 0, ErrorKind::Validation, "CircleInPlane needs params [R > 0]");
        spec_.l = 1, spec_.m = 2;
        break;
    case GeomKind::SphereInR3:
        require(P.size() == 1 && P[0] > 0, ErrorKind::Validation, "SphereInR3 needs params [R > 0]");
        spec_.l = 2, spec_.m = 3;
        break;
    case GeomKind::LatitudeCircleOnSphere:
        require(P.size() == 1 || P.size() == 2, ErrorKind::Validation,
                "LatitudeCircleOnSphere needs params [theta0] or [theta0, radius]");
        if (P.size() == 1)
            P.push_back(1.0);
        require(P[0] > 1e-6 && P[0] < kPi - 1e-6, ErrorKind::Validation, "theta0 must lie in (1e-6, pi - 1e-6)");
        require(P[1] > 0, ErrorKind::Validation, "sphere radius must be positive");
        spec_.l = 1, spec_.m = 2;
        break;
    case GeomKind::SpaceCurve:
        require((P.size() == 2 || P.size() == 3) && P[0] > 0, ErrorKind::Validation,
                "SpaceCurve needs params [a > 0, h] or [a > 0, h, frame turns]");
        if (P.size() == 2)
            P.push_back(0.0);
        require(P[2] == std::round(P[2]), ErrorKind::Validation, "SpaceCurve frame turns must be an integer");
        spec_.l = 1, spec_.m = 3;
        break;
    case GeomKind::PlaneCurve:
        require(P.size() >= 2 && P[0] > 0, ErrorKind::Validation,
                "PlaneCurve needs params [length > 0, kappa samples...]");
        spec_.l = 1, spec_.m = 2;
        break;
    }
    spec_.codim = spec_.m - spec_.l;

    if (spec_.kind == GeomKind::PlaneCurve) {
        Impl& I = *impl;
        I.length = P[0];
        int n = static_cast<int>(P.size()) - 1;
        std::vector<double> kap(P.begin() + 1, P.end());
        int half = (n - 1) / 2;
        I.ca.assign(half + 1, 0.0);
        I.cb.assign(half + 1, 0.0);
        for (int j = 0; j < n; ++j)
            I.a0 += kap[j] / n;
        for (int k = 1; k <= half; ++k)
            for (int j = 0; j < n; ++j) {
                double ang = 2.0 * kPi * k * j / n;
                I.ca[k] += 2.0 / n * kap[j] * std::cos(ang);
                I.cb[k] += 2.0 / n * kap[j] * std::sin(ang);
            }
        if (n % 2 == 0) {
            I.nyqIndex = n / 2;
            for (int j = 0; j < n; ++j)
                I.nyq += kap[j] * ((j % 2 == 0) ? 1.0 : -1.0) / n;
        }
        for (double k : kap)
            I.kappaMax = std::max(I.kappaMax, std::abs(k));
        const int fine = std::max(4096, 64 * n);
        for (int j = 0; j < fine; ++j)
            I.kappaMax = std::max(I.kappaMax, std::abs(I.kappa(I.length * j / fine)));
        I.straight = I.kappaMax < 1e-14;
        const Impl* self = impl.get();
        I.px = Primitive([self](double s) { return std::cos(self->turning(s)); }, I.length, fine);
        I.py = Primitive([self](double s) { return std::sin(self->turning(s)); }, I.length, fine);
        if (!I.straight) {
            double turn = I.turning(I.length);
            double tangentGap = std::abs(std::remainder(turn, 2.0 * kPi));
            double gap = std::hypot(I.px.total(), I.py.total());
            require(tangentGap <= 1e-6 && gap <= 1e-6, ErrorKind::Validation,
                    "PlaneCurve does not close: defect " + std::to_string(std::max(gap, tangentGap)));
        }
    }
    if (spec_.kind == GeomKind::SpaceCurve) {
        Impl& I = *impl;
        I.a = P[0];
        I.h = P[1];
        const Impl* self = impl.get();
        const int fine = 8192;
        I.c0Int = Primitive([self](double t) { return self->c0(t); }, 2 * kPi, fine);
        I.arcInt = Primitive([self](double t) { return self->speed(t); }, 2 * kPi, fine);
        I.arcLength = I.arcInt.total();
        double hol = I.c0Int.total();
        // rotation-minimizing frame plus the smallest constant twist that closes it, plus optional whole turns
        I.twist = hol - 2.0 * kPi * std::round(hol / (2.0 * kPi)) + 2.0 * kPi * P[2];
        for (int j = 0; j < fine; ++j) {
            double t = 2 * kPi * j / fine;
            Eigen::Vector3d g1 = I.d1(t), g2 = I.d2(t);
            Eigen::Vector3d kv = (g2 - g1 * g1.dot(g2) / g1.squaredNorm()) / g1.squaredNorm();
            I.curvMax = std::max(I.curvMax, kv.norm());
        }
    }
    impl_ = impl;
    if (spec_.kind == GeomKind::SpaceCurve)
        require(closure_defect() <= 1e-8, ErrorKind::Frame, "normal frame does not close after twist correction");
}

std::vector<ParamAxis> Geometry::param_axes() const
{
    auto& P = spec_.params;
    switch (spec_.kind) {
    case GeomKind::CircleInPlane: return {{0.0, 2 * kPi * P[0], true}};
    case GeomKind::PlaneCurve: return {{0.0, P[0], true}};
    case GeomKind::SpaceCurve: return {{0.0, 2 * kPi, true}};
    case GeomKind::SphereInR3: return {{0.0, kPi, false}, {0.0, 2 * kPi, true}};
    case GeomKind::LatitudeCircleOnSphere: return {{0.0, 2 * kPi * P[1] * std::sin(P[0]), true}};
    }
    return {};
}

double Geometry::injectivity_bound() const
{
    auto& P = spec_.params;
    switch (spec_.kind) {
    case GeomKind::CircleInPlane: return P[0];
    case GeomKind::SphereInR3: return P[0];
    case GeomKind::LatitudeCircleOnSphere: return P[1] * std::min(P[0], kPi - P[0]);
    case GeomKind::PlaneCurve:
        return impl_->straight ? std::numeric_limits<double>::infinity() : 1.0 / impl_->kappaMax;
    case GeomKind::SpaceCurve:
        return impl_->curvMax > 0 ? 1.0 / impl_->curvMax : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double Geometry::eps_max() const { return std::min(0.4 * injectivity_bound(), 0.5); }

bool Geometry::flat_ambient() const { return spec_.kind != GeomKind::LatitudeCircleOnSphere; }

double Geometry::closure_defect() const
{
    if (spec_.kind != GeomKind::SpaceCurve)
        return 0.0;
    // the reference frame is periodic, so the defect is the leftover phase modulo 2 pi
    return std::abs(std::remainder(impl_->phase(2 * kPi), 2.0 * kPi));
}

double Geometry::sqrt_det_gL(const Vec& x) const
{
    switch (spec_.kind) {
    case GeomKind::SphereInR3: return spec_.params[0] * spec_.params[0] * std::sin(x(0));
    case GeomKind::SpaceCurve: return impl_->speed(x(0));
    default: return 1.0;
    }
}

double Geometry::scal_L(const Vec& x) const
{
    (void)x;
    if (spec_.kind == GeomKind::SphereInR3)
        return 2.0 / (spec_.params[0] * spec_.params[0]);
    return 0.0;
}

CurvatureData Geometry::curvature_at(const Vec& x) const
{
    require(x.size() == spec_.l, ErrorKind::Shape, "curvature_at: parameter has the wrong dimension");
    for (int i = 0; i < x.size(); ++i)
        require(std::isfinite(x(i)), ErrorKind::Validation, "curvature_at: non-finite parameter");
    const double sg = spec_.normalSign;
    auto& P = spec_.params;
    CurvatureData cd;
    cd.l = spec_.l;
    cd.codim = spec_.codim;
    cd.conn.assign(cd.l, Mat::Zero(cd.codim, cd.codim));
    cd.ambient = space_form(spec_.m, 0.0);
    switch (spec_.kind) {
    case GeomKind::CircleInPlane:
        cd.gL = Mat::Identity(1, 1);
        cd.weingarten = {Mat::Constant(1, 1, -sg / P[0])};
        break;
    case GeomKind::PlaneCurve:
        cd.gL = Mat::Identity(1, 1);
        cd.weingarten = {Mat::Constant(1, 1, -sg * impl_->kappa(x(0)))};
        break;
    case GeomKind::SphereInR3: {
        require(x(0) > 0.0 && x(0) < kPi, ErrorKind::Domain, "SphereInR3: colatitude outside (0, pi)");
        double R = P[0], s = std::sin(x(0));
        cd.gL = Mat::Zero(2, 2);
        cd.gL(0, 0) = R * R;
        cd.gL(1, 1) = R * R * s * s;
        cd.weingarten = {Mat::Identity(2, 2) * (-sg / R)};
        break;
    }
    case GeomKind::LatitudeCircleOnSphere: {
        double th = P[0], Rs = P[1];
        cd.gL = Mat::Identity(1, 1);
        cd.weingarten = {Mat::Constant(1, 1, -sg * std::cos(th) / (std::sin(th) * Rs))};
        cd.ambient = space_form(2, 1.0 / (Rs * Rs));
        break;
    }
    case GeomKind::SpaceCurve: {
        double t = x(0);
        Eigen::Vector3d g1 = impl_->d1(t), g2 = impl_->d2(t);
        double v2 = g1.squaredNorm();
        auto fr = impl_->frame(t);
        cd.gL = Mat::Constant(1, 1, v2);
        cd.weingarten = {Mat::Constant(1, 1, sg * fr[0].dot(g2) / v2), Mat::Constant(1, 1, sg * fr[1].dot(g2) / v2)};
        double c = impl_->connection(t);
        cd.conn[0](0, 1) = c;
        cd.conn[0](1, 0) = -c;
        break;
    }
    }
    cd.tangentFrame = Mat::Zero(cd.l, cd.l);
    for (int i = 0; i < cd.l; ++i)
        cd.tangentFrame(i, i) = 1.0 / std::sqrt(cd.gL(i, i));
    refresh_scalars(cd);
    cd.scalL = scal_L(x);
    return cd;
}

TubeMetric Geometry::exact_tube_metric(const Vec& x, const Vec& w) const
{
    require(x.size() == spec_.l && w.size() == spec_.codim, ErrorKind::Shape,
            "exact_tube_metric: argument dimensions do not match the geometry");
    double wn = w.norm();
    require(wn < injectivity_bound(), ErrorKind::Domain, "exact_tube_metric: |w| beyond the injectivity bound");
    const double sg = spec_.normalSign;
    auto& P = spec_.params;
    int m = spec_.m;
    TubeMetric out;
    out.g = Mat::Identity(m, m);
    switch (spec_.kind) {
    case GeomKind::CircleInPlane: {
        double f = 1.0 + sg * w(0) / P[0];
        out.g(0, 0) = f * f;
        out.rho = f;
        break;
    }
    case GeomKind::PlaneCurve: {
        double f = 1.0 + sg * impl_->kappa(x(0)) * w(0);
        out.g(0, 0) = f * f;
        out.rho = std::abs(f);
        break;
    }
    case GeomKind::SphereInR3: {
        double R = P[0], f = (R + sg * w(0)) / R, s = std::sin(x(0));
        out.g(0, 0) = f * f * R * R;
        out.g(1, 1) = f * f * R * R * s * s;
        out.rho = f * f;
        break;
    }
    case GeomKind::LatitudeCircleOnSphere: {
        double th = P[0], Rs = P[1];
        double f = std::sin(th + sg * w(0) / Rs) / std::sin(th);
        out.g(0, 0) = f * f;
        out.rho = f;
        break;
    }
    case GeomKind::SpaceCurve: {
        double t = x(0);
        Eigen::Vector3d g1 = impl_->d1(t), g2 = impl_->d2(t);
        double v2 = g1.squaredNorm();
        auto fr = impl_->frame(t);
        double k1 = sg * fr[0].dot(g2) / v2, k2 = sg * fr[1].dot(g2) / v2;
        double c = impl_->connection(t);
        double f = 1.0 - (w(0) * k1 + w(1) * k2);
        out.g(0, 0) = v2 * f * f + c * c * w.squaredNorm();
        out.g(0, 1) = out.g(1, 0) = -c * w(1);
        out.g(0, 2) = out.g(2, 0) = c * w(0);
        out.rho = std::abs(f);
        break;
    }
    }
    return out;
}

Eigen::Vector3d Geometry::ambient_point(const Vec& x, const Vec& w) const
{
    const double sg = spec_.normalSign;
    auto& P = spec_.params;
    switch (spec_.kind) {
    case GeomKind::CircleInPlane: {
        double r = P[0] + sg * w(0), a = x(0) / P[0];
        return {r * std::cos(a), r * std::sin(a), 0.0};
    }
    case GeomKind::PlaneCurve: {
        if (impl_->straight)
            return {x(0), sg * w(0), 0.0};
        double th = impl_->turning(x(0));
        Eigen::Vector3d nu(std::sin(th), -std::cos(th), 0.0);
        return Eigen::Vector3d(impl_->px(x(0)), impl_->py(x(0)), 0.0) + sg * w(0) * nu;
    }
    case GeomKind::SphereInR3: {
        double r = P[0] + sg * w(0);
        return {r * std::sin(x(0)) * std::cos(x(1)), r * std::sin(x(0)) * std::sin(x(1)), r * std::cos(x(0))};
    }
    case GeomKind::LatitudeCircleOnSphere: {
        double Rs = P[1], th = P[0] + sg * w(0) / Rs, ph = x(0) / (Rs * std::sin(P[0]));
        return {Rs * std::sin(th) * std::cos(ph), Rs * std::sin(th) * std::sin(ph), Rs * std::cos(th)};
    }
    case GeomKind::SpaceCurve: {
        double t = x(0);
        auto fr = impl_->frame(t);
        Eigen::Vector3d g(impl_->a * std::cos(t), impl_->a * std::sin(t), impl_->h * std::sin(2 * t));
        return g + sg * (w(0) * fr[0] + w(1) * fr[1]);
    }
    }
    return Eigen::Vector3d::Zero();
}

NormalFrameField Geometry::frame_transport(const std::vector<double>& tGrid) const
{
    require(!tGrid.empty(), ErrorKind::Validation, "frame_transport: empty parameter grid");
    NormalFrameField out;
    out.t = tGrid;
    out.nu.assign(spec_.codim, {});
    const double sg = spec_.normalSign;
    for (double t : tGrid) {
        switch (spec_.kind) {
        case GeomKind::SpaceCurve: {
            auto fr = impl_->frame(t);
            out.nu[0].push_back(sg * fr[0]);
            out.nu[1].push_back(sg * fr[1]);
            out.conn.push_back(impl_->connection(t));
            break;
        }
        case GeomKind::SphereInR3:
            throw Error(ErrorKind::Unsupported, "frame_transport: sphere frames are radial, not transported along a curve");
        case GeomKind::CircleInPlane: {
            double a = t / spec_.params[0];
            out.nu[0].push_back(sg * Eigen::Vector3d(std::cos(a), std::sin(a), 0.0));
            out.conn.push_back(0.0);
            break;
        }
        case GeomKind::PlaneCurve: {
            double th = impl_->straight ? 0.0 : impl_->turning(t);
            Eigen::Vector3d nu = impl_->straight ? Eigen::Vector3d(0.0, 1.0, 0.0)
                                                 : Eigen::Vector3d(std::sin(th), -std::cos(th), 0.0);
            out.nu[0].push_back(sg * nu);
            out.conn.push_back(0.0);
            break;
        }
        case GeomKind::LatitudeCircleOnSphere: {
            double th = spec_.params[0], ph = t / (spec_.params[1] * std::sin(th));
            out.nu[0].push_back(sg * Eigen::Vector3d(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)));
            out.conn.push_back(0.0);
            break;
        }
        }
    }
    if (spec_.kind == GeomKind::SpaceCurve) {
        out.holonomy = impl_->twist;
        out.closureDefect = closure_defect();
    }
    return out;
}

} // namespace tube
