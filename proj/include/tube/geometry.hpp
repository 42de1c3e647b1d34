#pragma once

#include "tube/types.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace tube {

enum class GeomKind { CircleInPlane, PlaneCurve, SpaceCurve, SphereInR3, LatitudeCircleOnSphere };

const char* to_string(GeomKind kind);
GeomKind geom_kind_from_string(const std::string& name);

// params by kind:
//   CircleInPlane          [R]
//   PlaneCurve             [length, kappa_0, ..., kappa_{N-1}] (uniform samples of a periodic curvature)
//   SpaceCurve             [a, h] or [a, h, turns]  gamma(t) = (a cos t, a sin t, h sin 2t);
//                          turns adds whole rotations of the normal frame along the curve
//   SphereInR3             [R]
//   LatitudeCircleOnSphere [theta0] or [theta0, sphereRadius]
struct GeometrySpec {
    GeomKind kind = GeomKind::CircleInPlane;
    std::vector<double> params;
    int l = 1;
    int m = 2;
    int codim = 1;
    int normalSign = 1; // +1: the catalog orientation, -1: all normals reversed
};

GeometrySpec circle_in_plane(double R);
GeometrySpec plane_curve(double length, std::vector<double> kappa);
GeometrySpec space_curve(double a, double h, int turns = 0);
GeometrySpec sphere_in_r3(double R);
GeometrySpec latitude_circle(double theta0, double sphereRadius = 1.0);
GeometrySpec flipped(GeometrySpec spec);

// Ambient curvature in an adapted orthonormal frame (tangent e_1..e_l, then normals nu_1..nu_codim).
struct Riemann {
    int m = 0;
    std::array<double, 81> v{};

    double operator()(int a, int b, int c, int d) const { return v[((a * 3 + b) * 3 + c) * 3 + d]; }
    double& operator()(int a, int b, int c, int d) { return v[((a * 3 + b) * 3 + c) * 3 + d]; }
};

// Space form tensor R_abcd = K (d_ac d_bd - d_ad d_bc), so R_abab = K is the sectional curvature.
Riemann space_form(int m, double K);

struct CurvatureData {
    int l = 1, codim = 1;
    Mat gL;                       // induced metric in x coordinates
    Mat tangentFrame;             // columns: g_L-orthonormal tangent frame in x coordinates
    std::vector<Mat> weingarten;  // mixed tensors A_alpha (x coordinates)
    std::vector<Mat> conn;        // conn[i](alpha, mu) = C_{i alpha}^mu
    Riemann ambient;              // adapted frame components
    double scalL = 0.0, scalM = 0.0, ricBar = 0.0, rBar = 0.0, tensionNormSq = 0.0;

    // R_{mu alpha nu beta} with all indices normal
    double fiber_curv(int mu, int alpha, int nu, int beta) const;
    // R(d_i, nu_alpha, d_j, nu_beta) with coordinate tangent indices
    double mixed_curv(int i, int alpha, int j, int beta) const;
    // Weingarten map in the orthonormal tangent frame (symmetric)
    Mat weingarten_on(int alpha) const;
};

// Recompute scalL-independent scalars (scalM, ricBar, rBar, tensionNormSq) from the raw fields.
void refresh_scalars(CurvatureData& cd);

// Rotate the tangent frame by qt (l x l orthogonal) and the normal frame by qn (codim x codim orthogonal).
CurvatureData reframe(const CurvatureData& cd, const Mat& qt, const Mat& qn);

struct TubeMetric {
    Mat g;           // (l + codim) square, coordinates (x, w)
    double rho = 1;  // sqrt(det g / det g0)
};

struct ParamAxis {
    double lo = 0.0, hi = 0.0;
    bool periodic = true;
};

struct NormalFrameField {
    std::vector<double> t;                    // parameter samples
    std::vector<std::vector<Eigen::Vector3d>> nu; // nu[alpha][sample], ambient coordinates
    std::vector<double> conn;                 // C_{t 1}^2 samples (codim 2), zeros otherwise
    double holonomy = 0.0;                    // twist angle spread along L to close the frame
    double closureDefect = 0.0;
};

class Geometry {
public:
    explicit Geometry(GeometrySpec spec);

    const GeometrySpec& spec() const { return spec_; }
    int l() const { return spec_.l; }
    int m() const { return spec_.m; }
    int codim() const { return spec_.codim; }

    std::vector<ParamAxis> param_axes() const;
    double injectivity_bound() const;
    double eps_max() const;
    bool flat_ambient() const;

    CurvatureData curvature_at(const Vec& x) const;
    TubeMetric exact_tube_metric(const Vec& x, const Vec& w) const;
    // closed-form Scal_L, independent of the Gauss equation
    double scal_L(const Vec& x) const;
    double sqrt_det_gL(const Vec& x) const;
    // Cartesian point of the tube in the ambient model (R^2, R^3, or S^2 inside R^3)
    Eigen::Vector3d ambient_point(const Vec& x, const Vec& w) const;
    NormalFrameField frame_transport(const std::vector<double>& tGrid) const;
    double closure_defect() const;

private:
    struct Impl;
    GeometrySpec spec_;
    std::shared_ptr<const Impl> impl_;
};

} // namespace tube
