#pragma once

#include "tube/geometry.hpp"

#include <vector>

namespace tube {

// Second-order Taylor data of the Fermi metric blocks at one submanifold point.
// g = [[a + c b^-1 c^T, c], [c^T, b]] with a, b, c expanded in the fiber coordinate w.
struct FermiJet {
    int l = 1, codim = 1;
    Mat a0;                            // g_L
    std::vector<Mat> a1;               // [alpha], l x l
    std::vector<std::vector<Mat>> a2;  // [alpha][beta], l x l, symmetric in (alpha, beta)
    std::vector<Mat> c1;               // [alpha], l x codim: c1[alpha](i, sigma) = C_{i alpha}^sigma
    std::vector<std::vector<Mat>> b2;  // [alpha][beta], codim x codim
    std::vector<double> logrho1;       // [alpha]
    Matrix logrho2;                    // codim x codim

    Mat a_at(const Vec& w) const;
    Mat b_at(const Vec& w) const;
    Mat c_at(const Vec& w) const;
    Mat metric_at(const Vec& w) const;
    double logrho_at(const Vec& w) const;
};

FermiJet metric_jet(const Geometry& geom, const Vec& x);

// second-order log-density coefficients rebuilt from the a/b jets through 1/2 tr log(gL^-1 a) + 1/2 tr log b
void logrho_from_blocks(const FermiJet& jet, std::vector<double>& first, Matrix& second);

// W_L = Scal_L / 2 - |tau|^2 / 4 - (Scal_M + Ric_bar + R_bar) / 6
double effective_potential(const CurvatureData& cd);
double effective_potential(const Geometry& geom, const Vec& x);
// the same number from second-order density data before the Gauss equation is applied
double effective_potential_raw(const CurvatureData& cd);

// W = 1/2 div grad log rho - 1/4 |d log rho|^2 in the exact tube metric, nested 4th-order differences
double potential_W(const Geometry& geom, const Vec& x, const Vec& w, double h = 1e-3);
// gradient of log rho in (x, w) coordinates, 4th-order differences
Vec grad_log_rho(const Geometry& geom, const Vec& x, const Vec& w, double h = 1e-3);

class PotentialField {
public:
    PotentialField(Geometry geom, std::vector<Vec> xSamples);

    double WL(const Vec& x) const;
    double Wfull(const Vec& x, const Vec& w) const;
    double W_eps(const Vec& x, const Vec& w, double eps) const;
    double alphaFloor() const { return alphaFloor_; }
    double supNegWL() const { return supNegWL_; }

private:
    Geometry geom_;
    double alphaFloor_ = 0.0, supNegWL_ = 0.0;
};

PotentialField potential_field(const Geometry& geom, const std::vector<Vec>& xSamples);

enum class JetQuantity { Metric, LogRho };

struct RemainderFit {
    std::vector<double> radii, remainders;
    double slope = 0.0;
    bool exactMatch = false; // remainder vanishes to rounding: slope reported as +infinity
};

RemainderFit jet_remainder_slope(const Geometry& geom, const Vec& x, JetQuantity quantity);

// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace tube
