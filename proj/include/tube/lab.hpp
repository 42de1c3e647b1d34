#pragma once

#include "tube/eigen.hpp"
#include "tube/oracle.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tube {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StudyConfig {
    GeometrySpec geom = circle_in_plane(1.0);
    std::vector<double> epsilons{0.2, 0.141, 0.1, 0.071, 0.05};
    int k = 4;
    std::optional<double> alpha; // empty: auto (lambda0 + sup(-W_L))
    int nx = 256, nfiber = 16;
    bool refine = true;          // eigenvalue study: second grid at twice the resolution
    std::uint64_t seed = 0x5EED;
    double tol = 1e-6;
    int maxIter = 5000;
    int samples = 100;
    std::vector<double> times{0.5, 1.0, 2.0};
    bool denseWorstCase = false; // kato: exact worst ratio by a dense pencil when small enough
    int threads = 1;
};

void validate(const StudyConfig& cfg);
double resolve_alpha(const StudyConfig& cfg);
// submanifold sample points used for sup-norms and the automatic alpha
std::vector<Vec> x_samples(const Geometry& geom, int perAxis = 16);

// runs fn(0..n-1) on up to `threads` workers; fn writes into its own slot
void parallel_for(int n, int threads, const std::function<void(int)>& fn);
// TUBE_THREADS or 1
int default_threads();

struct EigenRow {
    double epsilon = 0.0;
    int k = 0;
    double lambda_eps = 0.0, mu_limit = 0.0, abs_err = 0.0;
    double lambda_refined = kNaN, grid_delta = kNaN;
    double limit_same_grid = 0.0;
    double exact_tube = kNaN;   // separable geometries only
    int grid_nx = 0, grid_nfiber = 0;
    double lambda0_h = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool gated = true;          // error exceeds 5x the grid delta
};

struct EigenStudy {
    std::vector<EigenRow> rows; // epsilon-major, ladder order
    std::vector<double> muLimit;
    std::string muSource;
    std::vector<double> slopes; // per k, log|err| against log eps
    double lambda0 = 0.0, alpha = 0.0;
    double limitOracleDefect = kNaN, tubeOracleDefect = kNaN;
    std::vector<std::string> flags;
    bool contractOk = true;
    double seconds = 0.0;
};

EigenStudy eigenvalue_convergence_study(const StudyConfig& cfg);

struct SemigroupRow {
    double epsilon = 0.0, t = 0.0;
    std::string datum;
    double err = 0.0, truncation = 0.0;
};

struct SemigroupStudy {
    std::vector<SemigroupRow> rows;
    int pairs = 0;
    double perturbationNorm = 0.0;
    double alpha = 0.0;
    std::vector<std::string> flags;
    bool contractOk = true;
    double seconds = 0.0;

    double err(const std::string& datum, double eps, double t) const;
};

SemigroupStudy semigroup_convergence_study(const StudyConfig& cfg);

struct KatoRow {
    double epsilon = 0.0;
    double ratio = 0.0;        // max over samples of |F - F0 - <u, W_L u>/2| / (eps F0)
    double ratioE0 = 0.0;      // same on lifted smooth functions
    double worstCase = kNaN;   // dense generalized eigenvalue bound
    double minF0 = 0.0;
    int nonFinite = 0;
};

struct KatoStudy {
    std::vector<KatoRow> rows;
    double slope = 0.0;        // log ratio against log eps
    double K = 0.0;            // largest ratio seen
    double alpha = 0.0;
    std::vector<std::string> flags;
    bool contractOk = true;
    double seconds = 0.0;
};

KatoStudy kato_check(const StudyConfig& cfg);

struct CoercivityRow {
    double epsilon = 0.0;
    double marginInduced = 0.0;   // min F / q0 - 1/4
    double marginReference = 0.0; // min F0 / q0 - 1/2
    double groundMargin = 0.0;    // F(u0 x 1) / q0 - 1/4
    int violations = 0;
    bool inHypothesis = true;     // eps <= min(epsStar, 1 / (2K))
    Vector violating;             // first violating sample, if any
};

struct CoercivityStudy {
    std::vector<CoercivityRow> rows;
    double alpha = 0.0, epsStar = 0.0, K = kNaN;
    bool contractOk = true;
    double seconds = 0.0;
};

// K from a kato run (NaN: not available)
CoercivityStudy coercivity_check(const StudyConfig& cfg, double K = kNaN);

struct AsymptoticsRow {
    double epsilon = 0.0;
    double q[4] = {0, 0, 0, 0}; // metric, density, log gradient, potential
};

struct AsymptoticsStudy {
    std::vector<AsymptoticsRow> rows;
    double slope[4] = {0, 0, 0, 0};
    bool vanishing[4] = {false, false, false, false};
    std::vector<double> epsilons;
    bool contractOk = true;
    double seconds = 0.0;
};

inline const char* kAsymptoticNames[4] = {"metric", "density", "log_gradient", "potential"};

AsymptoticsStudy asymptotics_check(const Geometry& geom, const std::vector<double>& epsilons);

// seeded white noise smoothed by one mass multiplication, unit M-norm
Vector smoothed_noise(const SpMat& mass, std::uint64_t seed);

} // namespace tube
