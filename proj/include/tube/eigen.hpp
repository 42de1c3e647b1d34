#pragma once

#include "tube/assembly.hpp"

#include <cstdint>
#include <string>

namespace tube {

enum class SolverMethod { Lobpcg, Dense, Auto };

struct SolverOptions {
    double tol = 1e-8;          // on ||Av - lambda Mv||_{M^-1} / max(1, |lambda|)
    std::uint64_t seed = 0x5EED;
    int maxIter = 5000;
    SolverMethod method = SolverMethod::Lobpcg;
    Matrix warmStart;           // optional initial columns (n x j), padded with seeded noise
};

inline constexpr int kDenseLimit = 2500;

struct SpectrumResult {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // M-orthonormal columns
    Vector residuals;     // ||Av - lambda Mv||_{M^-1}
    int iterations = 0;
    std::string method;
    double tol = 0.0;
    std::uint64_t seed = 0;
};

SpectrumResult lowest_eigenpairs(const SpMat& a, const SpMat& m, int k, const SolverOptions& opt = {});
SpectrumResult lowest_eigenpairs(const FormPair& pencil, int k, const SolverOptions& opt = {});
SpectrumResult dense_eigenpairs(const SpMat& a, const SpMat& m, int k);

// sqrt(r^T M^-1 r) by conjugate gradients
double dual_norm(const SpMat& m, const Vector& r);

struct HeatResult {
    Vector u;
    double truncationBound = 0.0; // exp(-t (lambda_last - shift) / 2) ||u||_M
};

// sum_j exp(-t (lambda_j - shift) / 2) <v_j, u>_M v_j
HeatResult heat_apply(const SpectrumResult& spec, double t, const Vector& u, const SpMat& m, double shift = 0.0);

} // namespace tube
