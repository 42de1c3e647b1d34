#pragma once

#include "tube/fermi.hpp"

#include <string>
#include <vector>

namespace tube {

struct Axis {
    int n = 0;            // node count
    double origin = 0.0;  // first node
    double h = 1.0;       // spacing
    bool periodic = false;
    bool dirLo = false, dirHi = false;

    double coord(int i) const { return origin + i * h; }
    int cells() const { return periodic ? n : n - 1; }
};

struct FermiGrid {
    Geometry geom;
    int l = 1, codim = 1;
    bool polar = false;       // codim 2 fiber in (r, theta)
    std::vector<Axis> xAxes;  // submanifold coordinates
    std::vector<Axis> fAxes;  // fiber coordinates
    int nXNodes = 0, nFiberNodes = 0, nFiberUnknowns = 0;
    int nx = 0, nfiber = 0;   // requested resolution
    std::vector<int> fiberUnknown; // fiber node -> fiber unknown or -1
    Vector weights;                // m0 quadrature weight per node (x-major)
    std::vector<char> dirichletMask;

    explicit FermiGrid(Geometry g) : geom(std::move(g)) {}

    int unknowns() const { return nXNodes * nFiberUnknowns; }
    Vec x_of(int xnode) const;
    Vec w_of(int fnode) const; // Cartesian fiber point
    // fiber node of a fiber unknown
    int fiber_node(int funk) const;
};

FermiGrid build_grid(const Geometry& geom, int nx, int nfiber);

// Discrete Dirichlet pencil of the unit fiber on the grid's fiber nodes.
struct FiberPencil {
    Matrix K, M;     // interior unknowns
    double lambda0h = 0.0, lambda1h = 0.0;
    Vector u0;       // ground state, u0^T M u0 = 1, positive
};

FiberPencil fiber_pencil(const FermiGrid& grid);
FiberPencil fiber_pencil(int codim, int nfiber);

struct FormPair {
    SpMat stiffness;  // F(u) = u^T stiffness u / 2
    SpMat mass;       // L2(m0)
    double epsilon = 0.0, alpha = 0.0, lambda0h = 0.0;
    std::string kind;
};

// epsilon-independent pieces on a grid
struct FormParts {
    SpMat mass;     // L2(m0)
    SpMat qH;       // horizontal form with covariant fiber correction
    SpMat qVraw;    // fiber Dirichlet energy (no lambda0 shift)
    SpMat q0direct; // form of the reference dual metric g0*, assembled in one piece
    SpMat massWL;   // <u, W_L(pi) u>
};

FormParts assemble_parts(const FermiGrid& grid);
FormPair assemble_rescaled_form(const FermiGrid& grid, const FiberPencil& fiber, double eps, double alpha);
FormPair assemble_reference_form(const FermiGrid& grid, const FiberPencil& fiber, double eps, double alpha);
// stiffness of q0 = qV + qH + lambda0h <.,.>
SpMat q0_matrix(const FormParts& parts, const FiberPencil& fiber);

// 1/2 int_L (|dv|^2 + (W_L + alpha) v^2) on the grid's submanifold axes
FormPair assemble_limit_form(const FermiGrid& grid, double alpha);

Vector project_E0(const FermiGrid& grid, const FiberPencil& fiber, const Vector& u);
// u0 (x) v
Vector lift_E0(const FermiGrid& grid, const FiberPencil& fiber, const Vector& v);
// fiber coefficients <u0, u(x, .)>_M
Vector fiber_coefficients(const FermiGrid& grid, const FiberPencil& fiber, const Vector& u);

// "row col value" lines, 1-based indices, 17 significant digits
void dump_matrix(const SpMat& a, const std::string& path);

} // namespace tube
