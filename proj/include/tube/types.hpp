#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace tube {

// Dimensions never exceed 3 (l + codim <= 3), so small blocks live on the stack.
inline constexpr int kMaxDim = 3;

template <class Scalar>
using SmallVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <class Scalar>
using SmallMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vec = SmallVec<double>;
using Mat = SmallMat<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class ErrorKind { Validation, Domain, Unsupported, Frame, Shape, Assembly, Convergence, Contract };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind);

// symmetric part of a square expression
template <class Derived>
auto sym(const Eigen::MatrixBase<Derived>& a)
{
    return (0.5 * (a + a.transpose())).eval();
}

// 0.5 * log(det(a)) for an SPD block, any scalar type
template <class Derived>
typename Derived::Scalar half_log_det(const Eigen::MatrixBase<Derived>& a)
{
    Eigen::LDLT<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>> ldlt(a);
    return 0.5 * ldlt.vectorD().array().log().sum();
}

// u^T A u for sparse or dense A
template <class MatT, class VecT>
double quad_form(const MatT& a, const VecT& u)
{
    return u.dot(a * u);
}

} // namespace tube
