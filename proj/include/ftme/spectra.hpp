#pragma once

#include <vector>

#include "ftme/linalg.hpp"

namespace ftme {

/// Singular values, finite-time Lyapunov exponents and right singular vectors of a
/// fundamental matrix over horizon T.
struct SpectralData {
    Vec Lambda;   ///< singular values, descending
    Vec lambda;   ///< (1/T) log Lambda
    Mat xi;       ///< column i is the unit right singular vector for Lambda[i]
    double horizon = 1.0;

    int dimension() const { return static_cast<int>(Lambda.size()); }
};

/// Singular data of an invertible matrix of size <= 4. Throws DegenerateMatrix when
/// |det M| <= 1e-300. The horizon T only scales the exponents (T > 0).
SpectralData svd_small(const Mat& M, double T);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned descending, eigenvectors as matching columns.
struct SymmetricEigen {
    Vec values;
    Mat vectors;
};
SymmetricEigen symmetric_eigen_jacobi(const Mat& S, double off_tol = 1e-13);

/// Spectral (operator 2-) norm.
double operator_norm(const Mat& M);

/// E(A) = A^{-1} B(0,1) = { x : <x, A^T A x> <= 1 }.
struct Ellipsoid {
    Mat A;

    bool contains(const Vec& x) const { return (A * x).squaredNorm() <= 1.0; }
    double volume() const;
};

bool ellipsoid_membership(const Ellipsoid& e, const Vec& x);

/// Lebesgue measure of the closed unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);

}  // namespace ftme
