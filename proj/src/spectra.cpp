#include "ftme/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ftme/errors.hpp"

namespace ftme {

namespace {

// First nonzero component positive.
void fix_sign(Mat& vectors)
{
    for (int j = 0; j < vectors.cols(); ++j) {
        for (int i = 0; i < vectors.rows(); ++i) {
            if (vectors(i, j) != 0.0) {
                if (vectors(i, j) < 0.0) {
                    vectors.col(j) *= -1.0;
                }
                break;
            }
        }
    }
}

SpectralData svd_2x2(const Mat& M, double det_abs)
{
    const Mat S = M.transpose() * M;
    const double p = S(0, 0);
    const double q = S(0, 1);
    const double r = S(1, 1);
    const double half_gap = std::hypot(0.5 * (p - r), q);
    const double top = 0.5 * (p + r) + half_gap;

    SpectralData out;
    out.Lambda.resize(2);
    out.Lambda[0] = std::sqrt(top);
    // The small singular value via the determinant avoids cancellation in (p+r)/2 - gap.
    out.Lambda[1] = det_abs / out.Lambda[0];

    out.xi = Mat::Identity(2, 2);
    if (half_gap > 1e-15 * top) {
        const double theta = 0.5 * std::atan2(2.0 * q, p - r);
        out.xi(0, 0) = std::cos(theta);
        out.xi(1, 0) = std::sin(theta);
        out.xi(0, 1) = -std::sin(theta);
        out.xi(1, 1) = std::cos(theta);
    }
    return out;
}

}  // namespace

SymmetricEigen symmetric_eigen_jacobi(const Mat& S_in, double off_tol)
{
    const int n = static_cast<int>(S_in.rows());
    Mat S = S_in;
    Mat V = Mat::Identity(n, n);
    const double scale = std::max(S.norm(), 1e-300);

    auto off_norm = [&] {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j) {
                    acc += S(i, j) * S(i, j);
                }
            }
        }
        return std::sqrt(acc);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > off_tol * scale; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (S(p, q) == 0.0) {
                    continue;
                }
                const double tau = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = S(k, p);
                    const double skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = S(p, k);
                    const double sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return S(a, a) > S(b, b); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = S(order[k], order[k]);
        out.vectors.col(k) = V.col(order[k]);
    }
    return out;
}

SpectralData svd_small(const Mat& M, double T)
{
    const int n = static_cast<int>(M.rows());
    if (M.cols() != n || n < 1 || n > kMaxDim) {
        throw InvalidArgument("svd_small: square matrix of size 1..4 required");
    }
    if (!(T > 0.0)) {
        throw InvalidArgument("svd_small: horizon must be positive");
    }
    const double det_abs = std::abs(M.determinant());
    if (!(det_abs > 1e-300) || !M.allFinite()) {
        throw DegenerateMatrix("degenerate fundamental matrix");
    }

    SpectralData out;
    if (n == 1) {
        out.Lambda = Vec::Constant(1, std::abs(M(0, 0)));
        out.xi = Mat::Identity(1, 1);
    } else if (n == 2) {
        out = svd_2x2(M, det_abs);
    } else {
        const SymmetricEigen eig = symmetric_eigen_jacobi(M.transpose() * M);
        out.Lambda.resize(n);
        for (int i = 0; i < n; ++i) {
            out.Lambda[i] = std::sqrt(std::max(eig.values[i], 0.0));
        }
        out.xi = eig.vectors;
        // Repeated singular values: fall back to the standard basis.
        if (out.Lambda[0] - out.Lambda[n - 1] <= 1e-15 * out.Lambda[0]) {
            out.xi = Mat::Identity(n, n);
        }
    }
    fix_sign(out.xi);
    out.horizon = T;
    out.lambda.resize(n);
    for (int i = 0; i < n; ++i) {
        out.lambda[i] = std::log(out.Lambda[i]) / T;
    }
    return out;
}

double operator_norm(const Mat& M)
{
    if (M.rows() == 0) {
        return 0.0;
    }
    const SymmetricEigen eig = symmetric_eigen_jacobi(M.transpose() * M);
    return std::sqrt(std::max(eig.values[0], 0.0));
}

double Ellipsoid::volume() const
{
    const double det_abs = std::abs(A.determinant());
    if (!(det_abs > 0.0)) {
        throw DegenerateMatrix("ellipsoid generator is singular");
    }
    return unit_ball_volume(static_cast<int>(A.rows())) / det_abs;
}

bool ellipsoid_membership(const Ellipsoid& e, const Vec& x)
{
    return e.contains(x);
}

double unit_ball_volume(int n)
{
    if (n < 1 || n > kMaxDim) {
        throw InvalidArgument("unit_ball_volume: dimension must be in 1..4");
    }
    const double half = 0.5 * n;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

}  // namespace ftme
