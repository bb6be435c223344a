#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

namespace ftme {

// State dimension is capped at 4; fixed-capacity storage keeps the inner
// integration loops free of heap traffic.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

inline Mat mat2(double a, double b, double c, double d)
{
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

inline bool all_finite(const Vec& v)
{
    return v.allFinite();
}

}  // namespace ftme
