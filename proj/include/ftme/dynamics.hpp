#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ftme/linalg.hpp"

namespace ftme {

/// Right-hand side of an ODE x' = f(t, x) together with its spatial Jacobian.
struct VectorField {
    int dimension = 0;
    std::function<Vec(double, const Vec&)> rhs;
    std::function<Mat(double, const Vec&)> jacobian;
    bool autonomous = true;
    std::string name;

    Vec operator()(double t, const Vec& x) const { return rhs(t, x); }
};

// Built-in systems with known flows.
struct LinearGeneral {
    Mat A;
};

/// x1' = x1 - x2, x2' = -x2. Unstable direction (1,0), stable direction (1,2).
struct LinearSaddle {};

/// x1' = -x1, x2' = beta x1^2 + gamma x2 (gamma > 0).
struct Parabola {
    double beta = 1.0;
    double gamma = 1.0;
};

struct Scalar1D {
    double a = 0.0;
};

using BuiltinSystem = std::variant<LinearGeneral, LinearSaddle, Parabola, Scalar1D>;

Mat linear_saddle_matrix();

VectorField make_field(const BuiltinSystem& system);

struct FlowResult {
    Vec x_end;
    Mat Phi;
    double t0 = 0.0;
    double t1 = 0.0;
    int step_count = 0;
};

inline constexpr double kBlowUpNorm = 1e12;
inline constexpr double kDefaultStepsPerUnit = 100.0;

/// Number of fixed RK4 steps for a span of |t1 - t0| at the given density (at least 1).
int steps_for(double duration, double steps_per_unit = kDefaultStepsPerUnit);

/// Classical RK4 on the augmented system x' = f(t,x), Phi' = D_x f(t,x) Phi, Phi(t0) = I,
/// with fixed step (t1 - t0) / steps. Negative spans integrate backward in time.
/// Throws TrajectoryBlowUp when the state stops being finite or exceeds kBlowUpNorm.
FlowResult integrate_flow(const VectorField& field, const Vec& x0, double t0, double t1, int steps);

/// State-only RK4 (no variational matrix).
Vec integrate_state(const VectorField& field, const Vec& x0, double t0, double t1, int steps);

/// Flow and fundamental matrix Phi(t, t0) for every t in `times`, integrating outward
/// from t0 in both directions and continuing between consecutive times.
std::vector<FlowResult> integrate_flow_to_times(const VectorField& field, const Vec& x0, double t0,
                                                const std::vector<double>& times,
                                                double steps_per_unit = kDefaultStepsPerUnit);

/// State-only counterpart of integrate_flow_to_times.
std::vector<Vec> integrate_state_to_times(const VectorField& field, const Vec& x0, double t0,
                                         const std::vector<double>& times,
                                         double steps_per_unit = kDefaultStepsPerUnit);

/// Exact flow of a built-in system over duration t from time 0.
FlowResult closed_form_flow(const BuiltinSystem& system, const Vec& x0, double t);

/// exp(int_{t0}^{t1} tr D_x f ds) along the RK4 trajectory; cross-check for det(Phi).
double liouville_det(const VectorField& field, const Vec& x0, double t0, double t1, int steps);

/// exp(A t) for a square matrix of size up to kMaxDim.
Mat matrix_exponential(const Mat& A, double t);

}  // namespace ftme
