#include "ftme/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftme/errors.hpp"

namespace ftme {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

VectorField linear_field(const Mat& A, std::string name)
{
    if (A.rows() != A.cols() || A.rows() < 1 || A.rows() > kMaxDim) {
        throw InvalidArgument("linear system matrix must be square with size 1..4");
    }
    VectorField f;
    f.dimension = static_cast<int>(A.rows());
    f.rhs = [A](double, const Vec& x) -> Vec { return A * x; };
    f.jacobian = [A](double, const Vec&) -> Mat { return A; };
    f.autonomous = true;
    f.name = std::move(name);
    return f;
}

void check_state(const Vec& x, const Mat* phi, double t_prev, double t)
{
    const bool finite = x.allFinite() && (phi == nullptr || phi->allFinite());
    if (!finite || x.norm() > kBlowUpNorm) {
        std::ostringstream msg;
        msg << "trajectory blow-up at t=" << t << " (last finite time " << t_prev << ")";
        throw TrajectoryBlowUp(t_prev, msg.str());
    }
}

// sinh(z)/z and sin(z)/z without cancellation near zero.
double sinhc(double z)
{
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sinh(z) / z;
}

double sinc(double z)
{
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

Mat expm_series(const Mat& A, double t)
{
    const int n = static_cast<int>(A.rows());
    Mat M = A * t;
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
        M /= std::ldexp(1.0, squarings);
    }
    Mat result = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * M / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-17 * result.cwiseAbs().maxCoeff()) {
            break;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    return result;
}

}  // namespace

Mat linear_saddle_matrix()
{
    return mat2(1.0, -1.0, 0.0, -1.0);
}

VectorField make_field(const BuiltinSystem& system)
{
    return std::visit(
        Overloaded{
            [](const LinearGeneral& s) { return linear_field(s.A, "linear"); },
            [](const LinearSaddle&) { return linear_field(linear_saddle_matrix(), "linear-saddle"); },
            [](const Parabola& s) {
                if (!(s.gamma > 0.0)) {
                    throw InvalidArgument("parabola system requires gamma > 0");
                }
                const double beta = s.beta;
                const double gamma = s.gamma;
                VectorField f;
                f.dimension = 2;
                f.rhs = [beta, gamma](double, const Vec& x) -> Vec {
                    return vec2(-x[0], beta * x[0] * x[0] + gamma * x[1]);
                };
                f.jacobian = [beta, gamma](double, const Vec& x) -> Mat {
                    return mat2(-1.0, 0.0, 2.0 * beta * x[0], gamma);
                };
                f.autonomous = true;
                f.name = "parabola";
                return f;
            },
            [](const Scalar1D& s) {
                Mat A(1, 1);
                A(0, 0) = s.a;
                return linear_field(A, "scalar");
            },
        },
        system);
}

int steps_for(double duration, double steps_per_unit)
{
    if (!(steps_per_unit > 0.0)) {
        throw InvalidArgument("steps per unit time must be positive");
    }
    const double raw = std::ceil(std::abs(duration) * steps_per_unit - 1e-9);
    return std::max(1, static_cast<int>(raw));
}

FlowResult integrate_flow(const VectorField& field, const Vec& x0, double t0, double t1, int steps)
{
    if (steps < 1) {
        throw InvalidArgument("integrate_flow: steps must be >= 1");
    }
    if (x0.size() != field.dimension) {
        throw InvalidArgument("integrate_flow: state dimension mismatch");
    }
    const int n = field.dimension;
    FlowResult out;
    out.t0 = t0;
    out.t1 = t1;
    out.x_end = x0;
    out.Phi = Mat::Identity(n, n);
    if (t1 == t0) {
        out.step_count = 0;
        return out;
    }

    const double h = (t1 - t0) / steps;
    Vec x = x0;
    Mat phi = Mat::Identity(n, n);
    double t = t0;
    for (int k = 0; k < steps; ++k) {
        const double t_mid = t + 0.5 * h;
        const double t_next = (k + 1 == steps) ? t1 : t0 + (k + 1) * h;

        const Vec kx1 = field.rhs(t, x);
        const Mat kp1 = field.jacobian(t, x) * phi;

        const Vec x2 = x + 0.5 * h * kx1;
        const Vec kx2 = field.rhs(t_mid, x2);
        const Mat kp2 = field.jacobian(t_mid, x2) * (phi + 0.5 * h * kp1);

        const Vec x3 = x + 0.5 * h * kx2;
        const Vec kx3 = field.rhs(t_mid, x3);
        const Mat kp3 = field.jacobian(t_mid, x3) * (phi + 0.5 * h * kp2);

        const Vec x4 = x + h * kx3;
        const Vec kx4 = field.rhs(t_next, x4);
        const Mat kp4 = field.jacobian(t_next, x4) * (phi + h * kp3);

        x += (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
        phi += (h / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
        check_state(x, &phi, t, t_next);
        t = t_next;
    }
    out.x_end = x;
    out.Phi = phi;
    out.step_count = steps;
    return out;
}

Vec integrate_state(const VectorField& field, const Vec& x0, double t0, double t1, int steps)
{
    if (steps < 1) {
        throw InvalidArgument("integrate_state: steps must be >= 1");
    }
    if (t1 == t0) {
        return x0;
    }
    const double h = (t1 - t0) / steps;
    Vec x = x0;
    double t = t0;
    for (int k = 0; k < steps; ++k) {
        const double t_mid = t + 0.5 * h;
        const double t_next = (k + 1 == steps) ? t1 : t0 + (k + 1) * h;
        const Vec k1 = field.rhs(t, x);
        const Vec k2 = field.rhs(t_mid, x + 0.5 * h * k1);
        const Vec k3 = field.rhs(t_mid, x + 0.5 * h * k2);
        const Vec k4 = field.rhs(t_next, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_state(x, nullptr, t, t_next);
        t = t_next;
    }
    return x;
}

std::vector<FlowResult> integrate_flow_to_times(const VectorField& field, const Vec& x0, double t0,
                                                const std::vector<double>& times, double steps_per_unit)
{
    const int n = field.dimension;
    std::vector<FlowResult> out(times.size());

    // Walk outward from t0, once forward and once backward, chaining segments.
    auto sweep = [&](bool forward) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (forward ? times[i] >= t0 : times[i] < t0) {
                order.push_back(i);
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return forward ? times[a] < times[b] : times[a] > times[b];
        });
        Vec x = x0;
        Mat phi = Mat::Identity(n, n);
        double t = t0;
        for (const std::size_t i : order) {
            const double target = times[i];
            if (target != t) {
                const FlowResult seg = integrate_flow(field, x, t, target, steps_for(target - t, steps_per_unit));
                x = seg.x_end;
                phi = seg.Phi * phi;
                t = target;
            }
            out[i] = FlowResult{x, phi, t0, target, 0};
        }
    };
    sweep(true);
    sweep(false);
    return out;
}

std::vector<Vec> integrate_state_to_times(const VectorField& field, const Vec& x0, double t0,
                                         const std::vector<double>& times, double steps_per_unit)
{
    std::vector<Vec> out(times.size());
    auto sweep = [&](bool forward) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (forward ? times[i] >= t0 : times[i] < t0) {
                order.push_back(i);
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return forward ? times[a] < times[b] : times[a] > times[b];
        });
        Vec x = x0;
        double t = t0;
        for (const std::size_t i : order) {
            const double target = times[i];
            if (target != t) {
                x = integrate_state(field, x, t, target, steps_for(target - t, steps_per_unit));
                t = target;
            }
            out[i] = x;
        }
    };
    sweep(true);
    sweep(false);
    return out;
}

Mat matrix_exponential(const Mat& A, double t)
{
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || n < 1 || n > kMaxDim) {
        throw InvalidArgument("matrix_exponential: square matrix of size 1..4 required");
    }
    if (n == 1) {
        Mat r(1, 1);
        r(0, 0) = std::exp(A(0, 0) * t);
        return r;
    }
    if (n == 2) {
        // exp(At) = e^{st} [ c(t) I + s(t) (A - sI) ] with s = tr/2, q^2 = s^2 - det.
        const double s = 0.5 * A.trace();
        const double q2 = s * s - A.determinant();
        const Mat N = A - s * Mat::Identity(2, 2);
        double c = 1.0;
        double sh = t;
        if (q2 > 0.0) {
            const double q = std::sqrt(q2);
            c = std::cosh(q * t);
            sh = t * sinhc(q * t);
        } else if (q2 < 0.0) {
            const double w = std::sqrt(-q2);
            c = std::cos(w * t);
            sh = t * sinc(w * t);
        }
        return std::exp(s * t) * (c * Mat::Identity(2, 2) + sh * N);
    }
    return expm_series(A, t);
}

FlowResult closed_form_flow(const BuiltinSystem& system, const Vec& x0, double t)
{
    FlowResult out;
    out.t0 = 0.0;
    out.t1 = t;
    std::visit(Overloaded{
                   [&](const LinearGeneral& s) {
                       out.Phi = matrix_exponential(s.A, t);
                       out.x_end = out.Phi * x0;
                   },
                   [&](const LinearSaddle&) {
                       out.Phi = matrix_exponential(linear_saddle_matrix(), t);
                       out.x_end = out.Phi * x0;
                   },
                   [&](const Parabola& s) {
                       if (std::abs(2.0 + s.gamma) < 1e-300) {
                           throw InvalidArgument("parabola closed form requires gamma != -2");
                       }
                       if (x0.size() != 2) {
                           throw InvalidArgument("parabola closed form requires a 2-d state");
                       }
                       const double a = std::exp(-t);
                       const double c = std::exp(s.gamma * t);
                       const double spread = c - std::exp(-2.0 * t);
                       const double k = s.beta / (2.0 + s.gamma);
                       out.x_end = vec2(a * x0[0], k * x0[0] * x0[0] * spread + c * x0[1]);
                       out.Phi = mat2(a, 0.0, 2.0 * k * x0[0] * spread, c);
                   },
                   [&](const Scalar1D& s) {
                       out.Phi = Mat::Constant(1, 1, std::exp(s.a * t));
                       out.x_end = out.Phi * x0;
                   },
               },
               system);
    return out;
}

double liouville_det(const VectorField& field, const Vec& x0, double t0, double t1, int steps)
{
    if (steps < 1) {
        throw InvalidArgument("liouville_det: steps must be >= 1");
    }
    if (t1 == t0) {
        return 1.0;
    }
    // Augment the state with the running integral of the Jacobian trace.
    const double h = (t1 - t0) / steps;
    Vec x = x0;
    double log_det = 0.0;
    double t = t0;
    auto trace_at = [&](double s, const Vec& y) { return field.jacobian(s, y).trace(); };
    for (int k = 0; k < steps; ++k) {
        const double t_mid = t + 0.5 * h;
        const double t_next = (k + 1 == steps) ? t1 : t0 + (k + 1) * h;
        const Vec k1 = field.rhs(t, x);
        const double l1 = trace_at(t, x);
        const Vec x2 = x + 0.5 * h * k1;
        const Vec k2 = field.rhs(t_mid, x2);
        const double l2 = trace_at(t_mid, x2);
        const Vec x3 = x + 0.5 * h * k2;
        const Vec k3 = field.rhs(t_mid, x3);
        const double l3 = trace_at(t_mid, x3);
        const Vec x4 = x + h * k3;
        const Vec k4 = field.rhs(t_next, x4);
        const double l4 = trace_at(t_next, x4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        log_det += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        check_state(x, nullptr, t, t_next);
        t = t_next;
    }
    return std::exp(log_det);
}

}  // namespace ftme
