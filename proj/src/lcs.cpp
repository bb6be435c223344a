#include "ftme/lcs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftme/entropy.hpp"
#include "ftme/errors.hpp"
#include "ftme/rng.hpp"
#include "ftme/spectra.hpp"

namespace ftme {

namespace {

void require_planar(const VectorField& field, const char* who)
{
    if (field.dimension != 2) {
        throw InvalidArgument(std::string(who) + ": planar (n = 2) field required");
    }
}

void require_autonomous(const VectorField& field, const char* who)
{
    if (!field.autonomous) {
        throw InvalidArgument(std::string(who) + ": autonomous field required");
    }
}

void require_horizon(double T, const char* who)
{
    if (!(T > 0.0)) {
        throw InvalidArgument(std::string(who) + ": T must be positive");
    }
}

// Each node is independent, so the serial loop is the reference for the parallel one.
template <class NodeFn>
void for_each_node(Exec exec, const Grid2D& grid, NodeFn&& fn)
{
    const long long total = static_cast<long long>(grid.size());
    if (exec == Exec::serial) {
        for (long long k = 0; k < total; ++k) {
            fn(static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx));
        }
        return;
    }
#pragma omp parallel for schedule(dynamic, 32) num_threads(worker_count())
    for (long long k = 0; k < total; ++k) {
        fn(static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx));
    }
}

void store(ScalarField2D& out, int i, int j, double value, NodeStatus status)
{
    const std::size_t k = out.grid.index(i, j);
    out.status[k] = status;
    out.mask[k] = status == NodeStatus::valid ? 1 : 0;
    out.values[k] = status == NodeStatus::valid ? value : 0.0;
}

double cross2(const Vec& a, const Vec& b)
{
    return a[0] * b[1] - a[1] * b[0];
}

}  // namespace

double directional_stretching_rate(const Mat& Phi, const Vec& v, double T)
{
    require_horizon(T, "directional_stretching_rate");
    const double vn = v.norm();
    if (!(vn > 0.0)) {
        throw InvalidArgument("directional_stretching_rate: direction must be non-zero");
    }
    return std::log((Phi * v).norm() / vn) / T;
}

StretchingRate stretching_rate(const VectorField& field, const Vec& x0, double T, int steps)
{
    require_autonomous(field, "stretching_rate");
    require_horizon(T, "stretching_rate");
    StretchingRate out;
    out.direction = field.rhs(0.0, x0);
    const double f0 = out.direction.norm();
    if (f0 < kEquilibriumThreshold) {
        out.at_equilibrium = true;
        return out;
    }
    const Vec x_end = integrate_state(field, x0, 0.0, T, steps);
    out.alpha = std::log(field.rhs(T, x_end).norm() / f0) / T;
    return out;
}

std::string AlphaPolicy::describe() const
{
    switch (kind) {
    case Kind::stretching: return "stretching";
    case Kind::lambda2: return "lambda2";
    case Kind::fixed: {
        std::ostringstream out;
        out.precision(17);
        out << "fixed(" << value << ")";
        return out.str();
    }
    }
    return "unknown";
}

PointEntropy weighted_ftme_at(const VectorField& field, const Vec& x, double T, int steps, AlphaPolicy policy)
{
    require_planar(field, "weighted_ftme_at");
    require_horizon(T, "weighted_ftme_at");
    PointEntropy out;
    const Vec f0 = field.rhs(0.0, x);
    const double f0_norm = f0.norm();
    if (policy.kind == AlphaPolicy::Kind::stretching) {
        require_autonomous(field, "weighted_ftme_at");
        if (f0_norm < kEquilibriumThreshold) {
            out.status = NodeStatus::equilibrium;
            return out;
        }
    }
    try {
        const FlowResult flow = integrate_flow(field, x, 0.0, T, steps);
        const SpectralData spec = svd_small(flow.Phi, T);
        out.lambda1 = spec.lambda[0];
        out.lambda2 = spec.lambda[1];
        switch (policy.kind) {
        case AlphaPolicy::Kind::stretching:
            out.alpha = std::log(field.rhs(T, flow.x_end).norm() / f0_norm) / T;
            break;
        case AlphaPolicy::Kind::lambda2:
            out.alpha = out.lambda2;
            break;
        case AlphaPolicy::Kind::fixed:
            out.alpha = policy.value;
            break;
        }
        if (!std::isfinite(out.alpha)) {
            out.status = NodeStatus::blow_up;
            return out;
        }
        out.H = ftme_2d_exact(out.lambda1, out.lambda2, out.alpha, T).h;
    } catch (const TrajectoryBlowUp&) {
        out.status = NodeStatus::blow_up;
    } catch (const DegenerateMatrix&) {
        out.status = NodeStatus::blow_up;
    }
    return out;
}

ScalarField2D weighted_ftme_field(const VectorField& field, const Grid2D& grid, double T, int steps,
                                  AlphaPolicy policy, Exec exec)
{
    require_planar(field, "weighted_ftme_field");
    require_horizon(T, "weighted_ftme_field");
    ScalarField2D out(grid);
    out.meta.kind = "ftme-weighted";
    out.meta.T = T;
    out.meta.alpha_policy = policy.describe();
    for_each_node(exec, grid, [&](int i, int j) {
        const PointEntropy pe = weighted_ftme_at(field, vec2(grid.x(i), grid.y(j)), T, steps, policy);
        store(out, i, j, pe.H, pe.status);
    });
    return out;
}

ScalarField2D ftle_field(const VectorField& field, const Grid2D& grid, double T, int steps,
                         FtleDirection direction, Exec exec)
{
    require_planar(field, "ftle_field");
    require_horizon(T, "ftle_field");
    ScalarField2D out(grid);
    out.meta.kind = direction == FtleDirection::forward ? "ftle-forward" : "ftle-backward";
    out.meta.T = T;
    out.meta.alpha_policy = "none";
    const double t1 = direction == FtleDirection::forward ? T : -T;
    for_each_node(exec, grid, [&](int i, int j) {
        try {
            const FlowResult flow = integrate_flow(field, vec2(grid.x(i), grid.y(j)), 0.0, t1, steps);
            store(out, i, j, svd_small(flow.Phi, T).lambda[0], NodeStatus::valid);
        } catch (const TrajectoryBlowUp&) {
            store(out, i, j, 0.0, NodeStatus::blow_up);
        } catch (const DegenerateMatrix&) {
            store(out, i, j, 0.0, NodeStatus::blow_up);
        }
    });
    return out;
}

ScalarField2D stretching_rate_field(const VectorField& field, const Grid2D& grid, double T, int steps, Exec exec)
{
    require_planar(field, "stretching_rate_field");
    require_autonomous(field, "stretching_rate_field");
    require_horizon(T, "stretching_rate_field");
    ScalarField2D out(grid);
    out.meta.kind = "stretching-rate";
    out.meta.T = T;
    out.meta.alpha_policy = "stretching";
    for_each_node(exec, grid, [&](int i, int j) {
        try {
            const StretchingRate sr = stretching_rate(field, vec2(grid.x(i), grid.y(j)), T, steps);
            if (sr.at_equilibrium) {
                store(out, i, j, 0.0, NodeStatus::equilibrium);
            } else if (!std::isfinite(sr.alpha)) {
                store(out, i, j, 0.0, NodeStatus::blow_up);
            } else {
                store(out, i, j, sr.alpha, NodeStatus::valid);
            }
        } catch (const TrajectoryBlowUp&) {
            store(out, i, j, 0.0, NodeStatus::blow_up);
        }
    });
    return out;
}

std::string to_string(ExtremumKind k)
{
    switch (k) {
    case ExtremumKind::max: return "max";
    case ExtremumKind::min: return "min";
    case ExtremumKind::saddle: return "saddle";
    }
    return "unknown";
}

std::vector<Extremum> extract_extrema(const ScalarField2D& field, std::optional<double> gradient_tol)
{
    const Grid2D& g = field.grid;
    if (g.nx < 3 || g.ny < 3) {
        throw InvalidArgument("extract_extrema: grid must be at least 3x3");
    }
    std::vector<Extremum> out;
    const auto range = field.valid_range();
    if (!range) {
        return out;
    }
    const double dx = g.dx();
    const double dy = g.dy();

    // Without an explicit tolerance a node is critical along an axis when the one-sided
    // differences change sign, i.e. that gradient component vanishes inside the node's cell.
    // A threshold on central differences flags nearly every node of a steep, narrow ridge field.
    const bool crossing_mode = !gradient_tol.has_value();
    const double tol = gradient_tol.value_or(0.0);

    for (int j = 1; j < g.ny - 1; ++j) {
        for (int i = 1; i < g.nx - 1; ++i) {
            bool neighbours_valid = true;
            for (int dj = -1; dj <= 1 && neighbours_valid; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (!field.valid(i + di, j + dj)) {
                        neighbours_valid = false;
                        break;
                    }
                }
            }
            if (!neighbours_valid) {
                continue;
            }
            const double c = field.at(i, j);
            if (crossing_mode) {
                bool is_max = false;
                bool is_min = false;
                for (const auto& [a, b] : {std::pair{field.at(i - 1, j), field.at(i + 1, j)},
                                          std::pair{field.at(i, j - 1), field.at(i, j + 1)}}) {
                    is_max = is_max || (c > a && c > b);
                    is_min = is_min || (c < a && c < b);
                }
                if (is_max && is_min) {
                    out.push_back({i, j, ExtremumKind::saddle});
                } else if (is_max) {
                    out.push_back({i, j, ExtremumKind::max});
                } else if (is_min) {
                    out.push_back({i, j, ExtremumKind::min});
                }
                continue;
            }
            const double gx = (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * dx);
            const double gy = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * dy);
            if (std::abs(gx) > tol || std::abs(gy) > tol) {
                continue;
            }
            const double hxx = (field.at(i + 1, j) - 2.0 * c + field.at(i - 1, j)) / (dx * dx);
            const double hyy = (field.at(i, j + 1) - 2.0 * c + field.at(i, j - 1)) / (dy * dy);
            const double hxy = (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) - field.at(i - 1, j + 1) +
                                field.at(i - 1, j - 1)) /
                               (4.0 * dx * dy);
            const double mean = 0.5 * (hxx + hyy);
            const double radius = std::hypot(0.5 * (hxx - hyy), hxy);
            const double e_hi = mean + radius;
            const double e_lo = mean - radius;
            ExtremumKind kind = ExtremumKind::saddle;
            if (e_hi <= 0.0) {
                kind = ExtremumKind::max;
            } else if (e_lo >= 0.0) {
                kind = ExtremumKind::min;
            }
            out.push_back({i, j, kind});
        }
    }
    return out;
}

std::string to_string(ConeMembership m)
{
    switch (m) {
    case ConeMembership::unstable_cone: return "unstable_cone";
    case ConeMembership::stable_cone: return "stable_cone";
    case ConeMembership::neither: return "neither";
    }
    return "unknown";
}

std::vector<ConeReport> cone_check(const VectorField& field, const ConeParams& p,
                                   const std::vector<ConeTestPoint>& points)
{
    require_planar(field, "cone_check");
    require_autonomous(field, "cone_check");
    require_horizon(p.T, "cone_check");
    if (!(p.lambda1 > 0.0 && p.lambda2 < 0.0)) {
        throw InvalidArgument("cone_check: need lambda1 > 0 > lambda2");
    }
    const Mat D = field.jacobian(0.0, p.xstar);
    if (field.rhs(0.0, p.xstar).norm() > 1e-10) {
        throw InvalidArgument("cone_check: x* is not an equilibrium");
    }
    for (const auto& [e, l] : {std::pair{p.e1, p.lambda1}, std::pair{p.e2, p.lambda2}}) {
        if (std::abs(e.norm() - 1.0) > 1e-8 || (D * e - l * e).norm() > 1e-8) {
            throw InvalidArgument("cone_check: e1/e2 are not unit eigenvectors of D_x f(x*)");
        }
    }

    const double unstable_thr = 2.0 * std::exp(-0.25 * p.eps * p.T);
    const double stable_thr = 0.25 * p.eps * std::exp((p.lambda2 - p.lambda1) * p.T);
    const double gap = p.lambda1 - p.lambda2;

    std::vector<ConeReport> reports(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        ConeReport& r = reports[k];
        r.x = points[k].x;
        r.tag = points[k].tag;
        r.unstable_threshold = unstable_thr;
        r.stable_threshold = stable_thr;
        const Vec offset = r.x - p.xstar;
        const double dist = offset.norm();
        r.in_ball = dist > 0.0 && dist <= p.delta;
        if (!r.in_ball) {
            continue;
        }
        r.sine_to_e2 = std::abs(cross2(offset, p.e2)) / dist;
        if (r.sine_to_e2 >= unstable_thr) {
            r.membership = ConeMembership::unstable_cone;
        } else if (r.sine_to_e2 <= stable_thr) {
            r.membership = ConeMembership::stable_cone;
        }

        const PointEntropy pe = weighted_ftme_at(field, r.x, p.T, p.steps);
        r.H = pe.H;
        if (pe.status != NodeStatus::valid) {
            r.bound_ok = r.unstable_ok = r.stable_ok = false;
            continue;
        }
        r.bound_ok = r.H >= 0.0 && r.H < gap + p.eps;
        if (r.membership == ConeMembership::unstable_cone || r.tag == ManifoldTag::unstable) {
            r.unstable_ok = r.H < p.eps;
        }
        if (r.membership == ConeMembership::stable_cone || r.tag == ManifoldTag::stable) {
            r.stable_ok = r.H > p.lambda1 - p.eps;
        }
        if (r.tag == ManifoldTag::stable) {
            r.stable_ok = r.stable_ok && r.H > gap - p.eps && r.H < gap + p.eps;
        }
    }
    return reports;
}

ConeSetup make_cone_setup(const BuiltinSystem& system, double eps, double T, double delta, int per_manifold,
                          int random_points, std::uint64_t seed, double steps_per_unit)
{
    require_horizon(T, "make_cone_setup");
    if (!(delta > 0.0) || per_manifold < 0 || random_points < 0) {
        throw InvalidArgument("make_cone_setup: delta must be positive and counts non-negative");
    }
    ConeSetup setup;
    ConeParams& p = setup.params;
    p.xstar = vec2(0.0, 0.0);
    p.eps = eps;
    p.T = T;
    p.delta = delta;
    p.steps = steps_for(T, steps_per_unit);

    // Stable-manifold height x2 = -c x1^2 (c = 0 for linear systems, in eigen-coordinates).
    double parabola_c = 0.0;
    bool parabola = false;
    if (const auto* par = std::get_if<Parabola>(&system)) {
        parabola = true;
        parabola_c = par->beta / (2.0 + par->gamma);
        p.lambda1 = par->gamma;
        p.lambda2 = -1.0;
        p.e1 = vec2(0.0, 1.0);
        p.e2 = vec2(1.0, 0.0);
    } else {
        const VectorField f = make_field(system);
        if (f.dimension != 2) {
            throw InvalidArgument("make_cone_setup: planar system required");
        }
        const Mat A = f.jacobian(0.0, p.xstar);
        const double half_tr = 0.5 * A.trace();
        const double disc = half_tr * half_tr - A.determinant();
        if (!(disc > 0.0)) {
            throw InvalidArgument("make_cone_setup: equilibrium is not a saddle");
        }
        p.lambda1 = half_tr + std::sqrt(disc);
        p.lambda2 = half_tr - std::sqrt(disc);
        if (!(p.lambda1 > 0.0 && p.lambda2 < 0.0)) {
            throw InvalidArgument("make_cone_setup: equilibrium is not a saddle");
        }
        auto eigvec = [&](double l) {
            // (A - l I) v = 0: take the larger of the two row-derived candidates.
            const Vec c1 = vec2(A(0, 1), l - A(0, 0));
            const Vec c2 = vec2(l - A(1, 1), A(1, 0));
            Vec v = c1.norm() >= c2.norm() ? c1 : c2;
            v.normalize();
            if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) {
                v = -v;
            }
            return v;
        };
        p.e1 = eigvec(p.lambda1);
        p.e2 = eigvec(p.lambda2);
    }

    for (int k = 1; k <= per_manifold; ++k) {
        const double r = 0.999 * delta * k / per_manifold;
        for (const double sign : {1.0, -1.0}) {
            setup.points.push_back({p.xstar + sign * r * p.e1, ManifoldTag::unstable});
            Vec on_stable = p.xstar + sign * r * p.e2;
            if (parabola) {
                on_stable[1] = -parabola_c * on_stable[0] * on_stable[0];
                if ((on_stable - p.xstar).norm() > delta) {
                    continue;
                }
            }
            setup.points.push_back({on_stable, ManifoldTag::stable});
        }
    }
    for (int k = 0; k < random_points; ++k) {
        CounterRng rng(seed, static_cast<std::uint64_t>(k));
        Vec u(2);
        do {
            u << rng.symmetric(), rng.symmetric();
        } while (u.squaredNorm() > 1.0 || u.squaredNorm() == 0.0);
        setup.points.push_back({p.xstar + delta * u, ManifoldTag::none});
    }
    return setup;
}

std::vector<EquilibriumGap> stretching_rate_near_equilibrium_gap(const VectorField& field, const Vec& xstar,
                                                                 const std::vector<Vec>& points, double T,
                                                                 int steps)
{
    require_autonomous(field, "stretching_rate_near_equilibrium_gap");
    require_horizon(T, "stretching_rate_near_equilibrium_gap");
    const Mat D = field.jacobian(0.0, xstar);
    if (!(std::abs(D.determinant()) > 0.0)) {
        throw DegenerateMatrix("stretching_rate_near_equilibrium_gap: D_x f(x*) is singular");
    }
    const double bound = (std::log(operator_norm(D)) + std::log(operator_norm(D.inverse()))) / T;
    const Mat phi_star = integrate_flow(field, xstar, 0.0, T, steps).Phi;

    std::vector<EquilibriumGap> out;
    out.reserve(points.size());
    for (const Vec& x0 : points) {
        const Vec offset = x0 - xstar;
        if (!(offset.norm() > 0.0)) {
            throw InvalidArgument("stretching_rate_near_equilibrium_gap: points must differ from x*");
        }
        const StretchingRate sr = stretching_rate(field, x0, T, steps);
        if (sr.at_equilibrium) {
            throw InvalidArgument("stretching_rate_near_equilibrium_gap: point is (numerically) an equilibrium");
        }
        const double linear_rate = directional_stretching_rate(phi_star, offset, T);
        out.push_back({x0, std::abs(sr.alpha - linear_rate), bound});
    }
    return out;
}

}  // namespace ftme
