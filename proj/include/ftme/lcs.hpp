#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftme/dynamics.hpp"
#include "ftme/fieldio.hpp"
#include "ftme/linalg.hpp"
#include "ftme/parallel.hpp"

namespace ftme {

/// Norms of f below this count as an equilibrium (the stretching rate divides by ||f||).
inline constexpr double kEquilibriumThreshold = 1e-12;

struct StretchingRate {
    double alpha = 0.0;
    Vec direction;
    bool at_equilibrium = false;
};

/// (1/T) log(||Phi v|| / ||v||).
double directional_stretching_rate(const Mat& Phi, const Vec& v, double T);

/// Stretching rate along the vector field, (1/T) log(||f(phi(T,x0))|| / ||f(x0)||),
/// computed from a single trajectory. Autonomous fields only.
StretchingRate stretching_rate(const VectorField& field, const Vec& x0, double T, int steps);

/// Weight used by the weighted FTME field at each node.
struct AlphaPolicy {
    enum class Kind { stretching, lambda2, fixed };
    Kind kind = Kind::stretching;
    double value = 0.0;

    static AlphaPolicy stretching() { return {Kind::stretching, 0.0}; }
    static AlphaPolicy lambda2() { return {Kind::lambda2, 0.0}; }
    static AlphaPolicy fixed(double a) { return {Kind::fixed, a}; }
    std::string describe() const;
};

/// Everything computed at one base point of the weighted FTME field.
struct PointEntropy {
    double H = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double alpha = 0.0;
    NodeStatus status = NodeStatus::valid;
};

/// One trajectory over [0, T] with its variational matrix; H from the exact planar formula.
PointEntropy weighted_ftme_at(const VectorField& field, const Vec& x, double T, int steps,
                              AlphaPolicy policy = AlphaPolicy::stretching());

ScalarField2D weighted_ftme_field(const VectorField& field, const Grid2D& grid, double T, int steps,
                                  AlphaPolicy policy = AlphaPolicy::stretching(), Exec exec = Exec::parallel);

enum class FtleDirection { forward, backward };

/// lambda1 of Phi over [0, T] (forward) or [0, -T] (backward) at each node.
ScalarField2D ftle_field(const VectorField& field, const Grid2D& grid, double T, int steps,
                         FtleDirection direction, Exec exec = Exec::parallel);

/// Stretching rate along the vector field at each node; equilibria are masked.
ScalarField2D stretching_rate_field(const VectorField& field, const Grid2D& grid, double T, int steps,
                                    Exec exec = Exec::parallel);

enum class ExtremumKind { max, min, saddle };

std::string to_string(ExtremumKind k);

struct Extremum {
    int i = 0;
    int j = 0;
    ExtremumKind kind = ExtremumKind::saddle;
};

/// Interior ridge/trough nodes. By default a node is a max (min) when it is a strict local
/// max (min) along x or y, and a saddle when both hold. With `gradient_tol` set, nodes whose
/// central-difference gradient is within the tolerance are classified by the discrete
/// Hessian eigenvalue signs instead. Nodes with masked neighbours are skipped.
std::vector<Extremum> extract_extrema(const ScalarField2D& field, std::optional<double> gradient_tol = std::nullopt);

enum class ConeMembership { unstable_cone, stable_cone, neither };

std::string to_string(ConeMembership m);

/// Which invariant manifold (if any) a cone test point was sampled from.
enum class ManifoldTag { none, unstable, stable };

struct ConeTestPoint {
    Vec x;
    ManifoldTag tag = ManifoldTag::none;
};

struct ConeParams {
    Vec xstar;
    Vec e1;  ///< unit eigenvector of D_x f(x*) for lambda1 > 0
    Vec e2;  ///< unit eigenvector of D_x f(x*) for lambda2 < 0
    double lambda1 = 1.0;
    double lambda2 = -1.0;
    double eps = 0.25;
    double T = 8.0;
    double delta = 0.05;
    int steps = 800;
};

struct ConeReport {
    Vec x;
    ManifoldTag tag = ManifoldTag::none;
    ConeMembership membership = ConeMembership::neither;
    double H = 0.0;
    double sine_to_e2 = 0.0;
    double unstable_threshold = 0.0;  ///< 2 e^{-eps T / 4}
    double stable_threshold = 0.0;    ///< (eps / 4) e^{(lambda2 - lambda1) T}
    bool in_ball = true;
    bool bound_ok = true;      ///< H in [0, lambda1 - lambda2 + eps)
    bool unstable_ok = true;   ///< H < eps on the unstable cone and on W^u
    bool stable_ok = true;     ///< H > lambda1 - eps on the stable cone; on W^s also |H - (l1 - l2)| < eps

    bool ok() const { return bound_ok && unstable_ok && stable_ok; }
};

/// Evaluates the cone statements near a hyperbolic saddle at every test point inside
/// B(x*, delta) (points outside are reported with in_ball = false and not judged).
/// Throws InvalidArgument when e1/e2 are not eigenvectors of D_x f(x*) to 1e-8.
std::vector<ConeReport> cone_check(const VectorField& field, const ConeParams& params,
                                   const std::vector<ConeTestPoint>& points);

/// Cone parameters and test points for a built-in planar system with a saddle at the
/// origin (linear systems with real eigenvalues of opposite sign, or Parabola).
/// Points: `per_manifold` radii in (0, delta] on each side of W^u and W^s, plus
/// `random_points` uniform in B(x*, delta).
struct ConeSetup {
    ConeParams params;
    std::vector<ConeTestPoint> points;
};
ConeSetup make_cone_setup(const BuiltinSystem& system, double eps, double T, double delta, int per_manifold,
                          int random_points, std::uint64_t seed, double steps_per_unit = kDefaultStepsPerUnit);

struct EquilibriumGap {
    Vec x;
    double gap = 0.0;
    double bound = 0.0;
};

/// |alpha(x0) - (1/T) log(||Phi_{x*}(T)(x0 - x*)|| / ||x0 - x*||)| against
/// (1/T)(log ||D_x f(x*)|| + log ||D_x f(x*)^{-1}||) along a sequence x0 -> x*.
std::vector<EquilibriumGap> stretching_rate_near_equilibrium_gap(const VectorField& field, const Vec& xstar,
                                                                 const std::vector<Vec>& points, double T,
                                                                 int steps);

}  // namespace ftme
