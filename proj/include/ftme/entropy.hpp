#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftme/dynamics.hpp"
#include "ftme/linalg.hpp"
#include "ftme/parallel.hpp"

namespace ftme {

/// Finite time set J with base time t0. |J| = max J - min J must be positive.
struct TimeSet {
    double t0 = 0.0;
    std::vector<double> times;

    static TimeSet two_point(double t0, double T);

    double length() const;
    /// Throws InvalidArgument unless times are strictly ascending, contain t0, and |J| > 0.
    void validate() const;
};

enum class EntropyMethod { exact1d, exact2d, incompressible, monte_carlo, lower_bound, upper_bound };

std::string to_string(EntropyMethod m);

struct EntropyResult {
    double h = 0.0;
    double alpha = 0.0;
    EntropyMethod method = EntropyMethod::exact2d;
    double std_error = 0.0;
    std::uint64_t sample_count = 0;
    std::uint64_t hits = 0;
    double horizon = 0.0;
    /// No sample landed in the intersection; h is +infinity and must not be used in arithmetic.
    bool empty_intersection = false;
};

/// Scalar case: (lambda1 - alpha)^+.
EntropyResult ftme_1d(double lambda1, double alpha);

/// Exact planar FTME over a two-point time set from the two FTLEs.
EntropyResult ftme_2d_exact(double lambda1, double lambda2, double alpha, double T);

/// Planar volume-preserving case (lambda2 = -lambda1, alpha = 0).
EntropyResult ftme_2d_incompressible(double lambda1, double T);

/// Fundamental matrix Phi(t, t0) at one time of J.
struct TimedMatrix {
    double t = 0.0;
    Mat Phi;
};

struct MonteCarloOptions {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    Exec exec = Exec::parallel;
    /// Optional positive-definite Gamma: measure distances in the norm ||Gamma . ||.
    std::optional<Mat> gamma;
};

/// Monte Carlo estimate of -(1/|J|) log of the volume fraction of B(0,1) lying in every
/// ellipsoid E(Phi(t,t0) e^{-alpha (t - t0)}), t in J.
EntropyResult ftme_monte_carlo(const std::vector<TimedMatrix>& mats, double alpha, const TimeSet& J,
                               const MonteCarloOptions& opts);

/// Linearized FTME at (t0, x0): integrates Phi(t,t0) for every t in J and runs ftme_monte_carlo.
EntropyResult linearized_ftme(const VectorField& field, const Vec& x0, const TimeSet& J, double alpha,
                              const MonteCarloOptions& opts, double steps_per_unit = kDefaultStepsPerUnit);

struct PesinGap {
    double gap = 0.0;
    double bound = 0.0;
    bool ok = false;
};

/// (n log 2 + log Gamma(n/2 + 1) - (n/2) log pi) / T.
double pesin_bound(int n, double T);

/// gap = sum (lambda_i - alpha)^+ - h, checked against pesin_bound with tolerance `tol`.
PesinGap pesin_gap(const std::vector<double>& lambdas, double alpha, double h, int n, double T,
                   double tol = 1e-9);
/// Tolerance 1e-9 for exact results and 4 standard errors for Monte Carlo ones.
PesinGap pesin_gap(const std::vector<double>& lambdas, double alpha, const EntropyResult& h, int n, double T);

/// Operator norms of Phi(t,t0) and its inverse at one time of J.
struct NormSample {
    double t = 0.0;
    double norm = 1.0;
    double inverse_norm = 1.0;
};

struct NormBounds {
    // Sandwich derived from the ball inclusions r B(0,1) in B^alpha in R B(0,1):
    // lower = -(n/|J|) log inf_t e^{alpha(t-t0)} ||Phi^{-1}||,
    // upper = -(n/|J|) log inf_t e^{alpha(t-t0)} / ||Phi||.
    double lower = 0.0;
    double upper = 0.0;
    // The same two expressions as commonly printed, without the leading minus sign
    // and with sup in the lower bound. Reported for comparison only.
    double literal_lower = 0.0;
    double literal_upper = 0.0;
};

NormSample norm_sample(double t, const Mat& Phi);
NormBounds ftme_norm_bounds(const std::vector<NormSample>& samples, double alpha, const TimeSet& J, int n);

/// FTME at the evolved base point phi(t,t0)x0 from the FTME at (t0, x0).
double ftme_along_trajectory(double h_t0, double alpha, double t, double t0, const TimeSet& J, int n,
                             double det_phi);

/// (n log ||Gamma|| + n log ||Gamma^{-1}||) / |J| for symmetric positive-definite Gamma.
double gamma_norm_deviation(const Mat& Gamma, int n, double J_len);

/// Direct sampling of the orbit-metric ball of radius eps around x0 through the nonlinear flow.
EntropyResult empirical_escape_rate(const VectorField& field, const Vec& x0, const TimeSet& J, double alpha,
                                    double eps, const MonteCarloOptions& opts,
                                    double steps_per_unit = kDefaultStepsPerUnit);

/// Predicted retained mass fraction e^{-hT} of a coherent pair.
double coherent_pair_ratio(double h, double T);
double coherent_pair_ratio(const EntropyResult& h, double T);

namespace kernels {

/// Uniform point in the closed unit ball, deterministic in (seed, index).
Vec sample_unit_ball(int n, std::uint64_t seed, std::uint64_t index);

/// Number of samples u in B(0,1) with ||M_k u|| <= 1 for all k.
std::uint64_t count_in_intersection_serial(const std::vector<Mat>& mats, int n, std::uint64_t samples,
                                           std::uint64_t seed);
std::uint64_t count_in_intersection_parallel(const std::vector<Mat>& mats, int n, std::uint64_t samples,
                                             std::uint64_t seed);

}  // namespace kernels

}  // namespace ftme
