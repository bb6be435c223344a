#include "ftme/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ftme/errors.hpp"
#include "ftme/rng.hpp"
#include "ftme/spectra.hpp"

namespace ftme {

namespace {

constexpr double kBranchTol = 1e-12;

double positive_part(double v)
{
    return v > 0.0 ? v : 0.0;
}

EntropyResult from_counts(std::uint64_t hits, std::uint64_t samples, double alpha, double J_len)
{
    EntropyResult r;
    r.alpha = alpha;
    r.method = EntropyMethod::monte_carlo;
    r.sample_count = samples;
    r.hits = hits;
    r.horizon = J_len;
    if (hits == 0) {
        r.empty_intersection = true;
        r.h = std::numeric_limits<double>::infinity();
        r.std_error = 0.0;
        return r;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    r.h = -std::log(p) / J_len;
    if (r.h <= 0.0) {
        r.h = 0.0;  // p == 1 gives -0.0
    }
    const double sigma_p = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    r.std_error = sigma_p / (p * J_len);
    return r;
}

void check_matrix_times(const std::vector<TimedMatrix>& mats, const TimeSet& J, int n)
{
    if (mats.size() != J.times.size()) {
        throw InvalidArgument("ftme_monte_carlo: need exactly one matrix per time in J");
    }
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].t != J.times[i]) {
            throw InvalidArgument("ftme_monte_carlo: matrix times must match J in order");
        }
        if (mats[i].Phi.rows() != n || mats[i].Phi.cols() != n) {
            throw InvalidArgument("ftme_monte_carlo: matrix dimension mismatch");
        }
        if (!(std::abs(mats[i].Phi.determinant()) > 0.0)) {
            throw DegenerateMatrix("ftme_monte_carlo: fundamental matrix is singular");
        }
    }
}

void check_positive_definite(const Mat& G)
{
    if (G.rows() != G.cols() || G.rows() < 1 || G.rows() > kMaxDim) {
        throw InvalidArgument("Gamma must be square with size 1..4");
    }
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("Gamma must be symmetric positive definite");
    }
    const SymmetricEigen eig = symmetric_eigen_jacobi(G);
    if (!(eig.values[eig.values.size() - 1] > 0.0)) {
        throw InvalidArgument("Gamma must be symmetric positive definite");
    }
}

// Per-time membership matrices e^{-alpha(t-t0)} Gamma Phi Gamma^{-1}.
std::vector<Mat> membership_matrices(const std::vector<TimedMatrix>& mats, double alpha, double t0,
                                     const std::optional<Mat>& gamma)
{
    std::vector<Mat> out;
    out.reserve(mats.size());
    Mat g_inv;
    if (gamma) {
        g_inv = gamma->inverse();
    }
    for (const TimedMatrix& tm : mats) {
        Mat M = std::exp(-alpha * (tm.t - t0)) * tm.Phi;
        if (gamma) {
            M = (*gamma) * M * g_inv;
        }
        out.push_back(M);
    }
    return out;
}

}  // namespace

TimeSet TimeSet::two_point(double t0, double T)
{
    TimeSet J;
    J.t0 = t0;
    J.times = T >= 0.0 ? std::vector<double>{t0, t0 + T} : std::vector<double>{t0 + T, t0};
    return J;
}

double TimeSet::length() const
{
    if (times.empty()) {
        return 0.0;
    }
    return times.back() - times.front();
}

void TimeSet::validate() const
{
    if (times.size() < 2) {
        throw InvalidArgument("time set needs at least two times");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidArgument("time set must be strictly ascending");
        }
    }
    if (std::find(times.begin(), times.end(), t0) == times.end()) {
        throw InvalidArgument("time set must contain t0");
    }
    if (!(length() > 0.0)) {
        throw InvalidArgument("time set must have positive length");
    }
}

std::string to_string(EntropyMethod m)
{
    switch (m) {
    case EntropyMethod::exact1d: return "exact1d";
    case EntropyMethod::exact2d: return "exact2d";
    case EntropyMethod::incompressible: return "incompressible";
    case EntropyMethod::monte_carlo: return "monte_carlo";
    case EntropyMethod::lower_bound: return "lower_bound";
    case EntropyMethod::upper_bound: return "upper_bound";
    }
    return "unknown";
}

EntropyResult ftme_1d(double lambda1, double alpha)
{
    EntropyResult r;
    r.h = positive_part(lambda1 - alpha);
    r.alpha = alpha;
    r.method = EntropyMethod::exact1d;
    return r;
}

EntropyResult ftme_2d_exact(double lambda1, double lambda2, double alpha, double T)
{
    if (!(T > 0.0)) {
        throw InvalidArgument("ftme_2d_exact: T must be positive");
    }
    if (lambda1 < lambda2) {
        throw InvalidArgument("unsorted exponents");
    }
    EntropyResult r;
    r.alpha = alpha;
    r.method = EntropyMethod::exact2d;
    r.horizon = T;

    // log kappa_i
    const double u1 = (lambda1 - alpha) * T;
    const double u2 = (lambda2 - alpha) * T;

    if (u1 <= std::log1p(kBranchTol)) {
        r.h = 0.0;  // ball maps into itself
        return r;
    }
    if (u2 >= std::log1p(-kBranchTol)) {
        r.h = (u1 + u2) / T;  // ellipse lies inside the ball
        return r;
    }

    // kappa1 > 1 > kappa2: area of disk / ellipse intersection. The two arccos terms are
    // evaluated as atan2 of their sine and cosine, which stays accurate for kappa1 >> 1
    // and kappa2 near 1:
    //   arccos sqrt((k1^2-1)/(k1^2-k2^2))        = atan2(sqrt(1-k2^2), sqrt(k1^2-1))
    //   arccos k1 sqrt((1-k2^2)/(k1^2-k2^2))     = atan2(k2 sqrt(k1^2-1), k1 sqrt(1-k2^2))
    const double s1 = std::sqrt(-std::expm1(-2.0 * u1));  // sqrt(1 - k1^-2)
    const double s2 = std::sqrt(-std::expm1(2.0 * u2));   // sqrt(1 - k2^2)
    const double inv_k1 = std::exp(-u1);
    const double k2 = std::exp(u2);

    const double first = std::atan2(s2 * inv_k1, s1);
    double second_over_k2 = 0.0;  // arccos(...) / k2
    if (k2 > 1e-150) {
        second_over_k2 = std::atan2(k2 * s1, s2) / k2;
    } else {
        second_over_k2 = s1 / s2;
    }
    const double ratio = (2.0 / std::numbers::pi) * (first + inv_k1 * second_over_k2);
    r.h = std::max(0.0, -std::log(ratio) / T);
    return r;
}

EntropyResult ftme_2d_incompressible(double lambda1, double T)
{
    if (!(T > 0.0)) {
        throw InvalidArgument("ftme_2d_incompressible: T must be positive");
    }
    if (lambda1 < 0.0) {
        throw InvalidArgument("ftme_2d_incompressible: lambda1 must be non-negative");
    }
    // arccos sqrt(e^{2 l T} / (e^{2 l T} + 1)) == atan(e^{-l T})
    const double angle = std::atan(std::exp(-lambda1 * T));
    EntropyResult r;
    r.h = std::max(0.0, -std::log((4.0 / std::numbers::pi) * angle) / T);
    r.alpha = 0.0;
    r.method = EntropyMethod::incompressible;
    r.horizon = T;
    return r;
}

namespace kernels {

Vec sample_unit_ball(int n, std::uint64_t seed, std::uint64_t index)
{
    CounterRng rng(seed, index);
    Vec u(n);
    for (;;) {
        double r2 = 0.0;
        for (int k = 0; k < n; ++k) {
            u[k] = rng.symmetric();
            r2 += u[k] * u[k];
        }
        if (r2 <= 1.0) {
            return u;
        }
    }
}

namespace {

bool inside_all(const std::vector<Mat>& mats, const Vec& u)
{
    for (const Mat& M : mats) {
        if ((M * u).squaredNorm() > 1.0) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::uint64_t count_in_intersection_serial(const std::vector<Mat>& mats, int n, std::uint64_t samples,
                                           std::uint64_t seed)
{
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        if (inside_all(mats, sample_unit_ball(n, seed, i))) {
            ++hits;
        }
    }
    return hits;
}

std::uint64_t count_in_intersection_parallel(const std::vector<Mat>& mats, int n, std::uint64_t samples,
                                             std::uint64_t seed)
{
    const auto total = static_cast<long long>(samples);
    unsigned long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static) num_threads(worker_count())
    for (long long i = 0; i < total; ++i) {
        if (inside_all(mats, sample_unit_ball(n, seed, static_cast<std::uint64_t>(i)))) {
            ++hits;
        }
    }
    return hits;
}

}  // namespace kernels

EntropyResult ftme_monte_carlo(const std::vector<TimedMatrix>& mats, double alpha, const TimeSet& J,
                               const MonteCarloOptions& opts)
{
    J.validate();
    if (opts.samples < 1) {
        throw InvalidArgument("ftme_monte_carlo: samples must be >= 1");
    }
    if (mats.empty()) {
        throw InvalidArgument("ftme_monte_carlo: no matrices");
    }
    const int n = static_cast<int>(mats.front().Phi.rows());
    check_matrix_times(mats, J, n);
    if (opts.gamma) {
        check_positive_definite(*opts.gamma);
        if (opts.gamma->rows() != n) {
            throw InvalidArgument("ftme_monte_carlo: Gamma dimension mismatch");
        }
    }
    const std::vector<Mat> membership = membership_matrices(mats, alpha, J.t0, opts.gamma);
    const std::uint64_t hits = opts.exec == Exec::serial
                                   ? kernels::count_in_intersection_serial(membership, n, opts.samples, opts.seed)
                                   : kernels::count_in_intersection_parallel(membership, n, opts.samples, opts.seed);
    return from_counts(hits, opts.samples, alpha, J.length());
}

EntropyResult linearized_ftme(const VectorField& field, const Vec& x0, const TimeSet& J, double alpha,
                              const MonteCarloOptions& opts, double steps_per_unit)
{
    J.validate();
    const std::vector<FlowResult> flows = integrate_flow_to_times(field, x0, J.t0, J.times, steps_per_unit);
    std::vector<TimedMatrix> mats;
    mats.reserve(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        mats.push_back({J.times[i], flows[i].Phi});
    }
    return ftme_monte_carlo(mats, alpha, J, opts);
}

double pesin_bound(int n, double T)
{
    if (!(T > 0.0)) {
        throw InvalidArgument("pesin_bound: T must be positive");
    }
    const double half = 0.5 * n;
    return (n * std::log(2.0) + std::lgamma(half + 1.0) - half * std::log(std::numbers::pi)) / T;
}

PesinGap pesin_gap(const std::vector<double>& lambdas, double alpha, double h, int n, double T, double tol)
{
    PesinGap out;
    double sum = 0.0;
    for (const double l : lambdas) {
        sum += positive_part(l - alpha);
    }
    out.gap = sum - h;
    out.bound = pesin_bound(n, T);
    out.ok = out.gap >= -tol && out.gap <= out.bound + tol;
    return out;
}

PesinGap pesin_gap(const std::vector<double>& lambdas, double alpha, const EntropyResult& h, int n, double T)
{
    if (h.empty_intersection) {
        PesinGap out;
        out.gap = -std::numeric_limits<double>::infinity();
        out.bound = pesin_bound(n, T);
        out.ok = false;
        return out;
    }
    const double tol = h.method == EntropyMethod::monte_carlo ? 4.0 * h.std_error : 1e-9;
    return pesin_gap(lambdas, alpha, h.h, n, T, tol);
}

NormSample norm_sample(double t, const Mat& Phi)
{
    return NormSample{t, operator_norm(Phi), operator_norm(Phi.inverse())};
}

NormBounds ftme_norm_bounds(const std::vector<NormSample>& samples, double alpha, const TimeSet& J, int n)
{
    J.validate();
    if (samples.size() != J.times.size()) {
        throw InvalidArgument("ftme_norm_bounds: need one norm sample per time in J");
    }
    const double scale = static_cast<double>(n) / J.length();
    double inf_inverse = std::numeric_limits<double>::infinity();  // inf e^{a(t-t0)} ||Phi^{-1}||
    double sup_inverse = 0.0;                                        // sup e^{a(t-t0)} ||Phi^{-1}||
    double inf_forward = std::numeric_limits<double>::infinity();  // inf e^{a(t-t0)} / ||Phi||
    for (const NormSample& s : samples) {
        const double w = std::exp(alpha * (s.t - J.t0));
        inf_inverse = std::min(inf_inverse, w * s.inverse_norm);
        sup_inverse = std::max(sup_inverse, w * s.inverse_norm);
        inf_forward = std::min(inf_forward, w / s.norm);
    }
    NormBounds out;
    out.lower = -scale * std::log(inf_inverse);
    out.upper = -scale * std::log(inf_forward);
    out.literal_lower = scale * std::log(sup_inverse);
    out.literal_upper = scale * std::log(inf_forward);
    return out;
}

double ftme_along_trajectory(double h_t0, double alpha, double t, double t0, const TimeSet& J, int n,
                             double det_phi)
{
    if (det_phi == 0.0 || !std::isfinite(det_phi)) {
        throw InvalidArgument("ftme_along_trajectory: det Phi must be finite and non-zero");
    }
    const double len = J.length();
    if (!(len > 0.0)) {
        throw InvalidArgument("ftme_along_trajectory: |J| must be positive");
    }
    return h_t0 + n * alpha * (t - t0) / len - std::log(std::abs(det_phi)) / len;
}

double gamma_norm_deviation(const Mat& Gamma, int n, double J_len)
{
    check_positive_definite(Gamma);
    if (!(J_len > 0.0)) {
        throw InvalidArgument("gamma_norm_deviation: |J| must be positive");
    }
    return (n * std::log(operator_norm(Gamma)) + n * std::log(operator_norm(Gamma.inverse()))) / J_len;
}

EntropyResult empirical_escape_rate(const VectorField& field, const Vec& x0, const TimeSet& J, double alpha,
                                    double eps, const MonteCarloOptions& opts, double steps_per_unit)
{
    J.validate();
    if (!(eps > 0.0)) {
        throw InvalidArgument("empirical_escape_rate: eps must be positive");
    }
    if (opts.samples < 1) {
        throw InvalidArgument("empirical_escape_rate: samples must be >= 1");
    }
    const int n = field.dimension;
    const std::vector<Vec> reference = integrate_state_to_times(field, x0, J.t0, J.times, steps_per_unit);
    std::vector<double> radius(J.times.size());
    for (std::size_t k = 0; k < J.times.size(); ++k) {
        radius[k] = eps * std::exp(alpha * (J.times[k] - J.t0));
    }

    auto stays_close = [&](std::uint64_t i) {
        const Vec start = x0 + eps * kernels::sample_unit_ball(n, opts.seed, i);
        try {
            const std::vector<Vec> traj = integrate_state_to_times(field, start, J.t0, J.times, steps_per_unit);
            for (std::size_t k = 0; k < traj.size(); ++k) {
                if ((traj[k] - reference[k]).norm() > radius[k]) {
                    return false;
                }
            }
            return true;
        } catch (const TrajectoryBlowUp&) {
            return false;
        }
    };

    const auto total = static_cast<long long>(opts.samples);
    unsigned long long hits = 0;
    if (opts.exec == Exec::serial) {
        for (long long i = 0; i < total; ++i) {
            hits += stays_close(static_cast<std::uint64_t>(i)) ? 1 : 0;
        }
    } else {
#pragma omp parallel for reduction(+ : hits) schedule(dynamic, 256) num_threads(worker_count())
        for (long long i = 0; i < total; ++i) {
            hits += stays_close(static_cast<std::uint64_t>(i)) ? 1 : 0;
        }
    }
    return from_counts(hits, opts.samples, alpha, J.length());
}

double coherent_pair_ratio(double h, double T)
{
    if (!(T > 0.0)) {
        throw InvalidArgument("coherent_pair_ratio: T must be positive");
    }
    if (std::isinf(h) && h > 0.0) {
        return 0.0;
    }
    return std::exp(-h * T);
}

double coherent_pair_ratio(const EntropyResult& h, double T)
{
    return h.empty_intersection ? 0.0 : coherent_pair_ratio(h.h, T);
}

}  // namespace ftme
