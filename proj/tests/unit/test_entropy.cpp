#include <doctest.h>

#include <cmath>
#include <random>

#include "ftme/entropy.hpp"
#include "ftme/errors.hpp"

using namespace ftme;

namespace {

// Area of {x^2 + y^2 <= 1} intersected with {(k1 x)^2 + (k2 y)^2 <= 1} by composite
// Simpson in x; the integrand has kinks, so the grid is fine enough to make that harmless.
double disk_ellipse_area(double k1, double k2)
{
    const double a = std::min(1.0, 1.0 / k1);
    const int m = 400000;
    const double h = 2.0 * a / m;
    auto g = [&](double x) {
        const double disk = std::sqrt(std::max(0.0, 1.0 - x * x));
        const double ell = std::sqrt(std::max(0.0, 1.0 - k1 * k1 * x * x)) / k2;
        return 2.0 * std::min(disk, ell);
    };
    double s = g(-a) + g(a);
    for (int i = 1; i < m; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * g(-a + i * h);
    }
    return s * h / 3.0;
}

std::vector<TimedMatrix> two_point(const Mat& Phi, double T)
{
    return {{0.0, Mat::Identity(Phi.rows(), Phi.cols())}, {T, Phi}};
}

}  // namespace

TEST_CASE("scalar FTME")
{
    CHECK(ftme_1d(1.5, 0.5).h == doctest::Approx(1.0));
    CHECK(ftme_1d(0.2, 0.5).h == 0.0);
    CHECK(ftme_1d(0.2, 0.5).method == EntropyMethod::exact1d);
}

TEST_CASE("planar exact FTME against quadrature of the disk/ellipse intersection")
{
    const EntropyResult r = ftme_2d_exact(std::log(2.0), -std::log(2.0), 0.0, 1.0);
    const double ratio = disk_ellipse_area(2.0, 0.5) / M_PI;
    CHECK(ratio == doctest::Approx(0.5903).epsilon(1e-4));
    CHECK(r.h == doctest::Approx(-std::log(ratio)).epsilon(1e-7));
    CHECK(r.h == doctest::Approx(0.5271).epsilon(1e-4));

    const double k1 = std::exp((0.9 - 0.2) * 1.7);
    const double k2 = std::exp((-0.4 - 0.2) * 1.7);
    const EntropyResult q = ftme_2d_exact(0.9, -0.4, 0.2, 1.7);
    CHECK(q.h == doctest::Approx(-std::log(disk_ellipse_area(k1, k2) / M_PI) / 1.7).epsilon(1e-7));
}

TEST_CASE("planar exact FTME branches")
{
    // both exponents below alpha: the ellipse contains the ball
    CHECK(ftme_2d_exact(-0.1, -0.5, 0.0, 2.0).h == doctest::Approx(0.0));
    // both above: the ellipse sits inside the ball, h = sum of shifted exponents
    CHECK(ftme_2d_exact(0.7, 0.3, 0.1, 2.0).h == doctest::Approx(0.8));
    CHECK(ftme_2d_exact(0.0, 0.0, 0.0, 1.0).h == doctest::Approx(0.0));
    CHECK_THROWS_AS(ftme_2d_exact(-1.0, 1.0, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ftme_2d_exact(1.0, -1.0, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("incompressible form agrees with the general form")
{
    for (double l : {0.01, 0.3, 1.0, 4.0}) {
        for (double T : {0.5, 1.0, 3.0}) {
            CHECK(ftme_2d_incompressible(l, T).h == doctest::Approx(ftme_2d_exact(l, -l, 0.0, T).h).epsilon(1e-12));
        }
    }
    CHECK(ftme_2d_incompressible(0.0, 1.0).h == doctest::Approx(0.0));
}

TEST_CASE("planar FTME is monotone in alpha and bounded by the Pesin sum")
{
    double prev = 1e300;
    for (double a = -1.0; a <= 1.0; a += 0.05) {
        const double h = ftme_2d_exact(0.8, -0.3, a, 1.3).h;
        CHECK(h <= prev + 1e-14);
        prev = h;
        const PesinGap g = pesin_gap({0.8, -0.3}, a, h, 2, 1.3);
        CHECK(g.ok);
    }
}

TEST_CASE("Pesin bound values")
{
    CHECK(pesin_bound(2, 1.0) == doctest::Approx(std::log(4.0 / M_PI)));
    CHECK(pesin_bound(1, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    const PesinGap g = pesin_gap({std::log(2.0), -std::log(2.0)}, 0.0, 0.5271, 2, 1.0);
    CHECK(g.gap == doctest::Approx(0.1661).epsilon(1e-3));
    CHECK(g.ok);
    CHECK(pesin_gap({0.0, 0.0}, 0.0, 0.0, 2, 1.0).ok);
    CHECK_FALSE(pesin_gap({1.0, 0.0}, 0.0, 1.5, 2, 1.0).ok);
}

TEST_CASE("Monte Carlo agrees with the exact planar formula")
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 400000;
    opts.seed = 5;
    const EntropyResult mc = ftme_monte_carlo(two_point(mat2(2.0, 0.0, 0.0, 0.5), 1.0), 0.0, J, opts);
    CHECK(mc.method == EntropyMethod::monte_carlo);
    CHECK(mc.sample_count == 400000);
    CHECK(std::abs(mc.h - 0.5270660033841197) < 4.0 * mc.std_error);
    CHECK(mc.std_error == doctest::Approx(std::sqrt(0.5903 * 0.4097 / 4e5) / 0.5903).epsilon(0.01));
}

TEST_CASE("Monte Carlo in three dimensions")
{
    // diag(4, 1, 1): the ellipsoid lies inside the ball, so the retained fraction is 1/4
    Mat Phi = Mat::Identity(3, 3);
    Phi(0, 0) = 4.0;
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 400000;
    opts.seed = 2;
    const EntropyResult mc = ftme_monte_carlo(two_point(Phi, 1.0), 0.0, J, opts);
    CHECK(std::abs(mc.h - std::log(4.0)) < 4.0 * mc.std_error);
}

TEST_CASE("Monte Carlo preconditions")
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 1000;
    // wrong order of times
    std::vector<TimedMatrix> bad{{1.0, Mat::Identity(2, 2)}, {0.0, Mat::Identity(2, 2)}};
    CHECK_THROWS_AS(ftme_monte_carlo(bad, 0.0, J, opts), InvalidArgument);
    TimeSet nonsense{0.0, {0.0}};
    CHECK_THROWS_AS(nonsense.validate(), InvalidArgument);
}

TEST_CASE("empty intersection is flagged")
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 2000;
    const EntropyResult r = ftme_monte_carlo(two_point(mat2(1e6, 0.0, 0.0, 1e6), 1.0), 0.0, J, opts);
    CHECK(r.empty_intersection);
    CHECK(std::isinf(r.h));
}

TEST_CASE("serial and parallel counts are bitwise identical")
{
    const std::vector<Mat> mats{mat2(2.0, 0.3, 0.0, 0.5), mat2(0.7, 0.0, 0.1, 1.6)};
    for (int workers : {1, 2, 3}) {
        set_worker_count(workers);
        CHECK(kernels::count_in_intersection_serial(mats, 2, 100001, 9) ==
              kernels::count_in_intersection_parallel(mats, 2, 100001, 9));
    }
    set_worker_count(0);
}

TEST_CASE("unit-ball sampler stays inside and is deterministic")
{
    double mean = 0.0;
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const Vec v = kernels::sample_unit_ball(3, 4, i);
        CHECK(v.norm() <= 1.0);
        mean += v[0];
        CHECK((v - kernels::sample_unit_ball(3, 4, i)).norm() == 0.0);
    }
    CHECK(std::abs(mean / 5000) < 0.03);
}

TEST_CASE("norm bounds sandwich the exact value")
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    const NormBounds id = ftme_norm_bounds({norm_sample(0.0, Mat::Identity(2, 2)), norm_sample(1.0, Mat::Identity(2, 2))},
                                           0.0, J, 2);
    CHECK(id.lower == doctest::Approx(0.0));
    CHECK(id.upper == doctest::Approx(0.0));

    const NormBounds b = ftme_norm_bounds(
        {norm_sample(0.0, Mat::Identity(2, 2)), norm_sample(1.0, mat2(2.0, 0.0, 0.0, 0.5))}, 0.0, J, 2);
    CHECK(b.upper == doctest::Approx(2.0 * std::log(2.0)));
    CHECK(b.literal_lower == doctest::Approx(2.0 * std::log(2.0)));
    CHECK(b.lower <= 0.5271);
    CHECK(0.5271 <= b.upper);

    const double e = std::exp(1.0);
    const NormBounds c = ftme_norm_bounds(
        {norm_sample(0.0, Mat::Identity(2, 2)), norm_sample(1.0, mat2(e, 0.0, 0.0, e))}, 1.0, J, 2);
    CHECK(c.lower == doctest::Approx(0.0));
    CHECK(c.upper == doctest::Approx(0.0));
}

TEST_CASE("FTME along trajectories")
{
    const TimeSet J = TimeSet::two_point(0.0, 2.0);
    CHECK(ftme_along_trajectory(0.3, 0.0, 1.0, 0.0, J, 2, 1.0) == doctest::Approx(0.3));
    CHECK(ftme_along_trajectory(0.0, 1.0, 1.0, 0.0, J, 2, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ftme_along_trajectory(0.0, 1.0, 1.0, 0.0, J, 2, 0.0), InvalidArgument);

    // linear saddle: recompute at the evolved base point with the same J
    const VectorField f = make_field(LinearSaddle{});
    MonteCarloOptions opts;
    opts.samples = 400000;
    opts.seed = 8;
    const EntropyResult h0 = linearized_ftme(f, vec2(0.1, 0.2), TimeSet{0.0, {0.0, 1.0}}, 0.0, opts);
    const EntropyResult h1 = linearized_ftme(f, vec2(0.3, -0.1), TimeSet{1.0, {0.0, 1.0}}, 0.0, opts);
    const double predicted = ftme_along_trajectory(h0.h, 0.0, 1.0, 0.0, TimeSet{0.0, {0.0, 1.0}}, 2, 1.0);
    CHECK(std::abs(h1.h - predicted) < 3.0 * std::hypot(h0.std_error, h1.std_error));
}

TEST_CASE("Gamma-norm deviation")
{
    CHECK(gamma_norm_deviation(Mat::Identity(2, 2), 2, 1.0) == doctest::Approx(0.0));
    CHECK(gamma_norm_deviation(mat2(2.0, 0.0, 0.0, 0.5), 2, 1.0) == doctest::Approx(4.0 * std::log(2.0)));
    CHECK_THROWS_AS(gamma_norm_deviation(mat2(1.0, 2.0, 0.0, 1.0), 2, 1.0), InvalidArgument);
    CHECK_THROWS_AS(gamma_norm_deviation(mat2(-1.0, 0.0, 0.0, 1.0), 2, 1.0), InvalidArgument);
}

TEST_CASE("Gamma-weighted Monte Carlo respects the deviation bound")
{
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 200000;
    opts.seed = 3;
    const auto mats = two_point(mat2(2.0, 0.0, 0.0, 0.5), 1.0);
    const EntropyResult plain = ftme_monte_carlo(mats, 0.0, J, opts);
    const Mat G = mat2(1.5, 0.4, 0.4, 0.8);
    opts.gamma = G;
    const EntropyResult weighted = ftme_monte_carlo(mats, 0.0, J, opts);
    const double bound = gamma_norm_deviation(G, 2, 1.0);
    CHECK(std::abs(weighted.h - plain.h) <= bound + 4.0 * (plain.std_error + weighted.std_error));
    // a scalar multiple of the identity changes nothing
    opts.gamma = Mat(3.0 * Mat::Identity(2, 2));
    CHECK(ftme_monte_carlo(mats, 0.0, J, opts).hits == plain.hits);
}

TEST_CASE("linear systems have constant linearized FTME")
{
    const VectorField f = make_field(LinearSaddle{});
    MonteCarloOptions opts;
    opts.samples = 20000;
    opts.seed = 12;
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    const EntropyResult a = linearized_ftme(f, vec2(0.0, 0.0), J, 0.0, opts);
    const EntropyResult b = linearized_ftme(f, vec2(5.0, -3.0), J, 0.0, opts);
    CHECK(a.hits == b.hits);
}

TEST_CASE("empirical escape rate approaches the linearized value")
{
    const VectorField f = make_field(LinearSaddle{});
    const TimeSet J = TimeSet::two_point(0.0, 1.0);
    MonteCarloOptions opts;
    opts.samples = 100000;
    opts.seed = 6;
    const EntropyResult lin = linearized_ftme(f, vec2(0.2, 0.1), J, 0.0, opts);
    const EntropyResult emp = empirical_escape_rate(f, vec2(0.2, 0.1), J, 0.0, 1e-3, opts, 50);
    CHECK(std::abs(lin.h - emp.h) < 4.0 * std::hypot(lin.std_error, emp.std_error) + 1e-3);
    opts.exec = Exec::serial;
    CHECK(empirical_escape_rate(f, vec2(0.2, 0.1), J, 0.0, 1e-3, opts, 50).hits == emp.hits);
}

TEST_CASE("coherent pair retained fraction")
{
    CHECK(coherent_pair_ratio(0.5271, 1.0) == doctest::Approx(0.5903).epsilon(1e-3));
    CHECK(coherent_pair_ratio(0.0, 3.0) == 1.0);
}
