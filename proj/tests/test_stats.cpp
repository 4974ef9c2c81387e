#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cofo/rng.hpp"
#include "cofo/stats.hpp"

using namespace cofo;
using Catch::Matchers::WithinAbs;

TEST_CASE("fit_log_time is exact on noise-free log-linear data") {
    const std::vector<double> y{std::exp(1.0), std::exp(2.0), std::exp(3.0)};
    const std::vector<double> t{1.0, 2.0, 3.0};
    const auto fit = stats::fit_log_time(y, t);
    REQUIRE_THAT(fit.intercept, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(fit.slope, WithinAbs(1.0, 1e-12));
    REQUIRE(fit.n_points == 3);
}

TEST_CASE("fit_log_time on constant data has zero slope and a high p-value") {
    const std::vector<double> y{2.0, 2.0, 2.0, 2.0};
    const std::vector<double> t{1.0, 2.0, 3.0, 4.0};
    const auto fit = stats::fit_log_time(y, t);
    REQUIRE_THAT(fit.slope, WithinAbs(0.0, 1e-14));
    REQUIRE(fit.slope_p_value > 0.5);
}

TEST_CASE("fit_log_time drops zero means under ols and errors below 2 points") {
    const std::vector<double> y{0.0, std::exp(1.0), std::exp(2.0)};
    const std::vector<double> t{1.0, 2.0, 3.0};
    const auto fit = stats::fit_log_time(y, t);
    REQUIRE(fit.dropped_points == 1);
    REQUIRE(fit.n_points == 2);
    // Origin stays at the first time even though its point was dropped.
    REQUIRE_THAT(fit.intercept, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(fit.slope, WithinAbs(1.0, 1e-12));

    const std::vector<double> y2{0.0, 0.0, std::exp(2.0)};
    REQUIRE_THROWS_AS(stats::fit_log_time(y2, t), FitError);
}

TEST_CASE("poisson_irls recovers the generating coefficients") {
    Rng rng(2024);
    const double alpha = 0.5, beta = 0.02;
    std::vector<double> y, x, w;
    for (int i = 0; i < 10000; ++i) {
        const double xi = static_cast<double>(i % 20);
        x.push_back(xi);
        y.push_back(static_cast<double>(rng.poisson(std::exp(alpha + beta * xi))));
        w.push_back(1.0);
    }
    // fit_log_time centers at x.front() = 0, so coefficients are comparable.
    const auto fit = stats::fit_log_time(y, x, w, stats::FitMethod::PoissonIrls);
    REQUIRE_THAT(fit.intercept, WithinAbs(alpha, 0.05));
    REQUIRE_THAT(fit.slope, WithinAbs(beta, 0.05));
    REQUIRE(fit.method == stats::FitMethod::PoissonIrls);

    SECTION("deviance is non-increasing across iterations") {
        for (std::size_t i = 1; i < fit.irls_deviances.size(); ++i)
            REQUIRE(fit.irls_deviances[i] <= fit.irls_deviances[i - 1] + 1e-9);
    }
}

TEST_CASE("fit_loglog is exact on a power law and flat on constants") {
    std::vector<int> idx;
    std::vector<double> y;
    for (int i = 1; i <= 12; ++i) {
        idx.push_back(i);
        y.push_back(2.0 * std::pow(static_cast<double>(i), 0.7));
    }
    const auto fit = stats::fit_loglog(idx, y);
    REQUIRE_THAT(fit.intercept, WithinAbs(std::log(2.0), 1e-12));
    REQUIRE_THAT(fit.slope, WithinAbs(0.7, 1e-12));

    std::vector<double> flat(12, 3.25);
    const auto fit2 = stats::fit_loglog(idx, flat);
    REQUIRE_THAT(fit2.slope, WithinAbs(0.0, 1e-13));
}

TEST_CASE("fit_loglog recovers a noisy power law") {
    Rng rng(77);
    std::vector<int> idx;
    std::vector<double> y;
    for (int i = 1; i <= 40; ++i) {
        idx.push_back(i);
        const double mean = 3.0 * std::pow(static_cast<double>(i), 0.5);
        double sum = 0.0;
        for (int rep = 0; rep < 400; ++rep)
            sum += static_cast<double>(rng.poisson(mean));
        y.push_back(sum / 400.0);
    }
    const auto fit = stats::fit_loglog(idx, y);
    REQUIRE_THAT(fit.slope, WithinAbs(0.5, 0.1));
}

TEST_CASE("coefficient_chi2_test separates flat from trending data") {
    // Under the null the p-value is uniform, so judge calibration over seeds
    // rather than a single draw.
    int flat_rejects = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = Rng::substream(99, "chi2", seed);
        std::vector<double> y_flat, y_trend, x, w;
        for (int i = 0; i < 400; ++i) {
            const double xi = static_cast<double>(i % 10);
            x.push_back(xi);
            w.push_back(1.0);
            y_flat.push_back(static_cast<double>(rng.poisson(2.0)));
            y_trend.push_back(
                static_cast<double>(rng.poisson(std::exp(0.3 + 0.1 * xi))));
        }
        const auto flat =
            stats::fit_log_time(y_flat, x, w, stats::FitMethod::PoissonIrls);
        if (stats::coefficient_chi2_test(flat) <= 0.05) ++flat_rejects;
        const auto trend =
            stats::fit_log_time(y_trend, x, w, stats::FitMethod::PoissonIrls);
        REQUIRE(stats::coefficient_chi2_test(trend) < 0.001);
    }
    REQUIRE(flat_rejects <= 4);

    SECTION("degenerate fit is rejected") {
        stats::LogLinearFit degenerate;
        degenerate.slope = 0.1;
        degenerate.slope_se = 0.0;
        REQUIRE_THROWS_AS(stats::coefficient_chi2_test(degenerate), FitError);
    }
}

TEST_CASE("one-sample poisson KS rejects gross mismatches") {
    std::vector<long> zeros(200, 0);
    const auto r = stats::ks_test_poisson(zeros, 5.0, 500, 1);
    REQUIRE(r.p_value < 0.01);
    REQUIRE(r.statistic > 0.9);
}

TEST_CASE("one-sample poisson KS accepts its own distribution") {
    Rng rng(31);
    std::vector<long> sample(500);
    for (auto& v : sample) v = rng.poisson(3.0);
    const auto r = stats::ks_test_poisson(sample, std::nullopt, 500, 7);
    REQUIRE(r.p_value > 0.05);
    REQUIRE_THAT(r.lambda_hat, WithinAbs(3.0, 0.3));
}

TEST_CASE("two-sample KS basics") {
    std::vector<long> a{1, 2, 2, 3, 5};
    SECTION("identical multisets give statistic 0 and p 1") {
        const auto r = stats::ks_test_two_sample(a, a);
        REQUIRE(r.statistic == 0.0);
        REQUIRE(r.p_value == 1.0);
    }
    SECTION("symmetry in the arguments") {
        Rng rng(4);
        std::vector<long> b(300), c(300);
        for (auto& v : b) v = rng.poisson(2.0);
        for (auto& v : c) v = rng.poisson(3.0);
        const auto r1 = stats::ks_test_two_sample(b, c);
        const auto r2 = stats::ks_test_two_sample(c, b);
        REQUIRE(r1.statistic == r2.statistic);
        REQUIRE(r1.p_value == r2.p_value);
    }
    SECTION("distant distributions are rejected") {
        Rng rng(8);
        std::vector<long> b(500), c(500);
        for (auto& v : b) v = rng.poisson(1.0);
        for (auto& v : c) v = rng.poisson(10.0);
        REQUIRE(stats::ks_test_two_sample(b, c).p_value < 0.001);
    }
}

TEST_CASE("pearson on exact lines and a fixed fixture") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 * v + 1.0);
    REQUIRE_THAT(stats::pearson(x, y), WithinAbs(1.0, 1e-14));
    for (auto& v : y) v = -v;
    REQUIRE_THAT(stats::pearson(x, y), WithinAbs(-1.0, 1e-14));

    // Hand-computed: r = cov / (sd_x sd_y) on a 10-pair fixture.
    const std::vector<double> fx{1.0, 2.0, 4.0, 4.5, 6.0, 7.0, 8.0, 8.5, 9.0, 11.0};
    const std::vector<double> fy{2.1, 2.9, 3.9, 5.2, 5.6, 7.3, 7.9, 8.0, 9.4, 10.5};
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        mx += fx[i];
        my += fy[i];
    }
    mx /= 10.0;
    my /= 10.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        sxy += (fx[i] - mx) * (fy[i] - my);
        sxx += (fx[i] - mx) * (fx[i] - mx);
        syy += (fy[i] - my) * (fy[i] - my);
    }
    REQUIRE_THAT(stats::pearson(fx, fy),
                 WithinAbs(sxy / std::sqrt(sxx * syy), 1e-12));

    SECTION("constant input is rejected") {
        const std::vector<double> flat{1.0, 1.0, 1.0, 1.0, 1.0};
        REQUIRE_THROWS_AS(stats::pearson(x, flat), InvalidArgument);
    }
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    Rng rng(12);
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(0.0, 10.0);
        y[i] = 0.5 * x[i] + rng.uniform(-1.0, 1.0);
    }
    const double base = stats::pearson(x, y);
    std::vector<double> xt(x), yt(y);
    for (auto& v : xt) v = 3.0 * v + 7.0;
    for (auto& v : yt) v = 0.25 * v - 2.0;
    REQUIRE_THAT(stats::pearson(xt, yt), WithinAbs(base, 1e-12));
}

TEST_CASE("spearman handles monotone data and ties") {
    std::vector<double> x, y;
    for (int i = -5; i <= 5; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(std::pow(static_cast<double>(i), 3.0));
    }
    auto c = stats::spearman(x, y);
    REQUIRE_THAT(c.r, WithinAbs(1.0, 1e-14));
    REQUIRE(c.p_value < 1e-6);
    for (auto& v : y) v = -v;
    c = stats::spearman(x, y);
    REQUIRE_THAT(c.r, WithinAbs(-1.0, 1e-14));

    // Tie-heavy fixture against a brute-force mid-rank computation.
    const std::vector<double> tx{1, 1, 2, 2, 2, 3, 4, 4, 5, 5};
    const std::vector<double> ty{2, 2, 2, 4, 4, 4, 4, 6, 6, 7};
    const std::vector<double> rank_x{1.5, 1.5, 4, 4, 4, 6, 7.5, 7.5, 9.5, 9.5};
    const std::vector<double> rank_y{2, 2, 2, 5.5, 5.5, 5.5, 5.5, 8.5, 8.5, 10};
    REQUIRE_THAT(stats::spearman(tx, ty).r,
                 WithinAbs(stats::pearson(rank_x, rank_y), 1e-12));
}

TEST_CASE("special functions agree with reference values") {
    // Poisson cdf checked against a direct sum with lgamma.
    double sum = 0.0;
    for (long k = 0; k <= 7; ++k)
        sum += std::exp(k * std::log(4.2) - 4.2 - std::lgamma(k + 1.0));
    REQUIRE_THAT(stats::poisson_cdf(7, 4.2), WithinAbs(sum, 1e-12));

    // t distribution: symmetric two-sided p at t=0 is 1.
    REQUIRE_THAT(stats::student_t_two_sided_p(0.0, 10.0), WithinAbs(1.0, 1e-12));
    // Known value: |t|=2.228, df=10 gives p close to 0.05.
    REQUIRE_THAT(stats::student_t_two_sided_p(2.228, 10.0), WithinAbs(0.05, 1e-3));

    // chi-square 1df: p(3.841) close to 0.05.
    REQUIRE_THAT(stats::chi2_1df_p(3.841), WithinAbs(0.05, 1e-3));
}
