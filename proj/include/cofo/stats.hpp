#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/rng.hpp"

namespace cofo::stats {

// ---------------------------------------------------------------------------
// Special functions

/// Poisson pmf at integer k. Exact for mean = 0 (point mass at 0).
inline double poisson_pmf(long k, double mean) {
    if (k < 0) return 0.0;
    if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(mean) - mean -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

inline double poisson_cdf(long k, double mean) {
    if (k < 0) return 0.0;
    if (mean <= 0.0) return 1.0;
    double term = std::exp(-mean);
    double sum = term;
    for (long i = 1; i <= k; ++i) {
        term *= mean / static_cast<double>(i);
        sum += term;
    }
    return std::min(sum, 1.0);
}

/// Survival function of the Kolmogorov distribution, Q(x) = P(K > x).
inline double kolmogorov_q(double x) {
    if (x < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value for a t statistic with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

/// Upper tail of chi-square with one degree of freedom.
inline double chi2_1df_p(double stat) {
    if (stat <= 0.0) return 1.0;
    return std::erfc(std::sqrt(stat / 2.0));
}

// ---------------------------------------------------------------------------
// Log-linear fits

enum class FitMethod { OlsOnLogs, PoissonIrls };

inline std::string to_string(FitMethod m) {
    return m == FitMethod::OlsOnLogs ? "ols_on_logs" : "poisson_irls";
}

/// A fitted one-covariate log-linear rate model: log y = intercept + slope * x.
struct LogLinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double slope_p_value = 1.0;  // Wald chi-square (1 df) test of slope = 0
    int n_points = 0;
    FitMethod method = FitMethod::OlsOnLogs;
    int dropped_points = 0;  // zero-valued means unusable under OlsOnLogs
    std::vector<double> irls_deviances;  // per-iteration, PoissonIrls only

    double value_at(double x) const { return std::exp(intercept + slope * x); }
};

namespace detail {

struct WlsFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double rss = 0.0;
    double sxx = 0.0;
    int n = 0;
};

inline WlsFit weighted_least_squares(std::span<const double> x,
                                     std::span<const double> y,
                                     std::span<const double> w) {
    WlsFit fit;
    fit.n = static_cast<int>(x.size());
    double wsum = 0.0, xmean = 0.0, ymean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        wsum += w[i];
        xmean += w[i] * x[i];
        ymean += w[i] * y[i];
    }
    if (wsum <= 0.0) throw FitError("weighted_least_squares: non-positive total weight");
    xmean /= wsum;
    ymean /= wsum;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xmean;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - ymean);
    }
    if (sxx <= 0.0)
        throw FitError("weighted_least_squares: covariate has no variation");
    fit.slope = sxy / sxx;
    fit.intercept = ymean - fit.slope * xmean;
    fit.sxx = sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += w[i] * r * r;
    }
    fit.rss = rss;
    if (fit.n > 2) {
        const double sigma2 = rss / (fit.n - 2);
        fit.slope_se = std::sqrt(std::max(sigma2, 0.0) / sxx);
    } else {
        fit.slope_se = 0.0;  // exactly determined
    }
    return fit;
}

inline double slope_p_from_se(double slope, double se) {
    if (se <= 0.0) return slope == 0.0 ? 1.0 : 0.0;
    const double wald = (slope / se) * (slope / se);
    return chi2_1df_p(wald);
}

inline double poisson_deviance(std::span<const double> y,
                               std::span<const double> mu,
                               std::span<const double> w) {
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double term = mu[i] - y[i];
        if (y[i] > 0.0) term += y[i] * std::log(y[i] / mu[i]);
        dev += 2.0 * w[i] * term;
    }
    return dev;
}

inline LogLinearFit poisson_irls(std::span<const double> x,
                                 std::span<const double> y,
                                 std::span<const double> w) {
    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-10;
    const std::size_t n = x.size();
    double ysum = 0.0;
    for (std::size_t i = 0; i < n; ++i) ysum += w[i] * y[i];
    if (ysum <= 0.0) throw FitError("poisson_irls: all responses are zero");

    LogLinearFit fit;
    fit.method = FitMethod::PoissonIrls;
    fit.n_points = static_cast<int>(n);

    // Working state starts from the data, nudged away from zero; the first
    // parametric step is accepted unconditionally, later steps are halved
    // toward the previous iterate whenever they would raise the deviance.
    const double ybar = ysum / n;
    std::vector<double> mu(n), eta(n), z(n), ww(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = std::max((y[i] + ybar) / 2.0, 1e-8);
        eta[i] = std::log(mu[i]);
    }
    double alpha = 0.0, beta = 0.0;
    double dev = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = eta[i] + (y[i] - mu[i]) / mu[i];
            ww[i] = w[i] * mu[i];
        }
        const WlsFit wls = weighted_least_squares(x, z, ww);
        double new_alpha = wls.intercept;
        double new_beta = wls.slope;
        double new_dev = 0.0;
        for (int half = 0;; ++half) {
            for (std::size_t i = 0; i < n; ++i) {
                eta[i] = new_alpha + new_beta * x[i];
                mu[i] = std::exp(eta[i]);
            }
            new_dev = poisson_deviance(y, mu, w);
            if (new_dev <= dev + 1e-12 || iter == 0 || half >= 40) break;
            new_alpha = (new_alpha + alpha) / 2.0;
            new_beta = (new_beta + beta) / 2.0;
        }
        alpha = new_alpha;
        beta = new_beta;
        fit.irls_deviances.push_back(iter == 0 ? new_dev : std::min(new_dev, dev));
        const bool done =
            iter > 0 && std::fabs(dev - new_dev) <= kTol * (std::fabs(dev) + 1.0);
        dev = std::min(new_dev, dev);
        if (done) {
            converged = true;
            break;
        }
    }
    fit.intercept = alpha;
    fit.slope = beta;
    // Fisher information of the slope at the final weights.
    double wsum = 0.0, xmean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ww[i] = w[i] * mu[i];
        wsum += ww[i];
        xmean += ww[i] * x[i];
    }
    xmean /= wsum;
    double wsxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - xmean;
        wsxx += ww[i] * dx * dx;
    }
    fit.slope_se = wsxx > 0.0 ? 1.0 / std::sqrt(wsxx) : 0.0;
    fit.slope_p_value = slope_p_from_se(fit.slope, fit.slope_se);
    if (!converged)
        throw FitError("poisson_irls: no convergence after " +
                       std::to_string(kMaxIter) + " iterations (last iterate: " +
                       format_double(alpha) + ", " + format_double(beta) + ")");
    return fit;
}

}  // namespace detail

/// Fit log y = intercept + slope * (t - t_front) where t_front = times.front().
/// OlsOnLogs drops zero-valued means (log undefined); PoissonIrls keeps them.
/// Weights default to 1 and are treated as group sizes.
inline LogLinearFit fit_log_time(std::span<const double> y_means,
                                 std::span<const double> times,
                                 std::span<const double> weights = {},
                                 FitMethod method = FitMethod::OlsOnLogs) {
    if (y_means.size() != times.size())
        throw InvalidArgument("fit_log_time: y/time length mismatch");
    if (!weights.empty() && weights.size() != y_means.size())
        throw InvalidArgument("fit_log_time: weight length mismatch");
    if (times.empty()) throw FitError("fit_log_time: no data");
    const double t0 = times.front();

    std::vector<double> x, y, w;
    int dropped = 0;
    for (std::size_t i = 0; i < y_means.size(); ++i) {
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (wi <= 0.0) continue;
        if (method == FitMethod::OlsOnLogs && y_means[i] <= 0.0) {
            ++dropped;
            continue;
        }
        x.push_back(times[i] - t0);
        y.push_back(y_means[i]);
        w.push_back(wi);
    }
    if (x.size() < 2)
        throw FitError("fit_log_time: fewer than 2 usable points (" +
                       std::to_string(dropped) + " dropped)");

    if (method == FitMethod::PoissonIrls) {
        LogLinearFit fit = detail::poisson_irls(x, y, w);
        fit.dropped_points = dropped;
        return fit;
    }
    std::vector<double> logy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) logy[i] = std::log(y[i]);
    const detail::WlsFit wls = detail::weighted_least_squares(x, logy, w);
    LogLinearFit fit;
    fit.method = FitMethod::OlsOnLogs;
    fit.intercept = wls.intercept;
    fit.slope = wls.slope;
    fit.slope_se = wls.slope_se;
    fit.slope_p_value = detail::slope_p_from_se(wls.slope, wls.slope_se);
    fit.n_points = wls.n;
    fit.dropped_points = dropped;
    return fit;
}

/// Fit log y = intercept + slope * log i over positive group indices i.
inline LogLinearFit fit_loglog(std::span<const int> i_values,
                               std::span<const double> y_means,
                               std::span<const double> weights = {}) {
    if (i_values.size() != y_means.size())
        throw InvalidArgument("fit_loglog: index/value length mismatch");
    if (!weights.empty() && weights.size() != y_means.size())
        throw InvalidArgument("fit_loglog: weight length mismatch");
    std::vector<double> x, y, w;
    int dropped = 0;
    for (std::size_t p = 0; p < i_values.size(); ++p) {
        if (i_values[p] < 1)
            throw InvalidArgument("fit_loglog: group index must be >= 1");
        const double wp = weights.empty() ? 1.0 : weights[p];
        if (wp <= 0.0) continue;
        if (y_means[p] <= 0.0) {
            ++dropped;
            continue;
        }
        x.push_back(std::log(static_cast<double>(i_values[p])));
        y.push_back(std::log(y_means[p]));
        w.push_back(wp);
    }
    if (x.size() < 2)
        throw FitError("fit_loglog: fewer than 2 usable points (" +
                       std::to_string(dropped) + " dropped)");
    const detail::WlsFit wls = detail::weighted_least_squares(x, y, w);
    LogLinearFit fit;
    fit.method = FitMethod::OlsOnLogs;
    fit.intercept = wls.intercept;
    fit.slope = wls.slope;
    fit.slope_se = wls.slope_se;
    fit.slope_p_value = detail::slope_p_from_se(wls.slope, wls.slope_se);
    fit.n_points = wls.n;
    fit.dropped_points = dropped;
    return fit;
}

/// Wald chi-square (1 df) test of "slope = 0" on a completed fit.
inline double coefficient_chi2_test(const LogLinearFit& fit) {
    if (fit.slope_se <= 0.0)
        throw FitError("coefficient_chi2_test: zero standard error (degenerate fit)");
    const double wald = (fit.slope / fit.slope_se) * (fit.slope / fit.slope_se);
    return chi2_1df_p(wald);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov tests

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double lambda_hat = 0.0;  // one-sample Poisson test only
    int n = 0;
};

namespace detail {

inline double ks_stat_vs_poisson(std::span<const long> sample, double mean) {
    long max_value = 0;
    for (long v : sample) max_value = std::max(max_value, v);
    std::vector<long> hist(static_cast<std::size_t>(max_value) + 1, 0);
    for (long v : sample) ++hist[static_cast<std::size_t>(v)];
    const double n = static_cast<double>(sample.size());
    double ecdf = 0.0;
    double pmf = std::exp(-mean);
    double cdf = pmf;
    double dmax = 0.0;
    for (long k = 0; k <= max_value; ++k) {
        ecdf += hist[static_cast<std::size_t>(k)] / n;
        dmax = std::max(dmax, std::fabs(ecdf - cdf));
        pmf *= mean / static_cast<double>(k + 1);
        cdf = std::min(cdf + pmf, 1.0);
    }
    return dmax;
}

}  // namespace detail

/// One-sample KS test against a Poisson distribution on integer support.
/// The p-value comes from a parametric bootstrap; when the mean was estimated
/// from the sample it is re-estimated for every resample.
inline KsResult ks_test_poisson(std::span<const long> sample,
                                std::optional<double> mean = std::nullopt,
                                int n_boot = 1000, std::uint64_t seed = 0) {
    if (sample.empty()) throw InvalidArgument("ks_test_poisson: empty sample");
    const bool estimated = !mean.has_value();
    double lambda_hat;
    if (estimated) {
        double sum = 0.0;
        for (long v : sample) sum += static_cast<double>(v);
        lambda_hat = sum / static_cast<double>(sample.size());
    } else {
        lambda_hat = *mean;
        if (lambda_hat <= 0.0)
            throw InvalidArgument("ks_test_poisson: mean must be positive");
    }
    if (estimated && lambda_hat <= 0.0)
        throw InvalidArgument("ks_test_poisson: sample mean is zero");
    KsResult result;
    result.n = static_cast<int>(sample.size());
    result.lambda_hat = lambda_hat;
    result.statistic = detail::ks_stat_vs_poisson(sample, lambda_hat);

    std::vector<char> exceeds(static_cast<std::size_t>(n_boot), 0);
    const double observed = result.statistic;
    const std::size_t n = sample.size();
    parallel_for(static_cast<std::size_t>(n_boot), [&](std::size_t b) {
        Rng rng = Rng::substream(seed, "ks_boot", b);
        std::vector<long> resample(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            resample[i] = rng.poisson(lambda_hat);
            sum += static_cast<double>(resample[i]);
        }
        const double boot_mean = estimated ? sum / static_cast<double>(n) : lambda_hat;
        const double d = detail::ks_stat_vs_poisson(resample, boot_mean);
        exceeds[b] = d >= observed - 1e-15 ? 1 : 0;
    });
    long count = 0;
    for (char e : exceeds) count += e;
    result.p_value = (1.0 + static_cast<double>(count)) / (n_boot + 1.0);
    return result;
}

/// Two-sample KS test on integer samples, asymptotic p-value.
inline KsResult ks_test_two_sample(std::span<const long> a,
                                   std::span<const long> b) {
    if (a.empty() || b.empty())
        throw InvalidArgument("ks_test_two_sample: empty sample");
    std::vector<long> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t ia = 0, ib = 0;
    double dmax = 0.0;
    while (ia < sa.size() && ib < sb.size()) {
        const long v = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] == v) ++ia;
        while (ib < sb.size() && sb[ib] == v) ++ib;
        dmax = std::max(dmax, std::fabs(ia / na - ib / nb));
    }
    dmax = std::max(dmax, std::fabs(1.0 - ib / nb));
    dmax = std::max(dmax, std::fabs(ia / na - 1.0));
    KsResult result;
    result.statistic = dmax;
    result.n = static_cast<int>(sa.size() + sb.size());
    const double en = std::sqrt(na * nb / (na + nb));
    result.p_value = kolmogorov_q((en + 0.12 + 0.11 / en) * dmax);
    return result;
}

// ---------------------------------------------------------------------------
// Correlation coefficients

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw InvalidArgument("pearson: length mismatch");
    if (x.size() < 2) throw InvalidArgument("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xm;
        const double dy = y[i] - ym;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw InvalidArgument("pearson: constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace detail {

inline std::vector<double> mid_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

/// Spearman rank correlation with averaged tie ranks; p via t-approximation.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw InvalidArgument("spearman: length mismatch");
    const auto rx = detail::mid_ranks(x);
    const auto ry = detail::mid_ranks(y);
    Correlation result;
    result.r = pearson(rx, ry);
    const double n = static_cast<double>(x.size());
    if (n <= 2.0 || std::fabs(result.r) >= 1.0) {
        result.p_value = std::fabs(result.r) >= 1.0 ? 0.0 : 1.0;
        return result;
    }
    const double t = result.r * std::sqrt((n - 2.0) / (1.0 - result.r * result.r));
    result.p_value = student_t_two_sided_p(t, n - 2.0);
    return result;
}

}  // namespace cofo::stats
