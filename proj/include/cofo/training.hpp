#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/matrices.hpp"
#include "cofo/stats.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// How a rate cell was produced.
enum class CellSource : unsigned char {
    ObservedFit,         // exp of a regression on observed group means
    RowExtrapolated,     // row time model beyond the observed intervals
    ColumnExtrapolated,  // column power model beyond the observed rows
    Averaged,            // mean of the two extrapolations (outer corner)
};

inline char to_char(CellSource s) {
    switch (s) {
        case CellSource::ObservedFit: return 'O';
        case CellSource::RowExtrapolated: return 'R';
        case CellSource::ColumnExtrapolated: return 'C';
        case CellSource::Averaged: return 'A';
    }
    return '?';
}

/// log rate = intercept + slope * (year - first fitted year).
struct TimeFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// log rate = intercept + slope * log(group index).
struct PowerFit {
    double intercept = 0.0;
    double slope = 0.0;
};

struct TrainOptions {
    stats::FitMethod method = stats::FitMethod::OlsOnLogs;
    bool lenient_rows = false;  // sparse rows fall back to the column models
};

/// Expected annual publication counts, indexed by (historical publication
/// count, interval), with the per-row time fits and per-column power fits
/// that generated them and a per-cell provenance tag.
struct LambdaMatrix {
    Grid<double> values;             // lambda_rows x intervals
    std::vector<TimeFit> row_fits;   // index i-1, i = 1..lambda_rows
    std::vector<PowerFit> col_fits;  // index j-1, j = 1..intervals
    Grid<CellSource> provenance;
    std::vector<int> fallback_rows;  // rows filled from the column models
    std::vector<stats::LogLinearFit> row_reports;  // full regression reports
    std::vector<stats::LogLinearFit> col_reports;

    double rate(int hist_pubs, int interval) const {
        return values(hist_pubs - 1, interval - 1);
    }
    CellSource source(int hist_pubs, int interval) const {
        return provenance(hist_pubs - 1, interval - 1);
    }
};

/// Expected annual new-coauthor counts before the cumulative-advantage
/// modification, indexed by (annual publication count, interval).
struct ZetaMatrix {
    Grid<double> values;          // zeta_rows x intervals
    std::vector<TimeFit> fits;    // per-row time model
    std::vector<double> significance;  // per-row p-value of the time slope
    std::vector<stats::LogLinearFit> reports;

    double rate(int annual_pubs, int interval) const {
        return values(annual_pubs - 1, interval - 1);
    }
    int rows() const { return values.rows(); }
};

namespace detail {

struct RowPoints {
    std::vector<double> y, t, w;
};

// Full-length arrays with zero weight on undefined cells, so the fit's time
// origin is always the first interval regardless of which cells are missing.
inline RowPoints eta_row_points(const EtaMatrix& eta, const WindowSpec& w, int i) {
    RowPoints pts;
    for (int j = 1; j <= w.observed_cols; ++j) {
        const bool defined = eta.defined(i, j);
        pts.y.push_back(defined ? eta.value(i, j) : 0.0);
        pts.t.push_back(static_cast<double>(w.year(j)));
        pts.w.push_back(defined ? static_cast<double>(eta.count(i, j)) : 0.0);
    }
    return pts;
}

/// Time fit of exact model values over the observed intervals (unit weights).
inline stats::LogLinearFit refit_time_on_model(const WindowSpec& w,
                                               int observed_cols,
                                               const std::vector<double>& values) {
    std::vector<double> t(static_cast<std::size_t>(observed_cols));
    for (int j = 1; j <= observed_cols; ++j)
        t[static_cast<std::size_t>(j - 1)] = static_cast<double>(w.year(j));
    return stats::fit_log_time(values, t);
}

}  // namespace detail

/// Assemble the full rate matrix from the observed group means: per-row time
/// fits over the observed block, per-column power fits below it, re-fitted
/// time models for the unobserved rows, re-fitted power models for the
/// unobserved intervals, and the average of both in the outer corner.
inline LambdaMatrix fit_lambda(const EtaMatrix& eta, const WindowSpec& w,
                               const TrainOptions& options = {}) {
    w.validate();
    if (eta.rows() != w.observed_rows || eta.cols() != w.observed_cols)
        throw InvalidArgument("fit_lambda: matrix shape does not match the window");
    const int n_rows = w.lambda_rows;
    const int n_cols = w.intervals();
    const int k = w.observed_rows;
    const int l = w.observed_cols;
    const double t1 = static_cast<double>(w.year(1));

    LambdaMatrix lambda;
    lambda.values = Grid<double>(n_rows, n_cols, 0.0);
    lambda.provenance = Grid<CellSource>(n_rows, n_cols, CellSource::ObservedFit);
    lambda.row_fits.resize(static_cast<std::size_t>(n_rows));
    lambda.col_fits.resize(static_cast<std::size_t>(n_cols));
    lambda.row_reports.resize(static_cast<std::size_t>(n_rows));
    lambda.col_reports.resize(static_cast<std::size_t>(n_cols));

    // Row time fits on the observed means, weighted by group size.
    std::vector<bool> row_ok(static_cast<std::size_t>(k) + 1, false);
    for (int i = 1; i <= k; ++i) {
        const detail::RowPoints pts = detail::eta_row_points(eta, w, i);
        try {
            const stats::LogLinearFit fit =
                stats::fit_log_time(pts.y, pts.t, pts.w, options.method);
            lambda.row_fits[static_cast<std::size_t>(i - 1)] = {fit.intercept,
                                                                fit.slope};
            lambda.row_reports[static_cast<std::size_t>(i - 1)] = fit;
            row_ok[static_cast<std::size_t>(i)] = true;
        } catch (const FitError& e) {
            if (!options.lenient_rows)
                throw FitError("fit_lambda: row " + std::to_string(i) + ": " +
                               e.what());
            lambda.fallback_rows.push_back(i);
        }
    }

    // Column power fits on the observed means.
    for (int j = 1; j <= l; ++j) {
        std::vector<int> idx;
        std::vector<double> y, cw;
        for (int i = 1; i <= k; ++i) {
            if (!eta.defined(i, j)) continue;
            idx.push_back(i);
            y.push_back(eta.value(i, j));
            cw.push_back(static_cast<double>(eta.count(i, j)));
        }
        try {
            const stats::LogLinearFit fit = stats::fit_loglog(idx, y, cw);
            lambda.col_fits[static_cast<std::size_t>(j - 1)] = {fit.intercept,
                                                                fit.slope};
            lambda.col_reports[static_cast<std::size_t>(j - 1)] = fit;
        } catch (const FitError& e) {
            throw FitError("fit_lambda: column " + std::to_string(j) + ": " +
                           e.what());
        }
    }

    auto column_model = [&](int i, int j) {
        const PowerFit& cf = lambda.col_fits[static_cast<std::size_t>(j - 1)];
        return std::exp(cf.intercept + cf.slope * std::log(static_cast<double>(i)));
    };

    // Time models for rows beyond the observed block (and sparse fallback
    // rows), re-fitted on the column-model values over the observed intervals.
    auto refit_row = [&](int i) {
        std::vector<double> values(static_cast<std::size_t>(l));
        for (int j = 1; j <= l; ++j)
            values[static_cast<std::size_t>(j - 1)] = column_model(i, j);
        const stats::LogLinearFit fit = detail::refit_time_on_model(w, l, values);
        lambda.row_fits[static_cast<std::size_t>(i - 1)] = {fit.intercept, fit.slope};
        lambda.row_reports[static_cast<std::size_t>(i - 1)] = fit;
    };
    for (int i : lambda.fallback_rows) refit_row(i);
    for (int i = k + 1; i <= n_rows; ++i) refit_row(i);

    auto row_model = [&](int i, int j) {
        const TimeFit& rf = lambda.row_fits[static_cast<std::size_t>(i - 1)];
        return std::exp(rf.intercept + rf.slope * (w.year(j) - t1));
    };

    // Power models for intervals beyond the observed block, re-fitted on the
    // row-model values over the observed rows.
    for (int j = l + 1; j <= n_cols; ++j) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        std::vector<double> y(static_cast<std::size_t>(k));
        for (int i = 1; i <= k; ++i) {
            idx[static_cast<std::size_t>(i - 1)] = i;
            y[static_cast<std::size_t>(i - 1)] = row_model(i, j);
        }
        const stats::LogLinearFit fit = stats::fit_loglog(idx, y);
        lambda.col_fits[static_cast<std::size_t>(j - 1)] = {fit.intercept, fit.slope};
        lambda.col_reports[static_cast<std::size_t>(j - 1)] = fit;
    }

    std::vector<bool> is_fallback(static_cast<std::size_t>(n_rows) + 1, false);
    for (int i : lambda.fallback_rows) is_fallback[static_cast<std::size_t>(i)] = true;

    for (int i = 1; i <= n_rows; ++i) {
        const bool observed_row = i <= k && !is_fallback[static_cast<std::size_t>(i)];
        for (int j = 1; j <= n_cols; ++j) {
            double value;
            CellSource source;
            if (observed_row) {
                value = row_model(i, j);
                source = j <= l ? CellSource::ObservedFit : CellSource::RowExtrapolated;
            } else if (j <= l) {
                value = column_model(i, j);
                source = CellSource::ColumnExtrapolated;
            } else {
                value = (row_model(i, j) + column_model(i, j)) / 2.0;
                source = CellSource::Averaged;
            }
            lambda.values(i - 1, j - 1) = value;
            lambda.provenance(i - 1, j - 1) = source;
        }
    }
    return lambda;
}

/// Per-row time fits of the new-coauthor means over the observed intervals,
/// extrapolated to the full horizon, with the slope's significance recorded.
inline ZetaMatrix fit_zeta(const XiMatrix& xi, const WindowSpec& w,
                           const TrainOptions& options = {}) {
    w.validate();
    if (xi.rows() != w.zeta_rows || xi.cols() != w.observed_cols)
        throw InvalidArgument("fit_zeta: matrix shape does not match the window");
    const int n_cols = w.intervals();
    const double t1 = static_cast<double>(w.year(1));

    ZetaMatrix zeta;
    zeta.values = Grid<double>(w.zeta_rows, n_cols, 0.0);
    zeta.fits.resize(static_cast<std::size_t>(w.zeta_rows));
    zeta.significance.resize(static_cast<std::size_t>(w.zeta_rows), 1.0);
    zeta.reports.resize(static_cast<std::size_t>(w.zeta_rows));

    for (int m = 1; m <= w.zeta_rows; ++m) {
        std::vector<double> y, t, cw;
        for (int j = 1; j <= w.observed_cols; ++j) {
            const bool defined = xi.defined(m, j);
            y.push_back(defined ? xi.value(m, j) : 0.0);
            t.push_back(static_cast<double>(w.year(j)));
            cw.push_back(defined ? static_cast<double>(xi.count(m, j)) : 0.0);
        }
        stats::LogLinearFit fit;
        try {
            fit = stats::fit_log_time(y, t, cw, options.method);
        } catch (const FitError& e) {
            throw FitError("fit_zeta: row " + std::to_string(m) + ": " + e.what());
        }
        zeta.fits[static_cast<std::size_t>(m - 1)] = {fit.intercept, fit.slope};
        zeta.significance[static_cast<std::size_t>(m - 1)] = fit.slope_p_value;
        zeta.reports[static_cast<std::size_t>(m - 1)] = fit;
        for (int j = 1; j <= n_cols; ++j)
            zeta.values(m - 1, j - 1) =
                std::exp(fit.intercept + fit.slope * (w.year(j) - t1));
    }
    return zeta;
}

}  // namespace cofo
