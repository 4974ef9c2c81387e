#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/predict.hpp"
#include "cofo/stats.hpp"
#include "cofo/timeline.hpp"
#include "cofo/training.hpp"
#include "cofo/window.hpp"

namespace cofo {

// ---------------------------------------------------------------------------
// Evolutionary trend of the coauthor counts

/// Observed vs predicted coauthor growth. Researchers are grouped by their
/// coauthor count at the anchor cutpoint; the headline grids track cumulative
/// counts, the incremental grids the per-year arrivals. s1 is the Pearson
/// correlation of the paired per-researcher lists; s2 correlates the two
/// lists after sorting each independently.
struct TrendReport {
    std::vector<int> years;
    std::vector<long> group_keys;            // anchor coauthor counts, ascending
    std::vector<long> group_sizes;
    Grid<double> observed_cumulative;        // groups x years
    Grid<double> predicted_cumulative;
    Grid<double> observed_incremental;
    Grid<double> predicted_incremental;
    std::vector<double> s1;                  // per year
    std::vector<double> s2;
};

inline TrendReport trend_report(const DatasetSlice& test,
                                const std::vector<Forecast>& forecasts,
                                const WindowSpec& w) {
    w.validate();
    if (forecasts.empty()) throw InvalidArgument("trend_report: no forecasts");
    std::unordered_map<std::string_view, const AuthorTimeline*> by_author;
    for (const auto& tl : test.members) by_author[tl.author()] = &tl;

    const std::vector<int>& years = forecasts.front().years;
    if (years.empty()) throw InvalidArgument("trend_report: empty forecast horizon");
    const int anchor_year = forecasts.front().start_year;
    if (years.back() > w.corpus_end())
        throw ConfigError("trend_report: forecasts extend past the corpus");

    struct Entry {
        const AuthorTimeline* tl;
        const Forecast* fc;
        long key;
    };
    std::vector<Entry> entries;
    for (const auto& fc : forecasts) {
        auto it = by_author.find(fc.author);
        if (it == by_author.end()) continue;
        entries.push_back({it->second, &fc, it->second->cumulative_coauthors(anchor_year)});
    }
    if (entries.empty())
        throw ConfigError("trend_report: forecasts and test slice are disjoint");

    std::map<long, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < entries.size(); ++i)
        groups[entries[i].key].push_back(i);

    TrendReport report;
    report.years = years;
    for (const auto& [key, members] : groups) {
        report.group_keys.push_back(key);
        report.group_sizes.push_back(static_cast<long>(members.size()));
    }
    const int n_groups = static_cast<int>(report.group_keys.size());
    const int n_years = static_cast<int>(years.size());
    report.observed_cumulative = Grid<double>(n_groups, n_years, 0.0);
    report.predicted_cumulative = Grid<double>(n_groups, n_years, 0.0);
    report.observed_incremental = Grid<double>(n_groups, n_years, 0.0);
    report.predicted_incremental = Grid<double>(n_groups, n_years, 0.0);

    int g = 0;
    for (const auto& [key, members] : groups) {
        for (int t = 0; t < n_years; ++t) {
            double obs_cum = 0.0, pred_cum = 0.0, obs_inc = 0.0, pred_inc = 0.0;
            for (std::size_t idx : members) {
                const Entry& e = entries[idx];
                const int year = years[static_cast<std::size_t>(t)];
                obs_cum += e.tl->cumulative_coauthors(year);
                obs_inc += e.tl->new_coauthors_in_year(year);
                const double mean_k = e.fc->mean_coauthors(t);
                pred_cum += mean_k;
                pred_inc += mean_k - (t == 0 ? static_cast<double>(e.fc->start_coauthors)
                                             : e.fc->mean_coauthors(t - 1));
            }
            const double n = static_cast<double>(members.size());
            report.observed_cumulative(g, t) = obs_cum / n;
            report.predicted_cumulative(g, t) = pred_cum / n;
            report.observed_incremental(g, t) = obs_inc / n;
            report.predicted_incremental(g, t) = pred_inc / n;
        }
        ++g;
    }

    // Per-year correlations over individuals.
    for (int t = 0; t < n_years; ++t) {
        std::vector<double> observed, predicted;
        observed.reserve(entries.size());
        predicted.reserve(entries.size());
        for (const Entry& e : entries) {
            observed.push_back(e.tl->cumulative_coauthors(years[static_cast<std::size_t>(t)]));
            predicted.push_back(e.fc->mean_coauthors(t));
        }
        report.s1.push_back(stats::pearson(observed, predicted));
        std::sort(observed.begin(), observed.end());
        std::sort(predicted.begin(), predicted.end());
        report.s2.push_back(stats::pearson(observed, predicted));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Distribution comparison

enum class DistributionMode {
    SingleReplicate,  // matched sample size; two-sample p-values stay comparable
    Pooled,           // all replicates merged
};

struct DistributionComparison {
    int year = 0;
    double ks_statistic = 0.0;
    double p_value = 1.0;
    long n_observed = 0;
    long n_predicted = 0;
};

/// Per-year two-sample KS comparison of observed vs predicted cumulative
/// coauthor counts across the test researchers.
inline std::vector<DistributionComparison> distribution_report(
    const DatasetSlice& test, const std::vector<Forecast>& forecasts,
    const WindowSpec& w,
    DistributionMode mode = DistributionMode::SingleReplicate) {
    w.validate();
    if (forecasts.empty())
        throw InvalidArgument("distribution_report: no forecasts");
    std::unordered_map<std::string_view, const AuthorTimeline*> by_author;
    for (const auto& tl : test.members) by_author[tl.author()] = &tl;

    const std::vector<int>& years = forecasts.front().years;
    std::vector<DistributionComparison> report;
    for (std::size_t t = 0; t < years.size(); ++t) {
        std::vector<long> observed, predicted;
        for (const auto& fc : forecasts) {
            auto it = by_author.find(fc.author);
            if (it == by_author.end()) continue;
            observed.push_back(it->second->cumulative_coauthors(years[t]));
            if (mode == DistributionMode::SingleReplicate) {
                predicted.push_back(fc.coauthors_at(0, static_cast<int>(t)));
            } else {
                for (int r = 0; r < fc.replicates; ++r)
                    predicted.push_back(fc.coauthors_at(r, static_cast<int>(t)));
            }
        }
        if (observed.empty()) continue;
        const stats::KsResult ks = stats::ks_test_two_sample(observed, predicted);
        report.push_back({years[t], ks.statistic, ks.p_value,
                          static_cast<long>(observed.size()),
                          static_cast<long>(predicted.size())});
    }
    if (report.empty())
        throw ConfigError("distribution_report: forecasts and test slice are disjoint");
    return report;
}

// ---------------------------------------------------------------------------
// Collaboration events

/// Threshold-at-0.5 accuracy counts: hits are events with probability above
/// one half plus non-events below it; exact halves get half credit.
struct AucCounts {
    long hits_event = 0;      // events with p > 0.5
    long hits_non_event = 0;  // non-events with p < 0.5
    long at_half = 0;         // p exactly 0.5
    long total = 0;

    double auc() const {
        return total > 0 ? (static_cast<double>(hits_event) +
                            static_cast<double>(hits_non_event) +
                            0.5 * static_cast<double>(at_half)) /
                               static_cast<double>(total)
                         : 0.0;
    }
};

struct AucStratum {
    int year = 0;     // 0 = all years
    int history = 0;  // historical publication count; 0 = all, -1 = overflow
    AucCounts counts;
};

struct AucReport {
    AucCounts overall;
    std::vector<AucStratum> by_year;
    std::vector<AucStratum> by_year_and_history;  // history capped, overflow pooled
    int history_cap = 50;
};

/// Score precomputed (probability, event) pairs.
inline AucCounts auc_from_scores(
    const std::vector<std::pair<double, bool>>& scores) {
    AucCounts counts;
    for (const auto& [p, event] : scores) {
        ++counts.total;
        if (p == 0.5)
            ++counts.at_half;
        else if (event && p > 0.5)
            ++counts.hits_event;
        else if (!event && p < 0.5)
            ++counts.hits_non_event;
    }
    return counts;
}

/// Event probabilities from the observed year-by-year states of the test
/// researchers, classified against the observed collaboration indicator.
inline AucReport auc_report(const DatasetSlice& test, const LambdaMatrix& lambda,
                            const ZetaMatrix& zeta, const HyperParams& hp,
                            const WindowSpec& w, int history_cap = 50,
                            PmfForm form = PmfForm::Standard) {
    w.validate();
    AucReport report;
    report.history_cap = history_cap;
    std::map<int, AucCounts> per_year;
    std::map<std::pair<int, int>, AucCounts> per_cell;

    for (const auto& tl : test.members) {
        for (int l = w.test_anchor + 1; l <= w.eval_end; ++l) {
            const int prev_year = w.year(l - 1);
            int h_prev = tl.cumulative_pubs(prev_year);
            if (h_prev < 1) continue;
            h_prev = std::min(h_prev, w.lambda_rows);
            const long k_prev = tl.cumulative_coauthors(prev_year);
            const double p =
                event_probability(h_prev, k_prev, lambda, zeta, hp, w, l, form).value;
            const bool event = tl.cumulative_coauthors(w.year(l)) > k_prev;

            auto tally = [&](AucCounts& counts) {
                ++counts.total;
                if (p == 0.5)
                    ++counts.at_half;
                else if (event && p > 0.5)
                    ++counts.hits_event;
                else if (!event && p < 0.5)
                    ++counts.hits_non_event;
            };
            tally(report.overall);
            tally(per_year[w.year(l)]);
            const int stratum = h_prev <= history_cap ? h_prev : -1;
            tally(per_cell[{w.year(l), stratum}]);
        }
    }
    for (const auto& [year, counts] : per_year)
        report.by_year.push_back({year, 0, counts});
    for (const auto& [key, counts] : per_cell)
        report.by_year_and_history.push_back({key.first, key.second, counts});
    return report;
}

// ---------------------------------------------------------------------------
// Poisson-character scan

enum class ScanGrouping {
    AnnualPubs,                      // groups (annual pubs, year)
    AnnualPubsAndCoauthorHistory,    // groups (annual pubs, history, year)
};

struct ScanCell {
    int year = 0;
    int annual_pubs = 0;
    long coauthor_history = -1;  // -1 when not part of the grouping
    long n = 0;
    double lambda_hat = 0.0;
    double ks_statistic = 0.0;
    double p_value = 1.0;
    bool sufficient = false;
};

struct ScanOptions {
    int max_annual_pubs = 20;
    long min_group = 20;
    int n_boot = 1000;
    std::uint64_t seed = 0;
    std::vector<int> years;  // empty = all observed intervals
};

/// One-sample Poisson KS tests of the yearly new-coauthor counts within
/// groups of researchers sharing an annual publication count (and optionally
/// a coauthor history). Groups below min_group are reported, not tested.
inline std::vector<ScanCell> poisson_character_scan(const DatasetSlice& slice,
                                                    const WindowSpec& w,
                                                    ScanGrouping grouping,
                                                    const ScanOptions& options = {}) {
    w.validate();
    std::vector<int> years = options.years;
    if (years.empty())
        for (int j = 1; j <= w.observed_cols; ++j) years.push_back(w.year(j));

    std::map<std::tuple<int, int, long>, std::vector<long>> groups;
    for (const auto& tl : slice.members) {
        for (int year : years) {
            const int m = tl.pubs_in_year(year);
            if (m < 1 || m > options.max_annual_pubs) continue;
            const long history =
                grouping == ScanGrouping::AnnualPubsAndCoauthorHistory
                    ? tl.cumulative_coauthors(year - 1)
                    : -1;
            groups[{year, m, history}].push_back(tl.new_coauthors_in_year(year));
        }
    }

    std::vector<ScanCell> cells;
    cells.reserve(groups.size());
    for (auto& [key, sample] : groups) {
        ScanCell cell;
        cell.year = std::get<0>(key);
        cell.annual_pubs = std::get<1>(key);
        cell.coauthor_history = std::get<2>(key);
        cell.n = static_cast<long>(sample.size());
        cells.push_back(cell);
    }
    // Bootstrap per cell; indexed substreams keep this thread-safe.
    std::vector<const std::vector<long>*> samples;
    samples.reserve(groups.size());
    for (const auto& [key, sample] : groups) samples.push_back(&sample);
    parallel_for(cells.size(), [&](std::size_t i) {
        ScanCell& cell = cells[i];
        if (cell.n < options.min_group) return;
        double sum = 0.0;
        for (long v : *samples[i]) sum += static_cast<double>(v);
        if (sum <= 0.0) return;  // degenerate all-zero group
        const stats::KsResult ks = stats::ks_test_poisson(
            *samples[i], std::nullopt, options.n_boot,
            derive_seed(options.seed, "scan", i));
        cell.sufficient = true;
        cell.lambda_hat = ks.lambda_hat;
        cell.ks_statistic = ks.statistic;
        cell.p_value = ks.p_value;
    });
    return cells;
}

// ---------------------------------------------------------------------------
// Autocorrelation

/// Autocorrelation of a series at lags 1..max_lag: centered cross products
/// over the full-series centered sum of squares.
inline std::vector<double> autocorrelation(std::span<const double> series,
                                           int max_lag) {
    const std::size_t n = series.size();
    if (n < 2) throw InvalidArgument("autocorrelation: series too short");
    if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= n)
        throw InvalidArgument("autocorrelation: lag out of range");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (denom <= 0.0)
        throw InvalidArgument("autocorrelation: constant series");
    std::vector<double> r(static_cast<std::size_t>(max_lag));
    for (int lag = 1; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t)
            num += (series[t] - mean) * (series[t + static_cast<std::size_t>(lag)] - mean);
        r[static_cast<std::size_t>(lag - 1)] = num / denom;
    }
    return r;
}

struct AutocorrelationGroup {
    long anchor_coauthors = 0;
    double proportion = 0.0;  // group share of the usable researchers
    long n = 0;
    std::vector<double> mean_r;  // per lag, averaged over the group
};

struct AutocorrelationReport {
    std::vector<AutocorrelationGroup> groups;
    long skipped_constant = 0;
};

/// Mean autocorrelation of the cumulative coauthor series over the span
/// [test_anchor, eval_end], grouped by the anchor coauthor count.
inline AutocorrelationReport autocorrelation_report(const DatasetSlice& slice,
                                                    const WindowSpec& w,
                                                    int max_lag) {
    w.validate();
    const int series_len = w.eval_end - w.test_anchor + 1;
    if (max_lag < 1 || max_lag >= series_len)
        throw InvalidArgument("autocorrelation_report: lag out of range");
    std::map<long, std::pair<long, std::vector<double>>> sums;
    AutocorrelationReport report;
    long usable = 0;
    for (const auto& tl : slice.members) {
        std::vector<double> series(static_cast<std::size_t>(series_len));
        for (int l = w.test_anchor; l <= w.eval_end; ++l)
            series[static_cast<std::size_t>(l - w.test_anchor)] =
                static_cast<double>(tl.cumulative_coauthors(w.year(l)));
        std::vector<double> r;
        try {
            r = autocorrelation(series, max_lag);
        } catch (const InvalidArgument&) {
            ++report.skipped_constant;
            continue;
        }
        ++usable;
        auto& [count, acc] = sums[tl.cumulative_coauthors(w.year(w.test_anchor))];
        if (acc.empty()) acc.assign(static_cast<std::size_t>(max_lag), 0.0);
        ++count;
        for (int lag = 0; lag < max_lag; ++lag)
            acc[static_cast<std::size_t>(lag)] += r[static_cast<std::size_t>(lag)];
    }
    for (auto& [key, value] : sums) {
        AutocorrelationGroup group;
        group.anchor_coauthors = key;
        group.n = value.first;
        group.proportion =
            usable > 0 ? static_cast<double>(value.first) / static_cast<double>(usable)
                       : 0.0;
        group.mean_r = value.second;
        for (double& v : group.mean_r) v /= static_cast<double>(value.first);
        report.groups.push_back(std::move(group));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Corpus diagnostics

struct AdvantageCell {
    int year = 0;
    long prior_count = 0;
    double mean_increment = 0.0;
    long n = 0;
};

struct YearDiagnostics {
    int year = 0;
    double one_pub_proportion = 0.0;  // share of active researchers with one
                                      // publication so far
    long active = 0;
    double spearman_r = 0.0;          // cumulative pubs vs cumulative coauthors
    double spearman_p = 1.0;
};

struct DiagnosticsReport {
    std::vector<YearDiagnostics> per_year;
    std::vector<AdvantageCell> coauthor_advantage;     // by prior coauthor count
    std::vector<AdvantageCell> publication_advantage;  // by prior publication count
};

/// Per-year corpus diagnostics: the one-publication proportion, both
/// cumulative-advantage curves, and the publication/coauthor rank correlation.
inline DiagnosticsReport appendix_diagnostics(const DatasetSlice& slice,
                                              const WindowSpec& w,
                                              std::vector<int> years = {}) {
    w.validate();
    if (years.empty())
        for (int j = 1; j <= w.intervals(); ++j) years.push_back(w.year(j));
    DiagnosticsReport report;
    for (int year : years) {
        YearDiagnostics diag;
        diag.year = year;
        long one_pub = 0;
        std::vector<double> pubs, coauthors;
        std::map<long, std::pair<double, long>> by_coauthors, by_pubs;
        for (const auto& tl : slice.members) {
            const int h = tl.cumulative_pubs(year);
            if (h >= 1) {
                ++diag.active;
                if (h == 1) ++one_pub;
                pubs.push_back(static_cast<double>(h));
                coauthors.push_back(static_cast<double>(tl.cumulative_coauthors(year)));
            }
            if (tl.cumulative_pubs(year - 1) >= 1) {
                auto& co = by_coauthors[tl.cumulative_coauthors(year - 1)];
                co.first += static_cast<double>(tl.new_coauthors_in_year(year));
                ++co.second;
                auto& pu = by_pubs[tl.cumulative_pubs(year - 1)];
                pu.first += static_cast<double>(tl.pubs_in_year(year));
                ++pu.second;
            }
        }
        if (diag.active > 0)
            diag.one_pub_proportion =
                static_cast<double>(one_pub) / static_cast<double>(diag.active);
        if (pubs.size() >= 3) {
            try {
                const stats::Correlation corr = stats::spearman(pubs, coauthors);
                diag.spearman_r = corr.r;
                diag.spearman_p = corr.p_value;
            } catch (const InvalidArgument&) {
                // Constant column: correlation undefined, left at defaults.
            }
        }
        report.per_year.push_back(diag);
        for (const auto& [key, acc] : by_coauthors)
            report.coauthor_advantage.push_back(
                {year, key, acc.first / static_cast<double>(acc.second), acc.second});
        for (const auto& [key, acc] : by_pubs)
            report.publication_advantage.push_back(
                {year, key, acc.first / static_cast<double>(acc.second), acc.second});
    }
    return report;
}

}  // namespace cofo
