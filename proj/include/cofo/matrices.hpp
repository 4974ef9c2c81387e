#pragma once

#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/timeline.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Empirical group means over a (group index, interval) grid. Entries with an
/// empty group are undefined and must be skipped by downstream fits; they are
/// never imputed.
class GroupMeanMatrix {
public:
    GroupMeanMatrix() = default;
    GroupMeanMatrix(int rows, int cols, std::string row_label)
        : sums_(rows, cols, 0.0), counts_(rows, cols, 0),
          row_label_(std::move(row_label)) {}

    int rows() const { return sums_.rows(); }
    int cols() const { return sums_.cols(); }
    const std::string& row_label() const { return row_label_; }

    /// group in [1, rows], interval in [1, cols].
    bool defined(int group, int interval) const {
        return counts_(group - 1, interval - 1) > 0;
    }
    double value(int group, int interval) const {
        const long n = counts_(group - 1, interval - 1);
        return n > 0 ? sums_(group - 1, interval - 1) / static_cast<double>(n) : 0.0;
    }
    long count(int group, int interval) const {
        return counts_(group - 1, interval - 1);
    }

    void add(int group, int interval, double observation) {
        sums_(group - 1, interval - 1) += observation;
        ++counts_(group - 1, interval - 1);
    }

    /// Reinstate a persisted entry from its mean and group size.
    void restore(int group, int interval, double mean, long count) {
        sums_(group - 1, interval - 1) = mean * static_cast<double>(count);
        counts_(group - 1, interval - 1) = count;
    }

    long total_count() const {
        long total = 0;
        for (long c : counts_.data()) total += c;
        return total;
    }

private:
    Grid<double> sums_;
    Grid<long> counts_;
    std::string row_label_;
};

using EtaMatrix = GroupMeanMatrix;
using XiMatrix = GroupMeanMatrix;

/// Mean publications in interval j over training researchers with exactly i
/// publications in [corpus_start, cutpoint(j-1)], for i = 1..observed_rows and
/// j = 1..observed_cols. Researchers beyond the row cap are excluded from that
/// column; an interval with zero publications still contributes a zero
/// observation.
inline EtaMatrix compute_eta(const DatasetSlice& training, const WindowSpec& w) {
    if (training.members.empty())
        throw ConfigError("compute_eta: empty training slice");
    EtaMatrix eta(w.observed_rows, w.observed_cols, "i");
    for (const auto& tl : training.members) {
        for (int j = 1; j <= w.observed_cols; ++j) {
            const int history = tl.cumulative_pubs(w.year(j - 1));
            if (history < 1 || history > w.observed_rows) continue;
            const int produced = tl.cumulative_pubs(w.year(j)) - history;
            eta.add(history, j, static_cast<double>(produced));
        }
    }
    if (eta.total_count() == 0)
        throw ConfigError("compute_eta: no populated cells (window misconfigured)");
    return eta;
}

/// Mean new coauthors in interval j over training researchers with exactly m
/// publications in that interval, m = 1..zeta_rows. Researchers without a
/// publication in the interval belong to no group.
inline XiMatrix compute_xi(const DatasetSlice& training, const WindowSpec& w) {
    if (training.members.empty())
        throw ConfigError("compute_xi: empty training slice");
    XiMatrix xi(w.zeta_rows, w.observed_cols, "m");
    for (const auto& tl : training.members) {
        for (int j = 1; j <= w.observed_cols; ++j) {
            const int produced =
                tl.cumulative_pubs(w.year(j)) - tl.cumulative_pubs(w.year(j - 1));
            if (produced < 1 || produced > w.zeta_rows) continue;
            const int new_coauthors = tl.cumulative_coauthors(w.year(j)) -
                                      tl.cumulative_coauthors(w.year(j - 1));
            xi.add(produced, j, static_cast<double>(new_coauthors));
        }
    }
    if (xi.total_count() == 0)
        throw ConfigError("compute_xi: no populated cells (window misconfigured)");
    return xi;
}

}  // namespace cofo
