#pragma once

#include <string>
#include <vector>

#include "cofo/common.hpp"

namespace cofo {

/// All time cutpoints and size caps governing dataset slicing and the rate
/// matrices. The modeled span [fit_start, corpus_end] is partitioned into
/// intervals() half-open intervals (cutpoint(j-1), cutpoint(j)]; by default
/// cutpoints are consecutive calendar years, so interval j is simply the
/// year cutpoint(j).
struct WindowSpec {
    int corpus_start = 0;          // earliest year counted into histories
    std::vector<int> cutpoints;    // strictly increasing; front() = fit_start

    int lambda_rows = 0;           // historical-count rows of the rate matrix
    int observed_rows = 0;         // historical-count cap entering group means
    int observed_cols = 0;         // intervals with observed group means
    int zeta_rows = 0;             // annual-count rows of the coauthor matrix
    int test_history_cap = 0;      // max historical publications of test members

    int validation_anchor = 0;     // cutpoint index: members active in
                                   // (cutpoint(anchor-1), cutpoint(anchor)]
    int validation_end = 0;        // cutpoint index: last tracked interval
    int test_anchor = 0;           // cutpoint index: members active in
                                   // [cutpoint(anchor), cutpoint(anchor+1))
    int eval_start = 0;            // cutpoint index of the first scored interval
    int eval_end = 0;              // cutpoint index of the forecasting horizon

    int intervals() const { return static_cast<int>(cutpoints.size()) - 1; }
    int fit_start() const { return cutpoints.front(); }
    int corpus_end() const { return cutpoints.back(); }

    /// Calendar year of cutpoint j, j in [0, intervals()].
    int year(int j) const { return cutpoints.at(static_cast<std::size_t>(j)); }

    /// Cutpoint index whose year equals y (throws when y is not a cutpoint).
    int index_of_year(int y) const {
        for (int j = 0; j <= intervals(); ++j)
            if (cutpoints[static_cast<std::size_t>(j)] == y) return j;
        throw ConfigError("year " + std::to_string(y) + " is not a cutpoint");
    }

    /// Consecutive-year cutpoints from fit_start to corpus_end inclusive.
    static WindowSpec yearly(int corpus_start, int fit_start, int corpus_end) {
        WindowSpec w;
        w.corpus_start = corpus_start;
        for (int y = fit_start; y <= corpus_end; ++y) w.cutpoints.push_back(y);
        return w;
    }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError("window: " + what);
        };
        require(cutpoints.size() >= 2, "need at least 2 cutpoints");
        for (std::size_t i = 1; i < cutpoints.size(); ++i)
            require(cutpoints[i] > cutpoints[i - 1],
                    "cutpoints must be strictly increasing");
        require(corpus_start <= fit_start(), "corpus_start must not exceed fit_start");
        require(lambda_rows >= 1, "lambda_rows must be >= 1");
        require(zeta_rows >= 1, "zeta_rows must be >= 1");
        require(test_history_cap >= 1, "test_history_cap must be >= 1");
        require(observed_rows >= 1 && observed_rows <= lambda_rows,
                "observed_rows must lie in [1, lambda_rows]");
        require(observed_cols >= 1 && observed_cols <= intervals(),
                "observed_cols must lie in [1, intervals]");
        require(validation_anchor >= 1 && validation_anchor < validation_end &&
                    validation_end <= intervals(),
                "need 1 <= validation_anchor < validation_end <= intervals");
        require(test_anchor >= 1 && test_anchor + 1 <= intervals(),
                "test_anchor interval must exist");
        require(test_anchor < eval_start && eval_start < eval_end &&
                    eval_end <= intervals(),
                "need test_anchor < eval_start < eval_end <= intervals");
    }
};

}  // namespace cofo
