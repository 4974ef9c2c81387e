#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/hyperopt.hpp"
#include "cofo/rng.hpp"
#include "cofo/stats.hpp"
#include "cofo/timeline.hpp"
#include "cofo/training.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Which Poisson mass function the event-probability sum uses. Standard is
/// mean^x e^-mean / x!; SwappedExponent is the x^mean variant kept for
/// comparison runs (it does not normalize and is not the default).
enum class PmfForm { Standard, SwappedExponent };

struct EventProbability {
    double value = 0.0;           // probability of at least one new coauthor
    double truncated_tail = 0.0;  // Poisson mass above the annual-count cap,
                                  // ignored by the truncated sum
};

/// Probability that a researcher with the given history acquires at least one
/// new coauthor in interval `l`: one minus the no-publication mass minus the
/// mass of publishing x papers and drawing zero coauthors, x up to the
/// annual-count cap.
inline EventProbability event_probability(int h_prev, long k_prev,
                                          const LambdaMatrix& lambda,
                                          const ZetaMatrix& zeta,
                                          const HyperParams& hp,
                                          const WindowSpec& w, int l,
                                          PmfForm form = PmfForm::Standard) {
    if (h_prev < 1 || h_prev > w.lambda_rows)
        throw InvalidArgument("event_probability: history out of range");
    if (l < 1 || l > w.intervals())
        throw InvalidArgument("event_probability: interval out of range");
    const double rate = lambda.rate(h_prev, l);
    EventProbability result;
    double p = 1.0 - std::exp(-rate);
    double pmf = std::exp(-rate);  // mass at x = 0
    double cdf = pmf;
    for (int x = 1; x <= w.zeta_rows; ++x) {
        if (form == PmfForm::Standard)
            pmf *= rate / static_cast<double>(x);
        else
            pmf = std::exp(rate * std::log(static_cast<double>(x)) - rate -
                           std::lgamma(static_cast<double>(x) + 1.0));
        cdf += pmf;
        const double no_new = std::exp(-modified_zeta(zeta.rate(x, l), k_prev, hp));
        p -= pmf * no_new;
    }
    result.truncated_tail = std::max(0.0, 1.0 - cdf);
    if (form == PmfForm::Standard && (p < -1e-9 || p > 1.0 + 1e-9))
        throw Error("event_probability: value " + format_double(p) +
                    " outside [0,1]");
    result.value = std::clamp(p, 0.0, 1.0);
    return result;
}

/// Simulated publication/coauthor trajectories for one researcher. Paths are
/// cumulative counts, replicate-major; every replicate starts from the
/// researcher's observed state at the anchor cutpoint.
struct Forecast {
    std::string author;
    int start_year = 0;
    int start_pubs = 0;
    long start_coauthors = 0;
    std::vector<int> years;          // forecast horizon, ascending
    std::vector<int> pub_paths;      // replicates x years
    std::vector<long> coauthor_paths;
    int replicates = 0;

    int pubs_at(int replicate, int year_idx) const {
        return pub_paths[static_cast<std::size_t>(replicate) * years.size() +
                         static_cast<std::size_t>(year_idx)];
    }
    long coauthors_at(int replicate, int year_idx) const {
        return coauthor_paths[static_cast<std::size_t>(replicate) * years.size() +
                              static_cast<std::size_t>(year_idx)];
    }
    double mean_pubs(int year_idx) const {
        double sum = 0.0;
        for (int r = 0; r < replicates; ++r) sum += pubs_at(r, year_idx);
        return sum / replicates;
    }
    double mean_coauthors(int year_idx) const {
        double sum = 0.0;
        for (int r = 0; r < replicates; ++r)
            sum += static_cast<double>(coauthors_at(r, year_idx));
        return sum / replicates;
    }
    /// Nearest-rank quantile of the coauthor count across replicates.
    long coauthor_quantile(double q, int year_idx) const {
        std::vector<long> column(static_cast<std::size_t>(replicates));
        for (int r = 0; r < replicates; ++r) column[r] = coauthors_at(r, year_idx);
        std::sort(column.begin(), column.end());
        const long rank = std::max<long>(
            1, static_cast<long>(std::ceil(q * static_cast<double>(replicates))));
        return column[static_cast<std::size_t>(
            std::min<long>(rank, replicates) - 1)];
    }
};

struct SimulationResult {
    std::vector<Forecast> forecasts;
    std::uint64_t seed = 0;
    long skipped_no_history = 0;  // members without a publication history
    long clamped_history = 0;     // years where h exceeded the matrix rows
    long clamped_annual = 0;      // years where the draw exceeded the rate rows
};

/// Monte Carlo forecast over the horizon (test_anchor, eval_end]: per year,
/// draw the publication count from the researcher's rate row, then, if
/// positive, draw new coauthors from the modified coauthor rate. Substreams
/// are indexed by (author, replicate), so results are independent of thread
/// count and member order.
inline SimulationResult simulate(const DatasetSlice& test,
                                 const LambdaMatrix& lambda,
                                 const ZetaMatrix& zeta, const HyperParams& hp,
                                 const WindowSpec& w, int replicates,
                                 std::uint64_t seed) {
    w.validate();
    if (replicates < 1) throw InvalidArgument("simulate: replicates must be >= 1");
    const int horizon = w.eval_end - w.test_anchor;
    const int anchor_year = w.year(w.test_anchor);

    struct Job {
        const AuthorTimeline* tl;
        int start_pubs;
        long start_coauthors;
    };
    std::vector<Job> jobs;
    SimulationResult result;
    result.seed = seed;
    for (const auto& tl : test.members) {
        const int h0 = tl.cumulative_pubs(anchor_year);
        if (h0 < 1) {
            ++result.skipped_no_history;
            continue;
        }
        jobs.push_back({&tl, h0, tl.cumulative_coauthors(anchor_year)});
    }

    result.forecasts.resize(jobs.size());
    std::vector<long> clamped_h(jobs.size(), 0), clamped_r(jobs.size(), 0);
    parallel_for(jobs.size(), [&](std::size_t idx) {
        const Job& job = jobs[idx];
        Forecast fc;
        fc.author = job.tl->author();
        fc.start_year = anchor_year;
        fc.start_pubs = job.start_pubs;
        fc.start_coauthors = job.start_coauthors;
        fc.replicates = replicates;
        for (int l = w.test_anchor + 1; l <= w.eval_end; ++l)
            fc.years.push_back(w.year(l));
        fc.pub_paths.resize(static_cast<std::size_t>(replicates) * horizon);
        fc.coauthor_paths.resize(static_cast<std::size_t>(replicates) * horizon);

        const std::uint64_t author_seed = derive_seed(seed, fc.author);
        for (int rep = 0; rep < replicates; ++rep) {
            Rng rng = Rng::substream(author_seed, "replicate",
                                     static_cast<std::uint64_t>(rep));
            int h = job.start_pubs;
            long k = job.start_coauthors;
            for (int step = 0; step < horizon; ++step) {
                const int l = w.test_anchor + 1 + step;
                int row = h;
                if (row > w.lambda_rows) {
                    row = w.lambda_rows;
                    ++clamped_h[idx];
                }
                const long r = rng.poisson(lambda.rate(row, l));
                long u = 0;
                if (r > 0) {
                    long m = r;
                    if (m > w.zeta_rows) {
                        m = w.zeta_rows;
                        ++clamped_r[idx];
                    }
                    u = rng.poisson(
                        modified_zeta(zeta.rate(static_cast<int>(m), l), k, hp));
                }
                h += static_cast<int>(r);
                k += u;
                fc.pub_paths[static_cast<std::size_t>(rep) * horizon + step] = h;
                fc.coauthor_paths[static_cast<std::size_t>(rep) * horizon + step] = k;
            }
        }
        result.forecasts[idx] = std::move(fc);
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        result.clamped_history += clamped_h[i];
        result.clamped_annual += clamped_r[i];
    }
    return result;
}

}  // namespace cofo
