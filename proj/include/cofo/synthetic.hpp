#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/hyperopt.hpp"
#include "cofo/publication.hpp"
#include "cofo/rng.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Rate surface of the form scale * e^{time_slope * (t_j - t_1)} * index^exponent.
struct RateSurface {
    double scale = 1.0;
    double time_slope = 0.0;
    double index_exponent = 0.0;

    double operator()(int index, int interval, const WindowSpec& w) const {
        return scale *
               std::exp(time_slope * static_cast<double>(w.year(interval) - w.year(1))) *
               std::pow(static_cast<double>(index), index_exponent);
    }
};

/// Everything needed to draw a corpus from the model's own generative
/// process. Explicit rate grids, when set, override the parametric surfaces.
struct GenerativeSpec {
    int n_authors = 1000;
    WindowSpec window;
    RateSurface publication_rates;   // indexed by historical count
    RateSurface coauthor_rates;      // indexed by annual count
    std::optional<Grid<double>> explicit_lambda;  // lambda_rows x intervals
    std::optional<Grid<double>> explicit_zeta;    // zeta_rows x intervals
    HyperParams hp{0.0, 1.0};
    int initial_pubs_min = 1;
    int initial_pubs_max = 1;
    long initial_coauthors_min = 0;
    long initial_coauthors_max = 0;
    int entry_spread = 0;  // entry cutpoint drawn uniformly from [0, spread]
    bool pad_repeat_coauthors = false;  // give lone publications one known coauthor
    std::string author_prefix = "s";
    std::uint64_t seed = 0;

    void validate() const {
        window.validate();
        if (n_authors < 1) throw ConfigError("synthetic: n_authors must be >= 1");
        if (initial_pubs_min < 1 || initial_pubs_max < initial_pubs_min)
            throw ConfigError("synthetic: initial publication range invalid");
        if (initial_coauthors_min < 0 ||
            initial_coauthors_max < initial_coauthors_min)
            throw ConfigError("synthetic: initial coauthor range invalid");
        if (entry_spread < 0 || entry_spread >= window.intervals())
            throw ConfigError("synthetic: entry_spread outside the window");
    }
};

/// Latent per-year increments of one focal author, exact by construction.
struct YearDelta {
    int year = 0;
    int new_pubs = 0;
    long new_coauthors = 0;
};

struct InitialState {
    int entry_year = 0;
    int pubs = 0;
    long coauthors = 0;
};

struct SyntheticCorpus {
    std::vector<Publication> publications;
    std::map<std::string, std::vector<YearDelta>> ground_truth;  // focal authors
    std::map<std::string, InitialState> initial_state;
};

/// Draw a corpus: each focal author evolves independently; coauthor
/// identities are globally fresh strings, so the latent new-coauthor counts
/// are exactly recoverable from the emitted publications.
inline SyntheticCorpus generate(const GenerativeSpec& spec) {
    spec.validate();
    const WindowSpec& w = spec.window;
    SyntheticCorpus corpus;

    auto lambda_at = [&](int h, int j) {
        const int row = std::min(h, w.lambda_rows);
        return spec.explicit_lambda ? (*spec.explicit_lambda)(row - 1, j - 1)
                                    : spec.publication_rates(row, j, w);
    };
    auto zeta_at = [&](int m, int j) {
        const int row = std::min(m, w.zeta_rows);
        return spec.explicit_zeta ? (*spec.explicit_zeta)(row - 1, j - 1)
                                  : spec.coauthor_rates(row, j, w);
    };

    for (int a = 0; a < spec.n_authors; ++a) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%06d", spec.author_prefix.c_str(), a);
        const std::string focal(buf);
        Rng rng = Rng::substream(spec.seed, "synth_author",
                                 static_cast<std::uint64_t>(a));

        int h = spec.initial_pubs_min +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(
                    spec.initial_pubs_max - spec.initial_pubs_min + 1)));
        long k = spec.initial_coauthors_min +
                 static_cast<long>(rng.below(static_cast<std::uint64_t>(
                     spec.initial_coauthors_max - spec.initial_coauthors_min + 1)));

        long fresh_id = 0;
        std::vector<std::string> known_coauthors;
        auto fresh_coauthor = [&] {
            std::string id = focal + "-c" + std::to_string(fresh_id++);
            known_coauthors.push_back(id);
            return id;
        };

        const int entry = spec.entry_spread > 0
                              ? static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(spec.entry_spread) + 1))
                              : 0;

        // Materialize the initial state in the entry year.
        auto emit = [&](int year, int n_pubs, long n_new) {
            std::vector<Publication> batch(static_cast<std::size_t>(n_pubs));
            for (int p = 0; p < n_pubs; ++p) {
                batch[p].id = focal + "-y" + std::to_string(year) + "-" +
                              std::to_string(p);
                batch[p].year = year;
                batch[p].authors.push_back(focal);
            }
            for (long c = 0; c < n_new; ++c)
                batch[static_cast<std::size_t>(c % n_pubs)].authors.push_back(
                    fresh_coauthor());
            if (spec.pad_repeat_coauthors) {
                const std::size_t established =
                    known_coauthors.size() - static_cast<std::size_t>(n_new);
                for (auto& pub : batch)
                    if (pub.authors.size() == 1 && established > 0)
                        pub.authors.push_back(
                            known_coauthors[rng.below(established)]);
            }
            for (auto& pub : batch) corpus.publications.push_back(std::move(pub));
        };

        emit(w.year(entry), h, k);
        corpus.initial_state[focal] = {w.year(entry), h, k};

        auto& truth = corpus.ground_truth[focal];
        for (int j = entry + 1; j <= w.intervals(); ++j) {
            const long dh = rng.poisson(lambda_at(h, j));
            long dk = 0;
            if (dh > 0) {
                const int m = static_cast<int>(std::min<long>(dh, w.zeta_rows));
                dk = rng.poisson(modified_zeta(zeta_at(m, j), k, spec.hp));
                emit(w.year(j), static_cast<int>(dh), dk);
            }
            truth.push_back({w.year(j), static_cast<int>(dh), dk});
            h += static_cast<int>(dh);
            k += dk;
        }
    }
    return corpus;
}

}  // namespace cofo
