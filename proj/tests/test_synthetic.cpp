#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "cofo/synthetic.hpp"
#include "cofo/timeline.hpp"
#include "oracles.hpp"

using namespace cofo;
using Catch::Matchers::WithinAbs;

namespace {

WindowSpec synth_window(int intervals = 10) {
    WindowSpec w = WindowSpec::yearly(1985, 1990, 1990 + intervals);
    w.lambda_rows = 30;
    w.observed_rows = 12;
    w.observed_cols = intervals;
    w.zeta_rows = 6;
    w.test_history_cap = 25;
    w.validation_anchor = intervals / 2;
    w.validation_end = intervals;
    w.test_anchor = intervals / 2;
    w.eval_start = intervals / 2 + 1;
    w.eval_end = intervals;
    return w;
}

}  // namespace

TEST_CASE("a vanishing publication rate emits nothing after the first year") {
    GenerativeSpec spec;
    spec.window = synth_window();
    spec.n_authors = 20;
    spec.publication_rates = {1e-300, 0.0, 0.0};
    spec.coauthor_rates = {1.0, 0.0, 0.0};
    spec.seed = 1;
    const SyntheticCorpus corpus = generate(spec);
    for (const auto& pub : corpus.publications)
        REQUIRE(pub.year == spec.window.year(0));
    for (const auto& [author, deltas] : corpus.ground_truth)
        for (const auto& delta : deltas) {
            REQUIRE(delta.new_pubs == 0);
            REQUIRE(delta.new_coauthors == 0);
        }
}

TEST_CASE("corpus-wide means match the enumeration oracle") {
    GenerativeSpec spec;
    spec.window = synth_window();
    spec.n_authors = 1000;
    spec.publication_rates = {1.0, 0.0, 0.0};
    spec.coauthor_rates = {1.0, 0.0, 0.0};
    spec.hp = {0.0, 1.0};
    spec.seed = 99;
    const SyntheticCorpus corpus = generate(spec);

    double sum_dh = 0.0, sum_dk = 0.0;
    long n = 0;
    for (const auto& [author, deltas] : corpus.ground_truth)
        for (const auto& delta : deltas) {
            sum_dh += delta.new_pubs;
            sum_dk += delta.new_coauthors;
            ++n;
        }
    const auto expect = oracles::enumerate_one_step(
        1.0, std::vector<double>(static_cast<std::size_t>(spec.window.zeta_rows),
                                 1.0));
    REQUIRE_THAT(sum_dh / n, WithinAbs(expect.mean_dh,
                                       3.0 * std::sqrt(expect.var_dh / n)));
    REQUIRE_THAT(sum_dk / n, WithinAbs(expect.mean_dk,
                                       3.0 * std::sqrt(expect.var_dk / n)));
    // Sanity: E[dk] = (1 - e^{-1}) * 1 for unit rates.
    REQUIRE_THAT(expect.mean_dk, WithinAbs(1.0 - std::exp(-1.0), 1e-9));
}

TEST_CASE("timelines rebuild the latent increments exactly") {
    for (const bool padding : {false, true}) {
        GenerativeSpec spec;
        spec.window = synth_window();
        spec.n_authors = 150;
        spec.publication_rates = {1.2, 0.01, 0.2};
        spec.coauthor_rates = {0.9, 0.0, 0.5};
        spec.hp = {0.3, 0.8};
        spec.initial_pubs_max = 3;
        spec.initial_coauthors_max = 4;
        spec.entry_spread = 6;
        spec.pad_repeat_coauthors = padding;
        spec.seed = 7;
        const SyntheticCorpus corpus = generate(spec);
        const auto built = build_timelines(corpus.publications,
                                           spec.window.corpus_start,
                                           spec.window.corpus_end());
        for (const auto& [author, deltas] : corpus.ground_truth) {
            const AuthorTimeline& tl = built.timelines.at(author);
            const InitialState& init = corpus.initial_state.at(author);
            REQUIRE(tl.pubs_in_year(init.entry_year) == init.pubs);
            REQUIRE(tl.new_coauthors_in_year(init.entry_year) == init.coauthors);
            for (const auto& delta : deltas) {
                REQUIRE(tl.pubs_in_year(delta.year) == delta.new_pubs);
                REQUIRE(tl.new_coauthors_in_year(delta.year) ==
                        delta.new_coauthors);
            }
        }
    }
}

TEST_CASE("generated corpora satisfy the ingestion invariants") {
    GenerativeSpec spec;
    spec.window = synth_window();
    spec.n_authors = 100;
    spec.publication_rates = {1.5, 0.0, 0.1};
    spec.coauthor_rates = {1.0, 0.0, 0.3};
    spec.pad_repeat_coauthors = true;
    spec.initial_coauthors_max = 3;
    spec.seed = 13;
    const SyntheticCorpus corpus = generate(spec);
    std::set<std::string> ids;
    for (const auto& pub : corpus.publications) {
        REQUIRE_FALSE(pub.authors.empty());
        REQUIRE(ids.insert(pub.id).second);  // unique ids
        std::set<std::string> authors(pub.authors.begin(), pub.authors.end());
        REQUIRE(authors.size() == pub.authors.size());  // no duplicates
        REQUIRE(pub.year >= spec.window.year(0));
        REQUIRE(pub.year <= spec.window.corpus_end());
    }

    SECTION("padding only reuses established coauthors") {
        const auto built = build_timelines(corpus.publications,
                                           spec.window.corpus_start,
                                           spec.window.corpus_end());
        for (const auto& [author, deltas] : corpus.ground_truth) {
            long total = corpus.initial_state.at(author).coauthors;
            for (const auto& delta : deltas) total += delta.new_coauthors;
            REQUIRE(built.timelines.at(author).total_coauthors() == total);
        }
    }
}

TEST_CASE("generation is deterministic per seed and independent per author") {
    GenerativeSpec spec;
    spec.window = synth_window();
    spec.n_authors = 30;
    spec.publication_rates = {1.0, 0.0, 0.0};
    spec.coauthor_rates = {1.0, 0.0, 0.0};
    spec.seed = 4242;
    const SyntheticCorpus a = generate(spec);
    const SyntheticCorpus b = generate(spec);
    REQUIRE(a.publications.size() == b.publications.size());
    for (std::size_t i = 0; i < a.publications.size(); ++i) {
        REQUIRE(a.publications[i].id == b.publications[i].id);
        REQUIRE(a.publications[i].authors == b.publications[i].authors);
    }

    // Shrinking the population must not disturb the retained authors.
    GenerativeSpec smaller = spec;
    smaller.n_authors = 10;
    const SyntheticCorpus c = generate(smaller);
    for (const auto& [author, deltas] : c.ground_truth) {
        REQUIRE(a.ground_truth.count(author) == 1);
        const auto& full = a.ground_truth.at(author);
        REQUIRE(full.size() == deltas.size());
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            REQUIRE(full[i].new_pubs == deltas[i].new_pubs);
            REQUIRE(full[i].new_coauthors == deltas[i].new_coauthors);
        }
    }
}
