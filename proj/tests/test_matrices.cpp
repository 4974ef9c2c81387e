#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "cofo/matrices.hpp"
#include "cofo/rng.hpp"
#include "cofo/synthetic.hpp"
#include "cofo/timeline.hpp"
#include "oracles.hpp"

using namespace cofo;
using Catch::Matchers::WithinAbs;

namespace {

WindowSpec toy_window(int observed_cols = 6) {
    WindowSpec w = WindowSpec::yearly(1985, 1990, 2000);
    w.lambda_rows = 20;
    w.observed_rows = 8;
    w.observed_cols = observed_cols;
    w.zeta_rows = 5;
    w.test_history_cap = 10;
    w.validation_anchor = 6;
    w.validation_end = 8;
    w.test_anchor = 6;
    w.eval_start = 7;
    w.eval_end = 10;
    return w;
}

Publication make_pub(const std::string& id, int year,
                     std::vector<std::string> authors) {
    Publication p;
    p.id = id;
    p.year = year;
    p.authors = std::move(authors);
    return p;
}

DatasetSlice slice_of(const TimelineMap& timelines, const WindowSpec& w) {
    return slice_dataset(timelines, w, SliceRole::Training);
}

TimelineMap focal_timelines(const SyntheticCorpus& corpus, const WindowSpec& w) {
    const auto built =
        build_timelines(corpus.publications, w.corpus_start, w.corpus_end());
    TimelineMap focal;
    for (const auto& [author, tl] : built.timelines)
        if (corpus.ground_truth.count(author)) focal.emplace(author, tl);
    return focal;
}

}  // namespace

TEST_CASE("single researcher populates the expected eta cells") {
    const WindowSpec w = toy_window();
    // One publication in each of the first three intervals.
    std::vector<Publication> pubs{make_pub("p1", 1991, {"a"}),
                                  make_pub("p2", 1992, {"a"}),
                                  make_pub("p3", 1993, {"a"})};
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    const auto eta = compute_eta(slice_of(built.timelines, w), w);
    REQUIRE(eta.defined(1, 2));
    REQUIRE(eta.value(1, 2) == 1.0);
    REQUIRE(eta.defined(2, 3));
    REQUIRE(eta.value(2, 3) == 1.0);
    // No history before the first interval, so column 1 is empty.
    REQUIRE_FALSE(eta.defined(1, 1));
    // After the last publication the researcher still contributes zeros.
    REQUIRE(eta.defined(3, 4));
    REQUIRE(eta.value(3, 4) == 0.0);
}

TEST_CASE("a researcher with zero publications in the interval still counts") {
    const WindowSpec w = toy_window();
    std::vector<Publication> pubs{
        make_pub("p1", 1991, {"a"}), make_pub("q1", 1991, {"b"}),
        make_pub("q2", 1992, {"b"})};  // only b publishes in interval 2
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    const auto eta = compute_eta(slice_of(built.timelines, w), w);
    REQUIRE(eta.count(1, 2) == 2);
    REQUIRE_THAT(eta.value(1, 2), WithinAbs(0.5, 1e-15));
}

TEST_CASE("xi groups by the annual publication count") {
    const WindowSpec w = toy_window();
    // Researcher a: 2 publications in 1991 introducing 3 distinct coauthors.
    std::vector<Publication> pubs{make_pub("p1", 1991, {"a", "x", "y"}),
                                  make_pub("p2", 1991, {"a", "z"}),
                                  make_pub("p3", 1992, {"a"})};
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    TimelineMap only_a;
    only_a.emplace("a", built.timelines.at("a"));
    const auto xi = compute_xi(slice_of(only_a, w), w);
    REQUIRE(xi.defined(2, 1));
    REQUIRE(xi.value(2, 1) == 3.0);
    REQUIRE(xi.count(2, 1) == 1);
    // One publication and no new coauthors in interval 2.
    REQUIRE(xi.defined(1, 2));
    REQUIRE(xi.value(1, 2) == 0.0);
    // Zero publications in interval 3: member of no group.
    for (int m = 1; m <= w.zeta_rows; ++m) REQUIRE(xi.count(m, 3) == 0);
}

TEST_CASE("matrices equal a brute-force recomputation on a random corpus") {
    const WindowSpec w = toy_window();
    Rng rng(17);
    std::vector<Publication> pubs;
    for (int i = 0; i < 900; ++i) {
        Publication p;
        p.id = "p" + std::to_string(i);
        p.year = 1985 + static_cast<int>(rng.below(16));
        p.authors.push_back("r" + std::to_string(rng.below(150)));
        const std::string co = "r" + std::to_string(rng.below(150));
        if (co != p.authors[0]) p.authors.push_back(co);
        pubs.push_back(std::move(p));
    }
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    const auto training = slice_of(built.timelines, w);
    REQUIRE(training.members.size() <= 200);

    const auto eta = compute_eta(training, w);
    const auto expected_eta = oracles::brute_force_eta(training, w);
    for (int i = 1; i <= w.observed_rows; ++i)
        for (int j = 1; j <= w.observed_cols; ++j) {
            const auto it = expected_eta.find({i, j});
            if (it == expected_eta.end()) {
                REQUIRE_FALSE(eta.defined(i, j));
            } else {
                REQUIRE(eta.count(i, j) == it->second.second);
                REQUIRE(eta.value(i, j) == it->second.first);
            }
        }

    const auto xi = compute_xi(training, w);
    const auto expected_xi = oracles::brute_force_xi(training, w);
    for (int m = 1; m <= w.zeta_rows; ++m)
        for (int j = 1; j <= w.observed_cols; ++j) {
            const auto it = expected_xi.find({m, j});
            if (it == expected_xi.end()) {
                REQUIRE_FALSE(xi.defined(m, j));
            } else {
                REQUIRE(xi.count(m, j) == it->second.second);
                REQUIRE(xi.value(m, j) == it->second.first);
            }
        }

    SECTION("column counts partition the eligible researchers") {
        for (int j = 1; j <= w.observed_cols; ++j) {
            long in_groups = 0;
            for (int i = 1; i <= w.observed_rows; ++i) in_groups += eta.count(i, j);
            long eligible = 0;
            for (const auto& tl : training.members) {
                const int h = tl.cumulative_pubs(w.year(j - 1));
                if (h >= 1 && h <= w.observed_rows) ++eligible;
            }
            REQUIRE(in_groups == eligible);
        }
    }

    SECTION("permuting the publication list changes nothing") {
        std::vector<Publication> shuffled = pubs;
        Rng shuffle_rng(99);
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[shuffle_rng.below(i)]);
        const auto built2 =
            build_timelines(shuffled, w.corpus_start, w.corpus_end());
        const auto eta2 = compute_eta(slice_of(built2.timelines, w), w);
        for (int i = 1; i <= w.observed_rows; ++i)
            for (int j = 1; j <= w.observed_cols; ++j) {
                REQUIRE(eta2.count(i, j) == eta.count(i, j));
                if (eta.defined(i, j))
                    REQUIRE(eta2.value(i, j) == eta.value(i, j));
            }
    }
}

TEST_CASE("eta means recover a constant generative publication rate") {
    WindowSpec w = toy_window(8);
    GenerativeSpec spec;
    spec.window = w;
    spec.n_authors = 3000;
    spec.publication_rates = {1.5, 0.0, 0.0};
    spec.coauthor_rates = {1.0, 0.0, 0.0};
    spec.initial_pubs_max = 3;
    spec.seed = 505;
    const SyntheticCorpus corpus = generate(spec);
    const auto eta = compute_eta(slice_of(focal_timelines(corpus, w), w), w);
    int checked = 0;
    for (int i = 1; i <= w.observed_rows; ++i)
        for (int j = 1; j <= w.observed_cols; ++j) {
            if (eta.count(i, j) < 200) continue;
            const double se =
                std::sqrt(1.5 / static_cast<double>(eta.count(i, j)));
            REQUIRE_THAT(eta.value(i, j), WithinAbs(1.5, 3.0 * se));
            ++checked;
        }
    REQUIRE(checked >= 10);
}

TEST_CASE("xi means recover a linear generative coauthor rate") {
    WindowSpec w = toy_window(8);
    GenerativeSpec spec;
    spec.window = w;
    spec.n_authors = 4000;
    spec.publication_rates = {1.8, 0.0, 0.0};
    spec.coauthor_rates = {0.8, 0.0, 1.0};  // 0.8 * m
    spec.hp = {0.0, 1.0};
    spec.seed = 808;
    const SyntheticCorpus corpus = generate(spec);
    const auto xi = compute_xi(slice_of(focal_timelines(corpus, w), w), w);
    int checked = 0;
    for (int m = 1; m <= w.zeta_rows; ++m)
        for (int j = 1; j <= w.observed_cols; ++j) {
            if (xi.count(m, j) < 200) continue;
            const double mean = 0.8 * m;
            const double se =
                std::sqrt(mean / static_cast<double>(xi.count(m, j)));
            REQUIRE_THAT(xi.value(m, j), WithinAbs(mean, 3.0 * se));
            ++checked;
        }
    REQUIRE(checked >= 8);
}
