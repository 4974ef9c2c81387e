#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cofo/publication.hpp"
#include "cofo/rng.hpp"
#include "cofo/timeline.hpp"
#include "oracles.hpp"

using namespace cofo;

TEST_CASE("parse_jsonl maps fields and preserves order") {
    std::istringstream in(
        R"({"id":"p1","year":1994,"authors":["a","b"]})"
        "\n"
        R"({"id":"p2","year":1995,"authors":["a"],"venue":"J"})"
        "\n");
    const auto result = parse_jsonl(in);
    REQUIRE(result.publications.size() == 2);
    REQUIRE(result.diagnostics.empty());
    REQUIRE(result.publications[0].id == "p1");
    REQUIRE(result.publications[0].year == 1994);
    REQUIRE(result.publications[0].authors == std::vector<std::string>{"a", "b"});
    REQUIRE_FALSE(result.publications[0].venue.has_value());
    REQUIRE(result.publications[1].venue == "J");
}

TEST_CASE("parse_jsonl rejects bad records with line numbers") {
    std::istringstream in(
        R"({"id":"p1","year":1994,"authors":["a","b"]})"
        "\n"
        "{not json}\n"
        R"({"id":"p2","year":2000,"authors":[]})"
        "\n"
        R"({"id":"p3","year":2001,"authors":["x","x"]})"
        "\n"
        R"({"id":"p4","year":2002,"authors":["y"]})"
        "\n");
    const auto result = parse_jsonl(in, true);
    REQUIRE(result.publications.size() == 2);
    REQUIRE(result.diagnostics.size() == 3);
    REQUIRE(result.diagnostics[0].location == 2);
    REQUIRE(result.diagnostics[1].location == 3);
    REQUIRE(result.diagnostics[1].message == "empty author list");
    REQUIRE(result.diagnostics[2].message.find("duplicate author") != std::string::npos);

    SECTION("strict mode throws on the first problem") {
        std::istringstream again(
            R"({"id":"p1","year":1994,"authors":["a"]})"
            "\n{not json}\n");
        REQUIRE_THROWS_AS(parse_jsonl(again, false), ParseError);
    }
}

TEST_CASE("a 3-line file with one malformed line yields 2 records") {
    std::istringstream in(
        R"({"id":"a","year":1990,"authors":["u"]})"
        "\ngarbage\n"
        R"({"id":"b","year":1991,"authors":["v"]})"
        "\n");
    const auto result = parse_jsonl(in, true);
    REQUIRE(result.publications.size() == 2);
    REQUIRE(result.diagnostics.size() == 1);
}

TEST_CASE("jsonl round-trips bit-exactly in canonical field order") {
    Rng rng(3);
    std::vector<Publication> pubs;
    for (int i = 0; i < 50; ++i) {
        Publication p;
        p.id = "p" + std::to_string(i);
        p.year = 1980 + static_cast<int>(rng.below(30));
        const int n = 1 + static_cast<int>(rng.below(4));
        for (int a = 0; a < n; ++a)
            p.authors.push_back("author_" + std::to_string(rng.below(40)) + "_" +
                                std::to_string(a));
        if (rng.below(2)) p.venue = "venue \"special\", vol. " + std::to_string(i);
        pubs.push_back(std::move(p));
    }
    std::ostringstream first;
    serialize_jsonl(pubs, first);
    std::istringstream back(first.str());
    const auto parsed = parse_jsonl(back, false);
    REQUIRE(parsed.publications.size() == pubs.size());
    std::ostringstream second;
    serialize_jsonl(parsed.publications, second);
    REQUIRE(first.str() == second.str());
}

TEST_CASE("parse_dblp_xml handles the simplified subset") {
    std::istringstream in(
        "<?xml version=\"1.0\"?>\n<dblp>\n"
        "<article key=\"x\"><author>A. B.</author><author>C. D.</author>"
        "<year>1999</year></article>\n"
        "<inproceedings key=\"y\"><author>E &amp; F</author><year>2001</year>"
        "<title>On &lt;graphs&gt;</title></inproceedings>\n"
        "<www key=\"w\"><author>Ghost</author></www>\n"
        "<article key=\"noyear\"><author>Z</author></article>\n"
        "</dblp>\n");
    const auto result = parse_dblp_xml(in);
    REQUIRE(result.publications.size() == 2);
    REQUIRE(result.publications[0].id == "x");
    REQUIRE(result.publications[0].year == 1999);
    REQUIRE(result.publications[0].authors ==
            std::vector<std::string>{"A. B.", "C. D."});
    REQUIRE(result.publications[1].authors == std::vector<std::string>{"E & F"});
    REQUIRE(result.diagnostics.size() == 1);  // the year-less article
    REQUIRE(result.diagnostics[0].message.find("year") != std::string::npos);
}

TEST_CASE("five articles and a www element yield five publications") {
    std::ostringstream doc;
    doc << "<dblp>";
    for (int i = 0; i < 5; ++i)
        doc << "<article key=\"k" << i << "\"><author>A" << i
            << "</author><year>200" << i << "</year></article>";
    doc << "<www key=\"h\"><author>Homepage Owner</author><year>2000</year></www>";
    doc << "</dblp>";
    std::istringstream in(doc.str());
    REQUIRE(parse_dblp_xml(in).publications.size() == 5);
}

TEST_CASE("xml entities are decoded, including numeric ones") {
    std::istringstream in(
        "<dblp><article key=\"k\"><author>M&#252;ller</author>"
        "<author>&quot;Q&quot;</author><year>2005</year></article></dblp>");
    const auto result = parse_dblp_xml(in);
    REQUIRE(result.publications.size() == 1);
    REQUIRE(result.publications[0].authors[0] == "M\xC3\xBCller");
    REQUIRE(result.publications[0].authors[1] == "\"Q\"");
}

TEST_CASE("invalid xml is fatal with a byte offset") {
    std::istringstream in("<dblp><article key=\"k\"><author>A</author>");
    try {
        parse_dblp_xml(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("byte") != std::string::npos);
    }
    std::istringstream mismatched(
        "<dblp><article key=\"k\"><year>2000</wrong></article></dblp>");
    REQUIRE_THROWS_AS(parse_dblp_xml(mismatched), ParseError);
}

TEST_CASE("filter_publications keeps the boundary and preserves order") {
    std::vector<Publication> pubs;
    for (int n : {81, 80, 1, 79}) {
        Publication p;
        p.id = "n" + std::to_string(n);
        p.year = 2000;
        for (int a = 0; a < n; ++a) p.authors.push_back("a" + std::to_string(a));
        pubs.push_back(std::move(p));
    }
    const auto kept = filter_publications(pubs, 80);
    REQUIRE(kept.size() == 3);
    REQUIRE(kept[0].id == "n80");
    REQUIRE(kept[1].id == "n1");
    REQUIRE(kept[2].id == "n79");

    const auto all = filter_publications(std::vector<Publication>(10, pubs[2]), 80);
    REQUIRE(all.size() == 10);
}

namespace {
Publication make_pub(const std::string& id, int year,
                     std::vector<std::string> authors) {
    Publication p;
    p.id = id;
    p.year = year;
    p.authors = std::move(authors);
    return p;
}
}  // namespace

TEST_CASE("build_timelines counts a coauthor once, at first co-occurrence") {
    std::vector<Publication> pubs{
        make_pub("p1", 1994, {"a", "b"}),
        make_pub("p2", 1995, {"a", "b", "c"}),
    };
    const auto built = build_timelines(pubs, 1990, 2000);
    const AuthorTimeline& a = built.timelines.at("a");
    REQUIRE(a.new_coauthors_in_year(1994) == 1);
    REQUIRE(a.new_coauthors_in_year(1995) == 1);
    REQUIRE(a.cumulative_coauthors(1995) == 2);
    REQUIRE(a.pubs_in_year(1994) == 1);
    REQUIRE(a.cumulative_pubs(1995) == 2);
    REQUIRE(a.first_year() == 1994);
}

TEST_CASE("solo publications give zero coauthors") {
    std::vector<Publication> pubs{make_pub("p1", 1994, {"solo"}),
                                  make_pub("p2", 1996, {"solo"})};
    const auto built = build_timelines(pubs, 1990, 2000);
    const AuthorTimeline& tl = built.timelines.at("solo");
    REQUIRE(tl.total_coauthors() == 0);
    REQUIRE(tl.total_pubs() == 2);
}

TEST_CASE("publications outside the window are excluded and counted") {
    std::vector<Publication> pubs{make_pub("in", 1995, {"a"}),
                                  make_pub("out", 1980, {"a"})};
    const auto built = build_timelines(pubs, 1990, 2000);
    REQUIRE(built.outside_window == 1);
    REQUIRE(built.timelines.at("a").total_pubs() == 1);
}

TEST_CASE("randomized corpus: coauthor totals equal the set-union oracle") {
    Rng rng(41);
    std::vector<Publication> pubs;
    for (int i = 0; i < 50; ++i) {
        Publication p;
        p.id = "p" + std::to_string(i);
        p.year = 1990 + static_cast<int>(rng.below(10));
        std::vector<std::string> pool;
        const int n = 1 + static_cast<int>(rng.below(5));
        while (static_cast<int>(p.authors.size()) < n) {
            const std::string candidate = "r" + std::to_string(rng.below(12));
            bool dup = false;
            for (const auto& existing : p.authors) dup |= existing == candidate;
            if (!dup) p.authors.push_back(candidate);
        }
        pubs.push_back(std::move(p));
    }
    const auto built = build_timelines(pubs, 1990, 2000);
    for (const auto& [author, tl] : built.timelines) {
        REQUIRE(static_cast<std::size_t>(tl.total_coauthors()) ==
                oracles::distinct_coauthors(pubs, author));
        // Cumulative series are non-decreasing by construction of prefix sums;
        // verify via year scan.
        int prev_h = 0, prev_k = 0;
        for (int y = 1990; y <= 2000; ++y) {
            REQUIRE(tl.cumulative_pubs(y) >= prev_h);
            REQUIRE(tl.cumulative_coauthors(y) >= prev_k);
            prev_h = tl.cumulative_pubs(y);
            prev_k = tl.cumulative_coauthors(y);
        }
    }

    SECTION("per-year publication counts add up over authors") {
        for (int y = 1990; y <= 2000; ++y) {
            long by_timelines = 0;
            for (const auto& [author, tl] : built.timelines)
                by_timelines += tl.pubs_in_year(y);
            long by_pubs = 0;
            for (const auto& p : pubs)
                if (p.year == y) by_pubs += static_cast<long>(p.authors.size());
            REQUIRE(by_timelines == by_pubs);
        }
    }
}

namespace {
WindowSpec small_window() {
    WindowSpec w = WindowSpec::yearly(1980, 1990, 2010);
    w.lambda_rows = 30;
    w.observed_rows = 10;
    w.observed_cols = 12;  // cutpoint year 2002
    w.zeta_rows = 4;
    w.test_history_cap = 8;
    w.validation_anchor = 12;
    w.validation_end = 16;
    w.test_anchor = 12;
    w.eval_start = 13;
    w.eval_end = 20;
    return w;
}
}  // namespace

TEST_CASE("slice membership matches a brute-force predicate") {
    Rng rng(10);
    std::vector<Publication> pubs;
    for (int i = 0; i < 400; ++i) {
        Publication p;
        p.id = "p" + std::to_string(i);
        p.year = 1980 + static_cast<int>(rng.below(31));
        p.authors.push_back("w" + std::to_string(rng.below(60)));
        const std::string co = "w" + std::to_string(rng.below(60));
        if (co != p.authors[0]) p.authors.push_back(co);
        pubs.push_back(std::move(p));
    }
    const WindowSpec w = small_window();
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());

    const auto training = slice_dataset(built.timelines, w, SliceRole::Training);
    const auto validation = slice_dataset(built.timelines, w, SliceRole::Validation);
    const auto test = slice_dataset(built.timelines, w, SliceRole::Test);

    auto member_of = [](const DatasetSlice& slice, const std::string& author) {
        for (const auto& tl : slice.members)
            if (tl.author() == author) return true;
        return false;
    };

    for (const auto& [author, tl] : built.timelines) {
        // Training: at least one publication in [corpus_start, year(L-1)].
        bool expect = false;
        for (int y = w.corpus_start; y <= w.year(w.observed_cols - 1); ++y)
            expect |= tl.pubs_in_year(y) > 0;
        REQUIRE(member_of(training, author) == expect);

        // Validation: active in (year(U-1), year(U)].
        expect = tl.pubs_in_year(w.year(w.validation_anchor)) > 0;
        REQUIRE(member_of(validation, author) == expect);

        // Test: anchored, bounded history, bounded annual output.
        bool anchored = tl.pubs_in_year(w.year(w.test_anchor)) > 0;
        int history = 0;
        for (int y = w.corpus_start; y <= w.year(w.test_anchor); ++y)
            history += tl.pubs_in_year(y);
        bool capped = history <= w.test_history_cap;
        for (int y = w.year(w.test_anchor); y <= w.year(w.eval_end); ++y)
            capped &= tl.pubs_in_year(y) <= w.zeta_rows;
        REQUIRE(member_of(test, author) == (anchored && capped));
    }
    REQUIRE(test.coverage <= 1.0);
    REQUIRE(test.coverage > 0.0);
}

TEST_CASE("a researcher over the history cap is excluded from the test slice") {
    const WindowSpec w = small_window();
    std::vector<Publication> pubs;
    // Nine historical publications (cap is 8), one in the anchor year.
    for (int i = 0; i < 8; ++i)
        pubs.push_back(make_pub("h" + std::to_string(i), 1991 + i, {"busy"}));
    pubs.push_back(make_pub("anchor", w.year(w.test_anchor), {"busy"}));
    // A modest researcher who qualifies.
    pubs.push_back(make_pub("ok", w.year(w.test_anchor), {"calm"}));
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    const auto test = slice_dataset(built.timelines, w, SliceRole::Test);
    REQUIRE(test.members.size() == 1);
    REQUIRE(test.members[0].author() == "calm");
    REQUIRE(test.anchor_population == 2);
    REQUIRE(test.coverage == 0.5);
}

TEST_CASE("an empty slice is a configuration error naming the role") {
    const WindowSpec w = small_window();
    std::vector<Publication> pubs{make_pub("p", 1981, {"early"})};
    const auto built = build_timelines(pubs, w.corpus_start, w.corpus_end());
    try {
        slice_dataset(built.timelines, w, SliceRole::Validation);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("validation") != std::string::npos);
    }
}
