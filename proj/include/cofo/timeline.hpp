#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/publication.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Per-researcher yearly publication counts and new-coauthor counts, with
/// cumulative lookups. A coauthor is "new" in the year of the first joint
/// publication within the corpus window and is never re-counted. Immutable
/// after construction.
class AuthorTimeline {
public:
    AuthorTimeline() = default;
    AuthorTimeline(std::string author, const std::map<int, int>& pubs_by_year,
                   const std::map<int, int>& new_coauthors_by_year)
        : author_(std::move(author)) {
        pubs_.assign(pubs_by_year.begin(), pubs_by_year.end());
        coauthors_.assign(new_coauthors_by_year.begin(), new_coauthors_by_year.end());
        cum_pubs_.resize(pubs_.size());
        int total = 0;
        for (std::size_t i = 0; i < pubs_.size(); ++i)
            cum_pubs_[i] = (total += pubs_[i].second);
        cum_coauthors_.resize(coauthors_.size());
        total = 0;
        for (std::size_t i = 0; i < coauthors_.size(); ++i)
            cum_coauthors_[i] = (total += coauthors_[i].second);
    }

    const std::string& author() const { return author_; }

    int first_year() const { return pubs_.empty() ? 0 : pubs_.front().first; }
    int last_year() const { return pubs_.empty() ? 0 : pubs_.back().first; }

    int pubs_in_year(int year) const { return count_at(pubs_, year); }
    int new_coauthors_in_year(int year) const { return count_at(coauthors_, year); }

    /// Cumulative publications through `year` inclusive.
    int cumulative_pubs(int year) const { return cum_at(pubs_, cum_pubs_, year); }

    /// Cumulative distinct coauthors through `year` inclusive.
    int cumulative_coauthors(int year) const {
        return cum_at(coauthors_, cum_coauthors_, year);
    }

    int pubs_in_range(int from_year, int to_year) const {
        return cumulative_pubs(to_year) -
               (from_year > std::numeric_limits<int>::min()
                    ? cumulative_pubs(from_year - 1)
                    : 0);
    }

    bool has_pub_in_range(int from_year, int to_year) const {
        return pubs_in_range(from_year, to_year) > 0;
    }

    int total_pubs() const { return cum_pubs_.empty() ? 0 : cum_pubs_.back(); }
    int total_coauthors() const {
        return cum_coauthors_.empty() ? 0 : cum_coauthors_.back();
    }

    const std::vector<std::pair<int, int>>& pubs_by_year() const { return pubs_; }
    const std::vector<std::pair<int, int>>& new_coauthors_by_year() const {
        return coauthors_;
    }

private:
    static int count_at(const std::vector<std::pair<int, int>>& v, int year) {
        auto it = std::lower_bound(
            v.begin(), v.end(), year,
            [](const std::pair<int, int>& e, int y) { return e.first < y; });
        return it != v.end() && it->first == year ? it->second : 0;
    }

    static int cum_at(const std::vector<std::pair<int, int>>& v,
                      const std::vector<int>& cum, int year) {
        auto it = std::upper_bound(
            v.begin(), v.end(), year,
            [](int y, const std::pair<int, int>& e) { return y < e.first; });
        return it == v.begin() ? 0 : cum[static_cast<std::size_t>(it - v.begin()) - 1];
    }

    std::string author_;
    std::vector<std::pair<int, int>> pubs_;       // (year, count), year ascending
    std::vector<std::pair<int, int>> coauthors_;  // (year, new distinct coauthors)
    std::vector<int> cum_pubs_;
    std::vector<int> cum_coauthors_;
};

using TimelineMap = std::map<std::string, AuthorTimeline>;

struct TimelineBuildResult {
    TimelineMap timelines;
    long outside_window = 0;  // publications excluded by the year window
};

/// Build per-author timelines from publications inside [year_min, year_max].
inline TimelineBuildResult build_timelines(std::span<const Publication> pubs,
                                           int year_min, int year_max) {
    if (year_min > year_max)
        throw InvalidArgument("build_timelines: empty year window");
    TimelineBuildResult result;

    std::unordered_map<std::string_view, std::vector<std::size_t>> by_author;
    for (std::size_t p = 0; p < pubs.size(); ++p) {
        if (pubs[p].year < year_min || pubs[p].year > year_max) {
            ++result.outside_window;
            continue;
        }
        for (const auto& a : pubs[p].authors) by_author[a].push_back(p);
    }

    for (auto& [author, indices] : by_author) {
        // Ascending year; input order breaks ties so rebuilds are stable.
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            return pubs[a].year != pubs[b].year ? pubs[a].year < pubs[b].year : a < b;
        });
        std::map<int, int> pubs_by_year;
        std::map<int, int> new_by_year;
        std::unordered_set<std::string_view> seen;
        for (std::size_t idx : indices) {
            const Publication& pub = pubs[idx];
            ++pubs_by_year[pub.year];
            for (const auto& co : pub.authors) {
                if (co == author) continue;
                if (seen.insert(co).second) ++new_by_year[pub.year];
            }
        }
        result.timelines.emplace(
            std::string(author),
            AuthorTimeline(std::string(author), pubs_by_year, new_by_year));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Dataset slices

enum class SliceRole { Training, Validation, Test };

inline std::string to_string(SliceRole role) {
    switch (role) {
        case SliceRole::Training: return "training";
        case SliceRole::Validation: return "validation";
        case SliceRole::Test: return "test";
    }
    return "?";
}

/// Timelines restricted to one role's eligibility rule, sorted by author id.
struct DatasetSlice {
    SliceRole role = SliceRole::Training;
    std::vector<AuthorTimeline> members;
    long anchor_population = 0;  // researchers active in the anchor interval
    double coverage = 1.0;       // members / anchor_population
};

namespace detail {

inline bool test_eligible(const AuthorTimeline& tl, const WindowSpec& w) {
    const int anchor_from = w.year(w.test_anchor);
    const int anchor_to = w.year(w.test_anchor + 1) - 1;
    if (!tl.has_pub_in_range(anchor_from, anchor_to)) return false;
    if (tl.cumulative_pubs(w.year(w.test_anchor)) > w.test_history_cap) return false;
    for (int y = w.year(w.test_anchor); y <= w.year(w.eval_end); ++y)
        if (tl.pubs_in_year(y) > w.zeta_rows) return false;
    return true;
}

}  // namespace detail

/// Select the researchers eligible for a role. Training: active in
/// [corpus_start, cutpoint(observed_cols - 1)]. Validation: active in
/// (cutpoint(anchor-1), cutpoint(anchor)]. Test: active in
/// [cutpoint(anchor), cutpoint(anchor+1)), bounded history, and bounded
/// annual output across the forecast span.
inline DatasetSlice slice_dataset(const TimelineMap& timelines,
                                  const WindowSpec& window, SliceRole role) {
    window.validate();
    DatasetSlice slice;
    slice.role = role;
    for (const auto& [author, tl] : timelines) {
        bool anchored = false;
        bool eligible = false;
        switch (role) {
            case SliceRole::Training:
                anchored = tl.has_pub_in_range(window.corpus_start,
                                               window.year(window.observed_cols - 1));
                eligible = anchored;
                break;
            case SliceRole::Validation:
                anchored = tl.has_pub_in_range(
                    window.year(window.validation_anchor - 1) + 1,
                    window.year(window.validation_anchor));
                eligible = anchored;
                break;
            case SliceRole::Test:
                anchored = tl.has_pub_in_range(window.year(window.test_anchor),
                                               window.year(window.test_anchor + 1) - 1);
                eligible = anchored && detail::test_eligible(tl, window);
                break;
        }
        if (anchored) ++slice.anchor_population;
        if (eligible) slice.members.push_back(tl);
    }
    if (slice.members.empty())
        throw ConfigError("slice_dataset: empty " + to_string(role) + " slice");
    slice.coverage = slice.anchor_population > 0
                         ? static_cast<double>(slice.members.size()) /
                               static_cast<double>(slice.anchor_population)
                         : 1.0;
    return slice;
}

}  // namespace cofo
