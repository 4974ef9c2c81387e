#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cofo/common.hpp"

namespace cofo {

/// One bibliographic record: the ingestion atom.
struct Publication {
    std::string id;
    int year = 0;
    std::vector<std::string> authors;
    std::optional<std::string> venue;
};

/// A recoverable problem with one input record.
struct Diagnostic {
    long location = 0;  // 1-based line number (JSONL) or byte offset (XML)
    std::string message;
};

struct ParseResult {
    std::vector<Publication> publications;
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::optional<std::string> validate_authors(
    const std::vector<std::string>& authors) {
    if (authors.empty()) return "empty author list";
    std::unordered_set<std::string_view> seen;
    for (const auto& a : authors) {
        if (a.empty()) return "empty author identifier";
        if (!seen.insert(a).second) return "duplicate author '" + a + "'";
    }
    return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical JSONL format: one object per line with fields id, year, authors
// and optional venue, UTF-8.

/// Parse JSONL records. In lenient mode bad lines become diagnostics; in
/// strict mode the first bad line throws ParseError.
inline ParseResult parse_jsonl(std::istream& in, bool lenient = true) {
    ParseResult result;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;  // artifact metadata header
        std::string problem;
        try {
            const nlohmann::json obj = nlohmann::json::parse(line);
            if (!obj.is_object()) {
                problem = "not a JSON object";
            } else if (!obj.contains("id") || !obj["id"].is_string()) {
                problem = "missing required field 'id'";
            } else if (!obj.contains("year") || !obj["year"].is_number_integer()) {
                problem = "missing required field 'year'";
            } else if (!obj.contains("authors") || !obj["authors"].is_array()) {
                problem = "missing required field 'authors'";
            } else {
                Publication pub;
                pub.id = obj["id"].get<std::string>();
                pub.year = obj["year"].get<int>();
                for (const auto& a : obj["authors"]) {
                    if (!a.is_string()) {
                        problem = "non-string author entry";
                        break;
                    }
                    pub.authors.push_back(a.get<std::string>());
                }
                if (problem.empty()) {
                    if (auto bad = detail::validate_authors(pub.authors))
                        problem = *bad;
                }
                if (problem.empty() && obj.contains("venue")) {
                    if (obj["venue"].is_string())
                        pub.venue = obj["venue"].get<std::string>();
                    else if (!obj["venue"].is_null())
                        problem = "non-string venue";
                }
                if (problem.empty()) {
                    result.publications.push_back(std::move(pub));
                    continue;
                }
            }
        } catch (const nlohmann::json::exception& e) {
            problem = std::string("malformed JSON: ") + e.what();
        }
        if (!lenient)
            throw ParseError("line " + std::to_string(line_no) + ": " + problem);
        result.diagnostics.push_back({line_no, problem});
    }
    return result;
}

/// Serialize in the canonical field order; parse(serialize(x)) is the identity
/// and re-serialization is byte-identical.
inline void serialize_jsonl(std::span<const Publication> pubs, std::ostream& out) {
    for (const auto& pub : pubs) {
        nlohmann::ordered_json obj;
        obj["id"] = pub.id;
        obj["year"] = pub.year;
        obj["authors"] = pub.authors;
        if (pub.venue) obj["venue"] = *pub.venue;
        out << obj.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Simplified dblp-style XML: `article` and `inproceedings` elements with
// repeated `author` children, a `year` child, and a `key` attribute.

namespace detail {

class XmlScanner {
public:
    explicit XmlScanner(std::istream& in) : in_(in) {}

    long offset() const { return offset_; }

    int get() {
        const int c = in_.get();
        if (c != std::char_traits<char>::eof()) ++offset_;
        return c;
    }

    int peek() { return in_.peek(); }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("invalid XML at byte " + std::to_string(offset_) + ": " + what);
    }

private:
    std::istream& in_;
    long offset_ = 0;
};

inline std::string decode_xml_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        const std::size_t end = text.find(';', i);
        if (end == std::string::npos || end - i > 12) {
            out.push_back(text[i++]);
            continue;
        }
        const std::string entity = text.substr(i + 1, end - i - 1);
        if (entity == "amp") out.push_back('&');
        else if (entity == "lt") out.push_back('<');
        else if (entity == "gt") out.push_back('>');
        else if (entity == "quot") out.push_back('"');
        else if (entity == "apos") out.push_back('\'');
        else if (!entity.empty() && entity[0] == '#') {
            long code = 0;
            try {
                code = entity[1] == 'x' || entity[1] == 'X'
                           ? std::stol(entity.substr(2), nullptr, 16)
                           : std::stol(entity.substr(1));
            } catch (...) {
                code = -1;
            }
            if (code > 0 && code < 128) {
                out.push_back(static_cast<char>(code));
            } else if (code >= 128) {
                // UTF-8 encode the code point.
                char32_t cp = static_cast<char32_t>(code);
                if (cp < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else if (cp < 0x10000) {
                    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                }
            } else {
                out.append(text, i, end - i + 1);  // keep unknown reference
            }
        } else {
            out.append(text, i, end - i + 1);
        }
        i = end + 1;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Streaming parse of the simplified dblp XML subset. Unrecognized elements
/// (www, proceedings, ...) are skipped silently, including their children.
/// Structural XML errors are fatal and carry the byte offset.
inline ParseResult parse_dblp_xml(std::istream& in, bool lenient = true) {
    ParseResult result;
    detail::XmlScanner scan(in);
    std::vector<std::string> stack;

    // Active record while the top of the stack is a recognized element.
    bool in_record = false;
    long record_offset = 0;
    std::size_t record_depth = 0;
    Publication record;
    bool record_has_year = false;
    std::string text;  // text of the current capturing child (author/year)

    auto is_record_tag = [](const std::string& tag) {
        return tag == "article" || tag == "inproceedings";
    };

    auto close_record = [&]() {
        std::string problem;
        if (!record_has_year)
            problem = "element missing <year>";
        else if (record.id.empty())
            problem = "element missing key attribute";
        else if (auto bad = detail::validate_authors(record.authors))
            problem = *bad;
        if (problem.empty()) {
            result.publications.push_back(std::move(record));
        } else if (lenient) {
            result.diagnostics.push_back({record_offset, problem});
        } else {
            throw ParseError("record at byte " + std::to_string(record_offset) +
                             ": " + problem);
        }
        record = Publication{};
        record_has_year = false;
        in_record = false;
    };

    for (;;) {
        int c = scan.get();
        if (c == std::char_traits<char>::eof()) break;
        if (c != '<') {
            // Text of a direct child of the record element (author, year, ...).
            if (in_record && stack.size() == record_depth + 2)
                text.push_back(static_cast<char>(c));
            continue;
        }
        // Tag, comment, declaration, or processing instruction.
        c = scan.get();
        if (c == std::char_traits<char>::eof()) scan.fail("truncated tag");
        if (c == '?' || c == '!') {
            // <?...?>, <!DOCTYPE ...>, <!--...-->: skip to the closing '>'.
            const bool comment = c == '!' && scan.peek() == '-';
            int prev1 = 0, prev2 = 0;
            for (;;) {
                const int d = scan.get();
                if (d == std::char_traits<char>::eof())
                    scan.fail("unterminated declaration");
                if (d == '>' && (!comment || (prev1 == '-' && prev2 == '-'))) break;
                prev2 = prev1;
                prev1 = d;
            }
            continue;
        }
        const bool closing = c == '/';
        std::string raw;
        if (!closing) raw.push_back(static_cast<char>(c));
        bool self_closing = false;
        for (;;) {
            const int d = scan.get();
            if (d == std::char_traits<char>::eof()) scan.fail("unterminated tag");
            if (d == '>') break;
            raw.push_back(static_cast<char>(d));
        }
        if (!raw.empty() && raw.back() == '/') {
            self_closing = true;
            raw.pop_back();
        }
        // Split the element name from its attributes.
        const std::size_t name_end = raw.find_first_of(" \t\r\n");
        const std::string name = raw.substr(0, name_end);
        if (name.empty()) scan.fail("empty element name");

        if (closing) {
            if (stack.empty() || stack.back() != name)
                scan.fail("mismatched </" + name + ">");
            if (in_record && stack.size() == record_depth + 2) {
                // A capturing child of the record just closed.
                const std::string value = detail::trim(detail::decode_xml_entities(text));
                if (name == "author") {
                    record.authors.push_back(value);
                } else if (name == "year") {
                    try {
                        record.year = std::stoi(value);
                        record_has_year = true;
                    } catch (...) {
                        // Unparseable year: the record is reported when closed.
                    }
                }
            }
            stack.pop_back();
            if (in_record && stack.size() == record_depth) close_record();
            text.clear();
            continue;
        }

        if (!in_record && is_record_tag(name)) {
            in_record = true;
            record_depth = stack.size();
            record_offset = scan.offset();
            record = Publication{};
            record_has_year = false;
            // Pull the key attribute if present.
            const std::size_t kpos = raw.find("key=");
            if (kpos != std::string::npos && kpos + 5 < raw.size()) {
                const char quote = raw[kpos + 4];
                const std::size_t kend = raw.find(quote, kpos + 5);
                if (kend != std::string::npos)
                    record.id = detail::decode_xml_entities(
                        raw.substr(kpos + 5, kend - kpos - 5));
            }
            if (self_closing) {
                stack.push_back(name);
                stack.pop_back();
                close_record();
                continue;
            }
        }
        if (!self_closing) stack.push_back(name);
        text.clear();
    }
    if (!stack.empty()) scan.fail("unclosed <" + stack.back() + ">");
    return result;
}

// ---------------------------------------------------------------------------

/// Keep only publications with at most max_authors authors, order preserved.
inline std::vector<Publication> filter_publications(
    std::span<const Publication> pubs, int max_authors = 80) {
    if (max_authors < 1)
        throw InvalidArgument("filter_publications: max_authors must be >= 1");
    std::vector<Publication> kept;
    kept.reserve(pubs.size());
    for (const auto& pub : pubs)
        if (static_cast<int>(pub.authors.size()) <= max_authors)
            kept.push_back(pub);
    return kept;
}

}  // namespace cofo
