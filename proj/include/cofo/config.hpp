#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/evaluate.hpp"
#include "cofo/hyperopt.hpp"
#include "cofo/predict.hpp"
#include "cofo/stats.hpp"
#include "cofo/synthetic.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Flat key-value configuration with INI-style sections. Keys are addressed
/// as "section.key". Unknown keys are rejected up front so typos fail fast.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file " + path.string());
        return parse_stream(in);
    }

    static ConfigFile parse_stream(std::istream& in) {
        ConfigFile config;
        std::string line, section;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            std::string body = line.substr(first, last - first + 1);
            if (body[0] == '#' || body[0] == ';') continue;
            if (body.front() == '[' && body.back() == ']') {
                section = body.substr(1, body.size() - 2);
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key=value");
            std::string key = body.substr(0, eq);
            std::string value = body.substr(eq + 1);
            auto strip = [](std::string& s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t");
                s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            strip(key);
            strip(value);
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": empty key");
            config.values_[section.empty() ? key : section + "." + key] = value;
        }
        return config;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stol(it->second);
        } catch (...) {
            throw ConfigError("config key '" + key + "': bad integer '" +
                              it->second + "'");
        }
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw ConfigError("config key '" + key + "': bad number '" +
                              it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes")
            return true;
        if (it->second == "false" || it->second == "0" || it->second == "no")
            return false;
        throw ConfigError("config key '" + key + "': bad boolean '" + it->second +
                          "'");
    }

    void set(const std::string& key, const std::string& value) {
        values_[key] = value;
    }

    /// Canonical serialization: sorted key=value lines. Hashing this makes the
    /// fingerprint independent of comments and ordering.
    std::string canonical() const {
        std::ostringstream os;
        for (const auto& [key, value] : values_) os << key << '=' << value << '\n';
        return os.str();
    }

    std::uint64_t hash() const { return fnv1a64(canonical()); }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

enum class InputFormat { Jsonl, DblpXml };

/// Fully resolved pipeline settings, typed and validated.
struct PipelineConfig {
    std::filesystem::path input_path;
    InputFormat format = InputFormat::Jsonl;
    int max_authors = 80;
    bool strict_parse = false;
    std::optional<std::filesystem::path> authors_file;  // slice allowlist

    WindowSpec window;
    TrainOptions train;

    GaConfig ga;         // seed filled from the master seed at run time
    int replicates = 100;

    // Evaluation knobs
    int ks_bootstrap = 1000;
    long scan_min_group = 20;
    int scan_max_annual_pubs = 20;
    bool run_scan = true;
    DistributionMode distribution_mode = DistributionMode::SingleReplicate;
    int max_lag = 6;
    int auc_history_cap = 50;
    PmfForm pmf_form = PmfForm::Standard;

    GenerativeSpec synth;
    bool synth_configured = false;

    std::filesystem::path output_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = 0;  // 0 = hardware default

    std::uint64_t config_hash = 0;

    std::uint64_t require_seed(const std::string& stage) const {
        if (!seed)
            throw ConfigError("stage '" + stage +
                              "' is stochastic: set run.seed or pass --seed");
        return *seed;
    }

    ArtifactMeta meta() const { return {config_hash, seed.value_or(0)}; }

    static PipelineConfig from_file(const std::filesystem::path& path) {
        return from_config(ConfigFile::parse_file(path));
    }

    static PipelineConfig from_config(const ConfigFile& c) {
        PipelineConfig out;
        out.config_hash = c.hash();

        if (c.has("input.path")) out.input_path = c.require_string("input.path");
        const std::string format = c.get_string("input.format", "jsonl");
        if (format == "jsonl") out.format = InputFormat::Jsonl;
        else if (format == "xml") out.format = InputFormat::DblpXml;
        else throw ConfigError("input.format must be jsonl or xml");
        out.max_authors = static_cast<int>(c.get_int("input.max_authors", 80));
        out.strict_parse = c.get_bool("input.strict", false);
        if (c.has("input.authors_file"))
            out.authors_file = c.require_string("input.authors_file");

        // Window: year-valued keys, consecutive-year cutpoints.
        WindowSpec w = WindowSpec::yearly(
            static_cast<int>(c.get_int("window.corpus_start", 1951)),
            static_cast<int>(c.get_int("window.fit_start", 1985)),
            static_cast<int>(c.get_int("window.corpus_end", 2018)));
        w.lambda_rows = static_cast<int>(c.get_int("window.lambda_rows", 180));
        w.observed_rows = static_cast<int>(c.get_int("window.observed_rows", 42));
        w.observed_cols = static_cast<int>(
            c.get_int("window.observed_intervals",
                      c.get_int("window.observed_end_year", 2009) - w.fit_start()));
        w.zeta_rows = static_cast<int>(c.get_int("window.zeta_rows", 12));
        w.test_history_cap =
            static_cast<int>(c.get_int("window.test_history_cap", 40));
        w.validation_anchor = w.index_of_year(
            static_cast<int>(c.get_int("window.validation_anchor_year", 2000)));
        w.validation_end = w.index_of_year(
            static_cast<int>(c.get_int("window.validation_end_year", 2009)));
        w.test_anchor = w.index_of_year(
            static_cast<int>(c.get_int("window.test_anchor_year", 2000)));
        w.eval_start = w.index_of_year(
            static_cast<int>(c.get_int("window.eval_start_year", 2010)));
        w.eval_end = w.index_of_year(
            static_cast<int>(c.get_int("window.eval_end_year", 2018)));
        w.validate();
        out.window = w;

        const std::string method = c.get_string("fits.method", "ols");
        if (method == "ols") out.train.method = stats::FitMethod::OlsOnLogs;
        else if (method == "irls") out.train.method = stats::FitMethod::PoissonIrls;
        else throw ConfigError("fits.method must be ols or irls");
        out.train.lenient_rows = c.get_bool("fits.lenient_rows", false);

        out.ga.population = static_cast<int>(c.get_int("ga.population", 400));
        out.ga.crossovers = static_cast<int>(c.get_int(
            "ga.crossovers", (out.ga.population * 6 + 9) / 10));
        out.ga.mutations = static_cast<int>(c.get_int(
            "ga.mutations", (out.ga.population * 3 + 9) / 10));
        out.ga.generations = static_cast<int>(c.get_int("ga.generations", 500));
        out.ga.scale_bounds.lo = c.get_double("ga.scale_lo", 0.6);
        out.ga.scale_bounds.hi = c.get_double("ga.scale_hi", 1.0);
        out.ga.exponent_bounds.lo = c.get_double("ga.exponent_lo", 0.0);
        out.ga.exponent_bounds.hi = c.get_double("ga.exponent_hi", 0.4);
        out.ga.mutation_width = c.get_double("ga.mutation_width", 0.01);
        out.ga.swap_bounds = c.get_bool("ga.swap_bounds", false);
        out.ga.validate();

        out.replicates = static_cast<int>(c.get_int("predict.replicates", 100));
        if (out.replicates < 1) throw ConfigError("predict.replicates must be >= 1");

        out.ks_bootstrap = static_cast<int>(c.get_int("evaluate.n_boot", 1000));
        out.scan_min_group = c.get_int("evaluate.min_group", 20);
        out.scan_max_annual_pubs =
            static_cast<int>(c.get_int("evaluate.max_annual_pubs", 20));
        out.run_scan = c.get_bool("evaluate.scan", true);
        const std::string dist = c.get_string("evaluate.distribution_mode", "single");
        if (dist == "single") out.distribution_mode = DistributionMode::SingleReplicate;
        else if (dist == "pooled") out.distribution_mode = DistributionMode::Pooled;
        else throw ConfigError("evaluate.distribution_mode must be single or pooled");
        out.max_lag = static_cast<int>(c.get_int("evaluate.max_lag", 6));
        out.auc_history_cap = static_cast<int>(c.get_int("evaluate.history_cap", 50));
        const std::string pmf = c.get_string("evaluate.pmf_form", "standard");
        if (pmf == "standard") out.pmf_form = PmfForm::Standard;
        else if (pmf == "swapped") out.pmf_form = PmfForm::SwappedExponent;
        else throw ConfigError("evaluate.pmf_form must be standard or swapped");

        if (c.has("synth.n_authors")) {
            out.synth_configured = true;
            GenerativeSpec& s = out.synth;
            s.n_authors = static_cast<int>(c.get_int("synth.n_authors", 1000));
            s.window = w;
            s.publication_rates.scale = c.get_double("synth.pub_scale", 1.0);
            s.publication_rates.time_slope = c.get_double("synth.pub_time_slope", 0.0);
            s.publication_rates.index_exponent =
                c.get_double("synth.pub_exponent", 0.0);
            s.coauthor_rates.scale = c.get_double("synth.coauthor_scale", 1.0);
            s.coauthor_rates.time_slope =
                c.get_double("synth.coauthor_time_slope", 0.0);
            s.coauthor_rates.index_exponent =
                c.get_double("synth.coauthor_exponent", 0.0);
            s.hp.tau = c.get_double("synth.tau", 0.0);
            s.hp.upsilon = c.get_double("synth.upsilon", 1.0);
            s.initial_pubs_min =
                static_cast<int>(c.get_int("synth.initial_pubs_min", 1));
            s.initial_pubs_max =
                static_cast<int>(c.get_int("synth.initial_pubs_max", 1));
            s.initial_coauthors_min = c.get_int("synth.initial_coauthors_min", 0);
            s.initial_coauthors_max = c.get_int("synth.initial_coauthors_max", 0);
            s.entry_spread =
                static_cast<int>(c.get_int("synth.entry_spread", 0));
            s.pad_repeat_coauthors = c.get_bool("synth.pad_repeat_coauthors", true);
            s.author_prefix = c.get_string("synth.author_prefix", "s");
        }

        if (c.has("run.output_dir")) {
            out.output_dir = c.require_string("run.output_dir");
        } else if (const char* env = std::getenv("COFORECAST_OUT")) {
            out.output_dir = env;
        }
        if (c.has("run.seed"))
            out.seed = static_cast<std::uint64_t>(c.get_int("run.seed", 0));
        out.threads = static_cast<int>(c.get_int("run.threads", 0));
        return out;
    }
};

}  // namespace cofo
