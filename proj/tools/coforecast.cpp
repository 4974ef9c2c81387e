// Command-line front end: ingest -> matrices -> train -> tune -> predict ->
// evaluate -> report, driven by an INI-style configuration file. Exit codes:
// 0 success, 1 stage failure, 2 usage or configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cofo/config.hpp"
#include "cofo/pipeline.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    std::string input_path;
    std::string format;
    int threads = -1;
    bool lenient_rows = false;
    bool strict_parse = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
    auto* config = cmd->add_option("--config", opts.config_path,
                                   "pipeline configuration file");
    if (config_required) config->required();
    cmd->add_option("--seed", opts.seed, "master seed (overrides run.seed)");
    cmd->add_option("--out", opts.output_dir,
                    "output directory (overrides run.output_dir)");
    cmd->add_option("--input", opts.input_path, "input corpus (overrides input.path)");
    cmd->add_option("--format", opts.format, "input format: jsonl or xml")
        ->check(CLI::IsMember({"jsonl", "xml"}));
    cmd->add_option("--threads", opts.threads, "worker thread cap");
    cmd->add_flag("--lenient", opts.lenient_rows,
                  "fall back to column models for sparse rate rows");
    cmd->add_flag("--strict", opts.strict_parse,
                  "abort ingest on the first malformed record");
}

cofo::PipelineConfig resolve(const CommonOptions& opts) {
    cofo::PipelineConfig cfg = cofo::PipelineConfig::from_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (!opts.input_path.empty()) cfg.input_path = opts.input_path;
    if (!opts.format.empty())
        cfg.format = opts.format == "xml" ? cofo::InputFormat::DblpXml
                                          : cofo::InputFormat::Jsonl;
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (opts.lenient_rows) cfg.train.lenient_rows = true;
    if (opts.strict_parse) cfg.strict_parse = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coforecast: forecast researchers' coauthor growth from "
                 "publication histories"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string stage;
    for (const auto& [name, help] :
         std::initializer_list<std::pair<const char*, const char*>>{
             {"ingest", "parse and filter the corpus into canonical JSONL"},
             {"matrices", "build the empirical group-mean matrices"},
             {"train", "fit the publication and coauthor rate matrices"},
             {"tune", "search the cumulative-advantage hyperparameters"},
             {"predict", "simulate forecasts for the test researchers"},
             {"evaluate", "score forecasts and run the diagnostics"},
             {"synth", "draw a corpus from the generative model"},
             {"report", "collate headline numbers and emit charts"},
             {"pipeline", "run every stage in order"}}) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, opts);
        cmd->callback([&stage, name = std::string(name)] { stage = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cofo::Pipeline pipeline(resolve(opts));
        if (stage == "ingest") std::cout << pipeline.ingest() << '\n';
        else if (stage == "matrices") std::cout << pipeline.matrices() << '\n';
        else if (stage == "train") std::cout << pipeline.train() << '\n';
        else if (stage == "tune") std::cout << pipeline.tune() << '\n';
        else if (stage == "predict") std::cout << pipeline.predict() << '\n';
        else if (stage == "evaluate") std::cout << pipeline.evaluate() << '\n';
        else if (stage == "synth") std::cout << pipeline.synth() << '\n';
        else if (stage == "report") std::cout << pipeline.report() << '\n';
        else if (stage == "pipeline")
            for (const auto& line : pipeline.run_all()) std::cout << line << '\n';
        return 0;
    } catch (const cofo::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
