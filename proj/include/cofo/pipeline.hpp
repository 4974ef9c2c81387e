#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cofo/common.hpp"
#include "cofo/config.hpp"
#include "cofo/csv.hpp"
#include "cofo/evaluate.hpp"
#include "cofo/hyperopt.hpp"
#include "cofo/matrices.hpp"
#include "cofo/predict.hpp"
#include "cofo/publication.hpp"
#include "cofo/stats.hpp"
#include "cofo/svg.hpp"
#include "cofo/synthetic.hpp"
#include "cofo/timeline.hpp"
#include "cofo/training.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Stage orchestrator. Every stage reads the artifacts of its predecessors
/// from the output directory and writes its own, so subcommands compose the
/// same way the single `pipeline` run does.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config) : cfg_(std::move(config)) {
        if (cfg_.threads > 0) set_max_threads(cfg_.threads);
        std::filesystem::create_directories(cfg_.output_dir);
    }

    const PipelineConfig& config() const { return cfg_; }

    std::filesystem::path artifact(const std::string& name) const {
        return cfg_.output_dir / name;
    }

    // -- ingest --------------------------------------------------------------

    std::string ingest() {
        if (cfg_.input_path.empty())
            throw ConfigError("ingest: input.path not configured");
        std::ifstream in(cfg_.input_path);
        if (!in)
            throw ConfigError("ingest: cannot read input file " +
                              cfg_.input_path.string());
        ParseResult parsed = cfg_.format == InputFormat::Jsonl
                                 ? parse_jsonl(in, !cfg_.strict_parse)
                                 : parse_dblp_xml(in, !cfg_.strict_parse);
        for (const auto& diag : parsed.diagnostics)
            std::cerr << "[ingest] " << cfg_.input_path.filename().string() << ":"
                      << diag.location << ": " << diag.message << '\n';
        const long parsed_count = static_cast<long>(parsed.publications.size());
        std::vector<Publication> kept =
            filter_publications(parsed.publications, cfg_.max_authors);
        const long filtered_out = parsed_count - static_cast<long>(kept.size());

        {
            std::ofstream out(artifact("publications.jsonl"));
            if (!out)
                throw ConfigError("ingest: cannot write " +
                                  artifact("publications.jsonl").string());
            out << cfg_.meta().comment() << '\n';
            serialize_jsonl(kept, out);
        }
        nlohmann::ordered_json summary;
        summary["meta"] = meta_json();
        summary["parsed"] = parsed_count;
        summary["rejected"] = parsed.diagnostics.size();
        summary["filtered_out"] = filtered_out;
        summary["kept"] = kept.size();
        write_json("ingest_summary.json", summary);

        std::ostringstream os;
        os << "ingest: parsed=" << parsed_count
           << " rejected=" << parsed.diagnostics.size()
           << " filtered_out=" << filtered_out << " kept=" << kept.size();
        return os.str();
    }

    // -- matrices ------------------------------------------------------------

    std::string matrices() {
        const TimelineMap timelines = load_timelines();
        const DatasetSlice training =
            slice_dataset(timelines, cfg_.window, SliceRole::Training);
        const EtaMatrix eta = compute_eta(training, cfg_.window);
        const XiMatrix xi = compute_xi(training, cfg_.window);
        write_mean_matrix(artifact("eta.csv"), artifact("eta_counts.csv"), eta,
                          cfg_.window, cfg_.meta());
        write_mean_matrix(artifact("xi.csv"), artifact("xi_counts.csv"), xi,
                          cfg_.window, cfg_.meta());

        nlohmann::ordered_json summary;
        summary["meta"] = meta_json();
        summary["researchers"] = timelines.size();
        summary["training_members"] = training.members.size();
        summary["training_coverage"] = training.coverage;
        summary["eta_observations"] = eta.total_count();
        summary["xi_observations"] = xi.total_count();
        write_json("matrices_summary.json", summary);

        std::ostringstream os;
        os << "matrices: training=" << training.members.size()
           << " eta_obs=" << eta.total_count() << " xi_obs=" << xi.total_count();
        return os.str();
    }

    // -- train ---------------------------------------------------------------

    std::string train() {
        const EtaMatrix eta =
            read_mean_matrix(artifact("eta.csv"), artifact("eta_counts.csv"), "i");
        const XiMatrix xi =
            read_mean_matrix(artifact("xi.csv"), artifact("xi_counts.csv"), "m");
        const LambdaMatrix lambda = fit_lambda(eta, cfg_.window, cfg_.train);
        const ZetaMatrix zeta = fit_zeta(xi, cfg_.window, cfg_.train);

        write_rate_grid(artifact("lambda.csv"), lambda.values, "i", cfg_.window,
                        cfg_.meta());
        write_provenance_grid(artifact("lambda_provenance.csv"), lambda.provenance,
                              cfg_.window, cfg_.meta());
        {
            csv::Writer out(artifact("lambda_row_fits.csv"), cfg_.meta());
            out.row({"i", "intercept", "slope"});
            for (std::size_t i = 0; i < lambda.row_fits.size(); ++i)
                out.row({std::to_string(i + 1),
                         format_double(lambda.row_fits[i].intercept),
                         format_double(lambda.row_fits[i].slope)});
        }
        {
            csv::Writer out(artifact("lambda_col_fits.csv"), cfg_.meta());
            out.row({"j", "year", "intercept", "slope"});
            for (std::size_t j = 0; j < lambda.col_fits.size(); ++j)
                out.row({std::to_string(j + 1),
                         std::to_string(cfg_.window.year(static_cast<int>(j + 1))),
                         format_double(lambda.col_fits[j].intercept),
                         format_double(lambda.col_fits[j].slope)});
        }
        write_rate_grid(artifact("zeta.csv"), zeta.values, "m", cfg_.window,
                        cfg_.meta());
        {
            csv::Writer out(artifact("zeta_fits.csv"), cfg_.meta());
            out.row({"m", "intercept", "slope", "p_value"});
            for (std::size_t m = 0; m < zeta.fits.size(); ++m)
                out.row({std::to_string(m + 1), format_double(zeta.fits[m].intercept),
                         format_double(zeta.fits[m].slope),
                         format_double(zeta.significance[m])});
        }
        {
            auto fit_json = [](const stats::LogLinearFit& fit) {
                nlohmann::ordered_json j;
                j["intercept"] = fit.intercept;
                j["slope"] = fit.slope;
                j["slope_se"] = fit.slope_se;
                j["slope_p_value"] = fit.slope_p_value;
                j["n_points"] = fit.n_points;
                j["dropped_points"] = fit.dropped_points;
                j["method"] = stats::to_string(fit.method);
                return j;
            };
            nlohmann::ordered_json reports;
            reports["meta"] = meta_json();
            auto dump = [&](const char* key,
                            const std::vector<stats::LogLinearFit>& fits) {
                nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                for (std::size_t i = 0; i < fits.size(); ++i) {
                    nlohmann::ordered_json row = fit_json(fits[i]);
                    row["index"] = i + 1;
                    rows.push_back(row);
                }
                reports[key] = rows;
            };
            dump("lambda_rows", lambda.row_reports);
            dump("lambda_columns", lambda.col_reports);
            dump("zeta_rows", zeta.reports);
            write_json("fit_reports.json", reports);
        }
        std::ostringstream os;
        os << "train: lambda=" << lambda.values.rows() << "x"
           << lambda.values.cols() << " zeta=" << zeta.values.rows() << "x"
           << zeta.values.cols() << " fallback_rows=" << lambda.fallback_rows.size();
        return os.str();
    }

    // -- tune ----------------------------------------------------------------

    std::string tune() {
        const std::uint64_t master = cfg_.require_seed("tune");
        const TimelineMap timelines = load_timelines();
        const DatasetSlice validation =
            slice_dataset(timelines, cfg_.window, SliceRole::Validation);
        const ZetaMatrix zeta = load_zeta();

        GaConfig ga = cfg_.ga;
        ga.seed = derive_seed(master, "tune");
        const GaResult result = run_ga(ga, validation, zeta, cfg_.window);

        {
            csv::Writer out(artifact("ga_trace.csv"), cfg_.meta());
            out.row({"generation", "best_fitness", "best_tau", "best_upsilon"});
            for (const auto& point : result.trace)
                out.row({std::to_string(point.generation),
                         format_double(point.best_fitness),
                         format_double(point.best.tau),
                         format_double(point.best.upsilon)});
        }
        nlohmann::ordered_json hp;
        hp["meta"] = meta_json();
        hp["tau"] = result.best.tau;
        hp["upsilon"] = result.best.upsilon;
        hp["fitness"] = result.best_fitness;
        hp["generations"] = cfg_.ga.generations;
        hp["validation_members"] = validation.members.size();
        hp["skipped_over_cap"] = result.skipped_over_cap;
        write_json("hyperparams.json", hp);

        std::ostringstream os;
        os << "tune: tau=" << format_double(result.best.tau)
           << " upsilon=" << format_double(result.best.upsilon)
           << " fitness=" << format_double(result.best_fitness)
           << " validation=" << validation.members.size();
        return os.str();
    }

    // -- predict ---------------------------------------------------------------

    std::string predict() {
        const std::uint64_t master = cfg_.require_seed("predict");
        const TimelineMap timelines = load_timelines();
        const DatasetSlice test =
            slice_dataset(timelines, cfg_.window, SliceRole::Test);
        const LambdaMatrix lambda = load_lambda();
        const ZetaMatrix zeta = load_zeta();
        const HyperParams hp = load_hyperparams();

        const SimulationResult sim =
            simulate(test, lambda, zeta, hp, cfg_.window, cfg_.replicates,
                     derive_seed(master, "predict"));

        {
            csv::Writer out(artifact("forecasts.csv"), cfg_.meta());
            out.row({"author", "year", "mean_pubs", "mean_coauthors",
                     "coauthors_q05", "coauthors_q95"});
            for (const auto& fc : sim.forecasts)
                for (std::size_t t = 0; t < fc.years.size(); ++t)
                    out.row({fc.author, std::to_string(fc.years[t]),
                             format_double(fc.mean_pubs(static_cast<int>(t))),
                             format_double(fc.mean_coauthors(static_cast<int>(t))),
                             std::to_string(fc.coauthor_quantile(0.05, static_cast<int>(t))),
                             std::to_string(fc.coauthor_quantile(0.95, static_cast<int>(t)))});
        }
        {
            csv::Writer out(artifact("forecast_replicates.csv"), cfg_.meta());
            std::vector<std::string> header{"author", "year", "start_pubs",
                                            "start_coauthors"};
            for (int r = 0; r < cfg_.replicates; ++r)
                header.push_back("rep_" + std::to_string(r));
            out.row(header);
            for (const auto& fc : sim.forecasts)
                for (std::size_t t = 0; t < fc.years.size(); ++t) {
                    std::vector<std::string> row{
                        fc.author, std::to_string(fc.years[t]),
                        std::to_string(fc.start_pubs),
                        std::to_string(fc.start_coauthors)};
                    for (int r = 0; r < fc.replicates; ++r)
                        row.push_back(std::to_string(
                            fc.coauthors_at(r, static_cast<int>(t))));
                    out.row(row);
                }
        }
        {
            // Collaboration-event probabilities from observed states.
            csv::Writer out(artifact("event_probabilities.csv"), cfg_.meta());
            out.row({"author", "year", "probability", "truncated_tail"});
            for (const auto& tl : test.members) {
                for (int l = cfg_.window.test_anchor + 1; l <= cfg_.window.eval_end;
                     ++l) {
                    const int h_prev = std::min(
                        tl.cumulative_pubs(cfg_.window.year(l - 1)),
                        cfg_.window.lambda_rows);
                    if (h_prev < 1) continue;
                    const EventProbability p = event_probability(
                        h_prev, tl.cumulative_coauthors(cfg_.window.year(l - 1)),
                        lambda, zeta, hp, cfg_.window, l, cfg_.pmf_form);
                    out.row({tl.author(), std::to_string(cfg_.window.year(l)),
                             format_double(p.value),
                             format_double(p.truncated_tail)});
                }
            }
        }
        nlohmann::ordered_json summary;
        summary["meta"] = meta_json();
        summary["test_members"] = test.members.size();
        summary["test_coverage"] = test.coverage;
        summary["forecasts"] = sim.forecasts.size();
        summary["replicates"] = cfg_.replicates;
        summary["skipped_no_history"] = sim.skipped_no_history;
        summary["clamped_history"] = sim.clamped_history;
        summary["clamped_annual"] = sim.clamped_annual;
        write_json("predict_summary.json", summary);

        std::ostringstream os;
        os << "predict: forecasts=" << sim.forecasts.size() << " replicates="
           << cfg_.replicates << " coverage=" << format_double(test.coverage);
        return os.str();
    }

    // -- evaluate --------------------------------------------------------------

    std::string evaluate() {
        const std::uint64_t master = cfg_.require_seed("evaluate");
        const TimelineMap timelines = load_timelines();
        const DatasetSlice test =
            slice_dataset(timelines, cfg_.window, SliceRole::Test);
        const std::vector<Forecast> forecasts = load_forecasts();
        const LambdaMatrix lambda = load_lambda();
        const ZetaMatrix zeta = load_zeta();
        const HyperParams hp = load_hyperparams();

        const TrendReport trend = trend_report(test, forecasts, cfg_.window);
        {
            csv::Writer out(artifact("trend.csv"), cfg_.meta());
            out.row({"anchor_coauthors", "group_size", "year", "observed_cumulative",
                     "predicted_cumulative", "observed_new", "predicted_new"});
            for (std::size_t g = 0; g < trend.group_keys.size(); ++g)
                for (std::size_t t = 0; t < trend.years.size(); ++t)
                    out.row({std::to_string(trend.group_keys[g]),
                             std::to_string(trend.group_sizes[g]),
                             std::to_string(trend.years[t]),
                             format_double(trend.observed_cumulative(
                                 static_cast<int>(g), static_cast<int>(t))),
                             format_double(trend.predicted_cumulative(
                                 static_cast<int>(g), static_cast<int>(t))),
                             format_double(trend.observed_incremental(
                                 static_cast<int>(g), static_cast<int>(t))),
                             format_double(trend.predicted_incremental(
                                 static_cast<int>(g), static_cast<int>(t)))});
        }
        {
            csv::Writer out(artifact("trend_summary.csv"), cfg_.meta());
            out.row({"year", "s1", "s2"});
            for (std::size_t t = 0; t < trend.years.size(); ++t)
                out.row({std::to_string(trend.years[t]), format_double(trend.s1[t]),
                         format_double(trend.s2[t])});
        }

        const std::vector<DistributionComparison> dist =
            distribution_report(test, forecasts, cfg_.window, cfg_.distribution_mode);
        long dist_rejects = 0;
        {
            csv::Writer out(artifact("distribution.csv"), cfg_.meta());
            out.row({"year", "ks_statistic", "p_value", "n_observed", "n_predicted"});
            for (const auto& row : dist) {
                if (row.p_value <= 0.05) ++dist_rejects;
                out.row({std::to_string(row.year), format_double(row.ks_statistic),
                         format_double(row.p_value), std::to_string(row.n_observed),
                         std::to_string(row.n_predicted)});
            }
        }

        const AucReport auc = auc_report(test, lambda, zeta, hp, cfg_.window,
                                         cfg_.auc_history_cap, cfg_.pmf_form);
        {
            csv::Writer out(artifact("auc.csv"), cfg_.meta());
            out.row({"scope", "year", "hits_event", "hits_non_event", "at_half",
                     "total", "auc"});
            auto write_counts = [&](const std::string& scope, int year,
                                    const AucCounts& counts) {
                out.row({scope, std::to_string(year),
                         std::to_string(counts.hits_event),
                         std::to_string(counts.hits_non_event),
                         std::to_string(counts.at_half), std::to_string(counts.total),
                         format_double(counts.auc())});
            };
            write_counts("overall", 0, auc.overall);
            for (const auto& stratum : auc.by_year)
                write_counts("year", stratum.year, stratum.counts);
        }
        {
            csv::Writer out(artifact("auc_by_history.csv"), cfg_.meta());
            out.row({"year", "historical_pubs", "hits_event", "hits_non_event",
                     "at_half", "total", "auc"});
            for (const auto& stratum : auc.by_year_and_history)
                out.row({std::to_string(stratum.year), std::to_string(stratum.history),
                         std::to_string(stratum.counts.hits_event),
                         std::to_string(stratum.counts.hits_non_event),
                         std::to_string(stratum.counts.at_half),
                         std::to_string(stratum.counts.total),
                         format_double(stratum.counts.auc())});
        }

        long scan_cells = 0, scan_rejects = 0;
        std::map<int, long> largest_conditioned_group;
        if (cfg_.run_scan) {
            const DatasetSlice training =
                slice_dataset(timelines, cfg_.window, SliceRole::Training);
            ScanOptions options;
            options.max_annual_pubs = cfg_.scan_max_annual_pubs;
            options.min_group = cfg_.scan_min_group;
            options.n_boot = cfg_.ks_bootstrap;
            options.seed = derive_seed(master, "scan");
            csv::Writer out(artifact("poisson_scan.csv"), cfg_.meta());
            out.row({"grouping", "year", "annual_pubs", "coauthor_history", "n",
                     "lambda_hat", "ks_statistic", "p_value", "sufficient"});
            for (const ScanGrouping grouping :
                 {ScanGrouping::AnnualPubs,
                  ScanGrouping::AnnualPubsAndCoauthorHistory}) {
                const auto cells =
                    poisson_character_scan(training, cfg_.window, grouping, options);
                const std::string label =
                    grouping == ScanGrouping::AnnualPubs ? "annual_pubs"
                                                         : "annual_pubs_and_history";
                for (const auto& cell : cells) {
                    if (cell.sufficient) {
                        ++scan_cells;
                        if (cell.p_value <= 0.05) ++scan_rejects;
                    }
                    if (grouping == ScanGrouping::AnnualPubsAndCoauthorHistory) {
                        auto& best = largest_conditioned_group[cell.year];
                        best = std::max(best, cell.n);
                    }
                    out.row({label, std::to_string(cell.year),
                             std::to_string(cell.annual_pubs),
                             std::to_string(cell.coauthor_history),
                             std::to_string(cell.n), format_double(cell.lambda_hat),
                             format_double(cell.ks_statistic),
                             format_double(cell.p_value),
                             cell.sufficient ? "1" : "0"});
                }
            }
        }

        const AutocorrelationReport acf =
            autocorrelation_report(test, cfg_.window, cfg_.max_lag);
        {
            csv::Writer out(artifact("autocorrelation.csv"), cfg_.meta());
            out.row({"anchor_coauthors", "proportion", "n", "lag", "mean_r"});
            for (const auto& group : acf.groups)
                for (std::size_t lag = 0; lag < group.mean_r.size(); ++lag)
                    out.row({std::to_string(group.anchor_coauthors),
                             format_double(group.proportion), std::to_string(group.n),
                             std::to_string(lag + 1),
                             format_double(group.mean_r[lag])});
        }

        DatasetSlice everyone;
        everyone.role = SliceRole::Training;
        for (const auto& [author, tl] : timelines) everyone.members.push_back(tl);
        const DiagnosticsReport diag = appendix_diagnostics(everyone, cfg_.window);
        {
            csv::Writer out(artifact("diagnostics_yearly.csv"), cfg_.meta());
            out.row({"year", "active", "one_pub_proportion", "spearman_r",
                     "spearman_p"});
            for (const auto& row : diag.per_year)
                out.row({std::to_string(row.year), std::to_string(row.active),
                         format_double(row.one_pub_proportion),
                         format_double(row.spearman_r),
                         format_double(row.spearman_p)});
        }
        auto write_advantage = [&](const std::string& name,
                                   const std::vector<AdvantageCell>& cells) {
            csv::Writer out(artifact(name), cfg_.meta());
            out.row({"year", "prior_count", "mean_increment", "n"});
            for (const auto& cell : cells)
                out.row({std::to_string(cell.year), std::to_string(cell.prior_count),
                         format_double(cell.mean_increment), std::to_string(cell.n)});
        };
        write_advantage("diagnostics_coauthor_advantage.csv", diag.coauthor_advantage);
        write_advantage("diagnostics_publication_advantage.csv",
                        diag.publication_advantage);

        nlohmann::ordered_json summary;
        summary["meta"] = meta_json();
        summary["overall_auc"] = auc.overall.auc();
        summary["auc_total"] = auc.overall.total;
        nlohmann::ordered_json trend_json = nlohmann::ordered_json::array();
        for (std::size_t t = 0; t < trend.years.size(); ++t) {
            nlohmann::ordered_json entry;
            entry["year"] = trend.years[t];
            entry["s1"] = trend.s1[t];
            entry["s2"] = trend.s2[t];
            trend_json.push_back(entry);
        }
        summary["trend"] = trend_json;
        summary["distribution_years"] = dist.size();
        summary["distribution_rejects"] = dist_rejects;
        summary["scan_groups"] = scan_cells;
        summary["scan_rejects"] = scan_rejects;
        {
            nlohmann::ordered_json largest = nlohmann::ordered_json::array();
            for (const auto& [year, n] : largest_conditioned_group) {
                nlohmann::ordered_json entry;
                entry["year"] = year;
                entry["largest_group"] = n;
                largest.push_back(entry);
            }
            summary["scan_largest_conditioned_group"] = largest;
        }
        summary["autocorrelation_skipped_constant"] = acf.skipped_constant;
        write_json("evaluate_summary.json", summary);

        std::ostringstream os;
        os << "evaluate: auc=" << format_double(auc.overall.auc())
           << " s2_final=" << format_double(trend.s2.back())
           << " distribution_rejects=" << dist_rejects << "/" << dist.size();
        return os.str();
    }

    // -- synth -----------------------------------------------------------------

    std::string synth() {
        if (!cfg_.synth_configured)
            throw ConfigError("synth: no [synth] section in the config");
        const std::uint64_t master = cfg_.require_seed("synth");
        GenerativeSpec spec = cfg_.synth;
        spec.window = cfg_.window;
        spec.seed = derive_seed(master, "synth");
        const SyntheticCorpus corpus = generate(spec);
        {
            std::ofstream out(artifact("corpus.jsonl"));
            if (!out)
                throw ConfigError("synth: cannot write " +
                                  artifact("corpus.jsonl").string());
            out << cfg_.meta().comment() << '\n';
            serialize_jsonl(corpus.publications, out);
        }
        {
            csv::Writer out(artifact("ground_truth.csv"), cfg_.meta());
            out.row({"author", "year", "new_pubs", "new_coauthors"});
            for (const auto& [author, deltas] : corpus.ground_truth)
                for (const auto& delta : deltas)
                    out.row({author, std::to_string(delta.year),
                             std::to_string(delta.new_pubs),
                             std::to_string(delta.new_coauthors)});
        }
        {
            std::ofstream out(artifact("synth_authors.txt"));
            out << cfg_.meta().comment() << '\n';
            for (const auto& [author, deltas] : corpus.ground_truth)
                out << author << '\n';
        }
        std::ostringstream os;
        os << "synth: authors=" << corpus.ground_truth.size()
           << " publications=" << corpus.publications.size();
        return os.str();
    }

    // -- report ----------------------------------------------------------------

    std::string report() {
        nlohmann::ordered_json report;
        report["meta"] = meta_json();
        for (const char* name :
             {"ingest_summary.json", "matrices_summary.json", "predict_summary.json",
              "evaluate_summary.json", "hyperparams.json"}) {
            const auto path = artifact(name);
            if (std::filesystem::exists(path)) {
                std::ifstream in(path);
                nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
                j.erase("meta");
                report[std::filesystem::path(name).stem().string()] = j;
            }
        }
        // Significance pattern of the coauthor-rate time slopes.
        if (std::filesystem::exists(artifact("zeta_fits.csv"))) {
            const csv::Table fits = csv::read(artifact("zeta_fits.csv"));
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& row : fits.rows) {
                nlohmann::ordered_json entry;
                entry["m"] = csv::to_long(row.at(0), "zeta_fits");
                entry["p_value"] = csv::to_double(row.at(3), "zeta_fits");
                entry["significant"] = csv::to_double(row.at(3), "zeta_fits") < 0.05;
                rows.push_back(entry);
            }
            report["zeta_significance"] = rows;
        }
        write_json("report.json", report);

        int charts = 0;
        charts += chart_zeta_trends();
        charts += chart_trend();
        charts += chart_distribution();
        charts += chart_auc();

        std::ostringstream os;
        os << "report: report.json written, charts=" << charts;
        return os.str();
    }

    // -- pipeline ----------------------------------------------------------------

    std::vector<std::string> run_all() {
        std::vector<std::string> lines;
        lines.push_back(ingest());
        lines.push_back(matrices());
        lines.push_back(train());
        lines.push_back(tune());
        lines.push_back(predict());
        lines.push_back(evaluate());
        lines.push_back(report());
        return lines;
    }

    // -- shared loaders ----------------------------------------------------------

    TimelineMap load_timelines() {
        std::ifstream in(artifact("publications.jsonl"));
        if (!in)
            throw ConfigError("missing " + artifact("publications.jsonl").string() +
                              " (run the ingest stage first)");
        ParseResult parsed = parse_jsonl(in, false);
        TimelineBuildResult built =
            build_timelines(parsed.publications, cfg_.window.corpus_start,
                            cfg_.window.corpus_end());
        if (built.outside_window > 0)
            std::cerr << "[timelines] " << built.outside_window
                      << " publications outside the corpus window\n";
        if (!cfg_.authors_file) return std::move(built.timelines);

        std::ifstream allow(*cfg_.authors_file);
        if (!allow)
            throw ConfigError("cannot read authors file " +
                              cfg_.authors_file->string());
        std::set<std::string> allowed;
        std::string line;
        while (std::getline(allow, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line[0] != '#') allowed.insert(line);
        }
        TimelineMap filtered;
        for (auto& [author, tl] : built.timelines)
            if (allowed.count(author)) filtered.emplace(author, std::move(tl));
        if (filtered.empty())
            throw ConfigError("authors file excludes every researcher");
        return filtered;
    }

    LambdaMatrix load_lambda() {
        LambdaMatrix lambda;
        lambda.values = read_rate_grid(artifact("lambda.csv"));
        if (lambda.values.rows() != cfg_.window.lambda_rows ||
            lambda.values.cols() != cfg_.window.intervals())
            throw ConfigError("lambda.csv shape does not match the window");
        const csv::Table rows = csv::read(artifact("lambda_row_fits.csv"));
        for (const auto& row : rows.rows)
            lambda.row_fits.push_back({csv::to_double(row.at(1), "row_fits"),
                                       csv::to_double(row.at(2), "row_fits")});
        const csv::Table cols = csv::read(artifact("lambda_col_fits.csv"));
        for (const auto& row : cols.rows)
            lambda.col_fits.push_back({csv::to_double(row.at(2), "col_fits"),
                                       csv::to_double(row.at(3), "col_fits")});
        return lambda;
    }

    ZetaMatrix load_zeta() {
        ZetaMatrix zeta;
        zeta.values = read_rate_grid(artifact("zeta.csv"));
        if (zeta.values.rows() != cfg_.window.zeta_rows ||
            zeta.values.cols() != cfg_.window.intervals())
            throw ConfigError("zeta.csv shape does not match the window");
        const csv::Table fits = csv::read(artifact("zeta_fits.csv"));
        for (const auto& row : fits.rows) {
            zeta.fits.push_back({csv::to_double(row.at(1), "zeta_fits"),
                                 csv::to_double(row.at(2), "zeta_fits")});
            zeta.significance.push_back(csv::to_double(row.at(3), "zeta_fits"));
        }
        return zeta;
    }

    HyperParams load_hyperparams() {
        std::ifstream in(artifact("hyperparams.json"));
        if (!in)
            throw ConfigError("missing " + artifact("hyperparams.json").string() +
                              " (run the tune stage first)");
        const nlohmann::json j = nlohmann::json::parse(in);
        return {j.at("tau").get<double>(), j.at("upsilon").get<double>()};
    }

    /// Rebuild forecasts from the replicate dump. Publication paths are not
    /// persisted; evaluation consumes coauthor paths and start states only.
    std::vector<Forecast> load_forecasts() {
        const csv::Table table = csv::read(artifact("forecast_replicates.csv"));
        if (table.header.size() < 5)
            throw ParseError("forecast_replicates.csv: missing replicate columns");
        const int replicates = static_cast<int>(table.header.size()) - 4;
        std::vector<Forecast> forecasts;
        for (const auto& row : table.rows) {
            const std::string& author = row.at(0);
            if (forecasts.empty() || forecasts.back().author != author) {
                Forecast fc;
                fc.author = author;
                fc.start_year = cfg_.window.year(cfg_.window.test_anchor);
                fc.start_pubs =
                    static_cast<int>(csv::to_long(row.at(2), "replicates"));
                fc.start_coauthors = csv::to_long(row.at(3), "replicates");
                fc.replicates = replicates;
                forecasts.push_back(std::move(fc));
            }
            forecasts.back().years.push_back(
                static_cast<int>(csv::to_long(row.at(1), "replicates")));
        }
        for (auto& fc : forecasts)
            fc.coauthor_paths.resize(fc.years.size() *
                                     static_cast<std::size_t>(replicates));
        std::size_t row_idx = 0;
        for (auto& fc : forecasts) {
            for (std::size_t t = 0; t < fc.years.size(); ++t, ++row_idx) {
                const auto& row = table.rows.at(row_idx);
                for (int r = 0; r < replicates; ++r)
                    fc.coauthor_paths[static_cast<std::size_t>(r) * fc.years.size() +
                                      t] =
                        csv::to_long(row.at(static_cast<std::size_t>(r) + 4),
                                     "replicates");
            }
        }
        return forecasts;
    }

private:
    nlohmann::ordered_json meta_json() const {
        std::ostringstream hash;
        hash << std::hex << cfg_.config_hash;
        nlohmann::ordered_json j;
        j["config"] = hash.str();
        j["seed"] = cfg_.seed.value_or(0);
        return j;
    }

    void write_json(const std::string& name, const nlohmann::ordered_json& j) {
        std::ofstream out(artifact(name));
        if (!out) throw ConfigError("cannot write " + artifact(name).string());
        out << j.dump(2) << '\n';
    }

    static const std::vector<std::string>& palette() {
        static const std::vector<std::string> colors{
            "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400",
            "#16a085", "#7f8c8d", "#2c3e50", "#f39c12", "#9b59b6",
            "#1abc9c", "#34495e"};
        return colors;
    }

    int chart_zeta_trends() {
        if (!std::filesystem::exists(artifact("xi.csv")) ||
            !std::filesystem::exists(artifact("zeta.csv")))
            return 0;
        const XiMatrix xi =
            read_mean_matrix(artifact("xi.csv"), artifact("xi_counts.csv"), "m");
        const Grid<double> zeta = read_rate_grid(artifact("zeta.csv"));
        SvgChart chart("Annual new-coauthor rate by annual publications", "year",
                       "new coauthors");
        for (int m = 1; m <= xi.rows(); ++m) {
            const std::string color = palette()[(m - 1) % palette().size()];
            SvgChart::Series observed;
            observed.label = m <= 4 ? "observed m=" + std::to_string(m) : "";
            observed.color = color;
            observed.line = false;
            observed.markers = true;
            for (int j = 1; j <= xi.cols(); ++j)
                if (xi.defined(m, j))
                    observed.points.push_back(
                        {static_cast<double>(cfg_.window.year(j)), xi.value(m, j)});
            chart.add_series(std::move(observed));
            SvgChart::Series fitted;
            fitted.color = color;
            for (int j = 1; j <= zeta.cols(); ++j)
                fitted.points.push_back(
                    {static_cast<double>(cfg_.window.year(j)), zeta(m - 1, j - 1)});
            chart.add_series(std::move(fitted));
        }
        chart.write(artifact("chart_zeta_trends.svg"), cfg_.meta());
        return 1;
    }

    int chart_trend() {
        if (!std::filesystem::exists(artifact("trend.csv"))) return 0;
        const csv::Table table = csv::read(artifact("trend.csv"));
        if (table.rows.empty()) return 0;
        int final_year = 0;
        for (const auto& row : table.rows)
            final_year = std::max(final_year,
                                  static_cast<int>(csv::to_long(row.at(2), "trend")));
        SvgChart chart("Coauthor totals at " + std::to_string(final_year) +
                           " by anchor coauthor count",
                       "coauthors at anchor", "mean coauthors");
        SvgChart::Series observed{"observed", palette()[0], false, true, {}};
        SvgChart::Series predicted{"predicted", palette()[1], true, false, {}};
        for (const auto& row : table.rows) {
            if (static_cast<int>(csv::to_long(row.at(2), "trend")) != final_year)
                continue;
            const double k = static_cast<double>(csv::to_long(row.at(0), "trend"));
            observed.points.push_back({k, csv::to_double(row.at(3), "trend")});
            predicted.points.push_back({k, csv::to_double(row.at(4), "trend")});
        }
        chart.add_series(std::move(observed));
        chart.add_series(std::move(predicted));
        chart.write(artifact("chart_trend.svg"), cfg_.meta());
        return 1;
    }

    int chart_distribution() {
        if (!std::filesystem::exists(artifact("distribution.csv"))) return 0;
        const csv::Table table = csv::read(artifact("distribution.csv"));
        SvgChart chart("Observed vs predicted coauthor distributions", "year",
                       "two-sample KS p-value");
        SvgChart::Series p{"p-value", palette()[1], true, true, {}};
        SvgChart::Series threshold{"0.05", palette()[0], true, false, {}};
        for (const auto& row : table.rows) {
            const double year = static_cast<double>(csv::to_long(row.at(0), "dist"));
            p.points.push_back({year, csv::to_double(row.at(2), "dist")});
            threshold.points.push_back({year, 0.05});
        }
        chart.add_series(std::move(p));
        chart.add_series(std::move(threshold));
        chart.write(artifact("chart_distribution.svg"), cfg_.meta());
        return 1;
    }

    int chart_auc() {
        if (!std::filesystem::exists(artifact("auc_by_history.csv"))) return 0;
        const csv::Table table = csv::read(artifact("auc_by_history.csv"));
        if (table.rows.empty()) return 0;
        int final_year = 0;
        for (const auto& row : table.rows)
            final_year = std::max(final_year,
                                  static_cast<int>(csv::to_long(row.at(0), "auc")));
        SvgChart chart("Collaboration-event precision at " +
                           std::to_string(final_year),
                       "historical publications", "AUC");
        SvgChart::Series series{"AUC", palette()[0], false, true, {}};
        for (const auto& row : table.rows) {
            if (static_cast<int>(csv::to_long(row.at(0), "auc")) != final_year)
                continue;
            const int history = static_cast<int>(csv::to_long(row.at(1), "auc"));
            if (history < 1) continue;  // overflow stratum
            series.points.push_back({static_cast<double>(history),
                                     csv::to_double(row.at(6), "auc")});
        }
        chart.add_series(std::move(series));
        chart.write(artifact("chart_auc.svg"), cfg_.meta());
        return 1;
    }

    PipelineConfig cfg_;
};

}  // namespace cofo
