// Copyright 2026 The gibbsprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: sampling, learning, error estimation, single-spin
// fits, response pipelines and reference reproductions.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "gibbsprobe/blackbox.h"
#include "gibbsprobe/error_est.h"
#include "gibbsprobe/errors.h"
#include "gibbsprobe/iso.h"
#include "gibbsprobe/model.h"
#include "gibbsprobe/noise_oracle.h"
#include "gibbsprobe/reproduce.h"
#include "gibbsprobe/response.h"
#include "gibbsprobe/rng.h"
#include "gibbsprobe/sampler.h"
#include "gibbsprobe/single_qubit.h"
#include "json.hpp"

namespace gp = gibbsprobe;
using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAcceptance = 2;

void write_text(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw gp::Error("cannot write " + path);
    }
    out << text;
}

std::string read_text(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw gp::ParseError(path, 0, "cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Fills options that were not given on the command line from a JSON object.
void apply_config(const std::string &path, CLI::App &app, CLI::App *sub) {
    Json doc;
    try {
        doc = Json::parse(read_text(path));
    } catch (const Json::parse_error &e) {
        throw gp::ParseError(path, 0, e.what());
    }
    if (!doc.is_object()) {
        throw gp::ParseError(path, 0, "config must be a JSON object");
    }
    for (const auto &[key, value] : doc.items()) {
        CLI::Option *opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
        if (!opt) {
            opt = app.get_option_no_throw("--" + key);
        }
        if (!opt) {
            throw gp::ParseError(path, 0, "unknown config key '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;  // flag wins
        }
        std::vector<std::string> results;
        if (value.is_array()) {
            for (const auto &v : value) {
                results.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            }
        } else if (value.is_boolean()) {
            results.push_back(value.get<bool>() ? "true" : "false");
        } else {
            results.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
        opt->clear();
        opt->add_result(results);
        opt->run_callback();
    }
}

uint64_t resolve_seed(const std::optional<uint64_t> &flag) {
    if (flag) {
        return *flag;
    }
    if (const char *env = std::getenv("GIBBSPROBE_SEED")) {
        try {
            size_t used = 0;
            const uint64_t seed = std::stoull(env, &used);
            if (used == std::string(env).size()) {
                return seed;
            }
        } catch (const std::exception &) {
        }
        throw gp::InvariantError("GIBBSPROBE_SEED is not an unsigned integer");
    }
    return gp::kDefaultSeed;
}

gp::Roster read_roster(const std::string &spec) {
    if (spec.empty() || spec == "four-spin") {
        return gp::four_spin_roster();
    }
    Json doc;
    try {
        doc = Json::parse(read_text(spec));
        gp::Roster roster;
        roster.n_spins = doc.at("n_spins").get<int>();
        roster.fields = doc.at("fields").get<std::vector<int>>();
        for (const auto &e : doc.at("edges")) {
            roster.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        }
        if (doc.contains("labels")) {
            roster.spin_labels = doc.at("labels").get<std::vector<std::string>>();
        }
        roster.validate();
        return roster;
    } catch (const Json::exception &e) {
        throw gp::ParseError(spec, 0, e.what());
    }
}

gp::SampleSet maybe_noisy(const gp::GibbsModel &model, const std::string &noise_path, uint64_t m,
                          uint64_t seed, bool srt) {
    if (noise_path.empty()) {
        return gp::sample_exact(gp::exact_distribution(model), m, seed);
    }
    const gp::NoiseSpec noise = gp::read_noise(noise_path);
    if (srt) {
        gp::SrtOptions options;
        options.seed = gp::derive_seed(seed, 1);
        const gp::SrtResult result = gp::srt_effective_distribution(model, noise, options);
        gp::SampleSet samples = gp::sample_exact(result.dist, m, seed);
        samples.meta["source"] = "srt";
        return samples;
    }
    return gp::sample_noisy(model, noise, m, seed);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"gibbsprobe: learn and validate noisy Gibbs models of binary samplers"};
    app.require_subcommand(1);
    // Subcommands inherit this, so global options may also follow the subcommand.
    app.fallthrough();
    std::string config_path;
    int threads = 0;
    std::optional<uint64_t> seed_flag;
    app.add_option("--config", config_path, "JSON file with option values (flags override it)");
    app.add_option("--threads", threads, "Cap on worker threads (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    // Checked after the config file is merged, so the file may supply them.
    std::vector<std::pair<CLI::App *, CLI::Option *>> needed;
    app.add_option("--seed", seed_flag, "Master seed (fallback: GIBBSPROBE_SEED, then 1)");

    // sample
    auto *sample = app.add_subcommand("sample", "Draw samples from a model, a noisy sampler or a black box");
    std::string s_model, s_noise, s_out, s_blackbox;
    std::vector<std::string> s_blackbox_args;
    uint64_t s_m = 0, s_batch = 0;
    bool s_srt = false;
    needed.emplace_back(sample, sample->add_option("--model", s_model, "Input model JSON"));
    sample->add_option("--noise", s_noise, "Noise spec JSON (omit for the exact model)");
    needed.emplace_back(sample, sample->add_option("-M,--num-samples", s_m, "Number of samples"));
    sample->add_option("--out", s_out, "Output sample file (default stdout)");
    sample->add_flag("--srt", s_srt, "Average the noisy sampler over spin-reversal gauges");
    sample->add_option("--blackbox", s_blackbox, "External sampler program");
    sample->add_option("--blackbox-arg", s_blackbox_args, "Extra argument passed to the black box");
    sample->add_option("--batch-size", s_batch, "Black-box batch size (default: one batch)");

    // shim: black-box loopback around the internal simulator
    auto *shim = app.add_subcommand("shim", "Internal sampler speaking the black-box contract");
    std::string sh_model, sh_out, sh_noise;
    uint64_t sh_reads = 0;
    needed.emplace_back(shim, shim->add_option("--model", sh_model));
    needed.emplace_back(shim, shim->add_option("--num-reads", sh_reads));
    needed.emplace_back(shim, shim->add_option("--out", sh_out));
    shim->add_option("--noise", sh_noise);

    // learn
    auto *learn = app.add_subcommand("learn", "Reconstruct a model from samples");
    std::string l_samples, l_out, l_report;
    gp::LearnConfig l_config;
    needed.emplace_back(learn, learn->add_option("--samples", l_samples, "Sample file"));
    learn->add_option("-k,--order", l_config.order, "Interaction order")->check(CLI::PositiveNumber);
    learn->add_option("--grad-tol", l_config.grad_tol, "Gradient-norm stopping tolerance");
    learn->add_option("--max-iter", l_config.max_iter, "Iteration cap per neighborhood");
    learn->add_option("--l1", l_config.l1_penalty, "l1 penalty on multi-spin terms");
    learn->add_option("--out", l_out, "Learned model JSON (default stdout)");
    learn->add_option("--report", l_report, "Report JSON");

    // error-est
    auto *err = app.add_subcommand("error-est", "Replicate protocol for reconstruction error");
    std::string e_model, e_json, e_csv, e_learned;
    uint64_t e_m = 0;
    int e_r = 50;
    gp::LearnConfig e_config;
    needed.emplace_back(err, err->add_option("--model", e_model, "Reference model JSON"));
    needed.emplace_back(err, err->add_option("-M,--num-samples", e_m, "Samples per replicate"));
    err->add_option("-R,--replicates", e_r, "Replicates")->check(CLI::Range(2, 1 << 20));
    err->add_option("-k,--order", e_config.order, "Interaction order");
    err->add_option("--out", e_json, "Report JSON (default stdout)");
    err->add_option("--csv", e_csv, "Report CSV (term,mean,sigma)");
    err->add_option("--learned", e_learned, "Model to classify against the threshold");

    // fit-single
    auto *fit = app.add_subcommand("fit-single", "Single-spin output field and response fits");
    std::string f_scan, f_out, f_hout, f_kind = "all", f_interval = "clopper-pearson";
    double f_confidence = 0.997;
    needed.emplace_back(fit, fit->add_option("--scan", f_scan, "Scan CSV h_in,S,M"));
    fit->add_option("--kind", f_kind, "classical, quantum, noisy_quantum or all");
    fit->add_option("--out", f_out, "Fit report JSON (default stdout)");
    fit->add_option("--hout", f_hout, "Per-point output field CSV");
    fit->add_option("--confidence", f_confidence, "Interval coverage")->check(CLI::Range(0.0, 1.0));
    fit->add_option("--interval", f_interval, "clopper-pearson or crow");

    // respond
    auto *respond = app.add_subcommand("respond", "Quadratic response of learned outputs to inputs");
    std::string r_noise, r_roster, r_pairs_in, r_pairs_out, r_out, r_mode = "exact";
    int r_models = 20000, r_num_inputs = 0;
    std::vector<double> r_grid;
    uint64_t r_samples = 4000000;
    respond->add_option("--noise", r_noise, "Noise spec JSON (simulation mode)");
    respond->add_option("--roster", r_roster, "Roster JSON or 'four-spin'");
    respond->add_option("--n-models", r_models, "Simulated input models")->check(CLI::PositiveNumber);
    respond->add_option("--grid", r_grid, "Grid values for every input coordinate");
    respond->add_option("--mode", r_mode, "exact or samples");
    respond->add_option("--samples-per-model", r_samples, "Samples per model in samples mode");
    respond->add_option("--pairs", r_pairs_in, "Fit an existing pairs CSV instead of simulating");
    respond->add_option("--num-inputs", r_num_inputs, "Input columns of --pairs");
    respond->add_option("--pairs-out", r_pairs_out, "Write simulated pairs CSV");
    respond->add_option("--out", r_out, "Response function JSON (default stdout)");

    // oracle
    auto *oracle = app.add_subcommand("oracle", "Closed-form noise oracles vs brute-force learning");
    std::string o_out;
    oracle->add_option("--out", o_out, "CSV output (default stdout)");

    // reproduce
    auto *repro = app.add_subcommand("reproduce", "Run a reference experiment and compare");
    std::vector<std::string> p_targets;
    std::string p_out_dir, p_reference;
    bool p_reduced = false;
    int p_models = 20000;
    repro->add_option("targets", p_targets, "Targets or 'all'")->required();
    repro->add_option("--out-dir", p_out_dir, "Directory for <target>.csv");
    repro->add_option("--reference", p_reference, "Reference values JSON");
    repro->add_flag("--reduced", p_reduced, "Reduced sample sizes for the threshold target");
    repro->add_option("--n-models", p_models, "Models in the response pipeline")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (!config_path.empty()) {
            CLI::App *active = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
            apply_config(config_path, app, active);
        }
        for (const auto &[sub, opt] : needed) {
            if (sub->parsed() && opt->count() == 0) {
                throw gp::InvariantError(opt->get_name() + " is required");
            }
        }
        if (threads > 0) {
            omp_set_num_threads(threads);
        }
        const uint64_t seed = resolve_seed(seed_flag);

        if (*sample) {
            const gp::GibbsModel model = gp::read_model(s_model);
            gp::SampleSet samples =
                s_blackbox.empty()
                    ? maybe_noisy(model, s_noise, s_m, seed, s_srt)
                    : gp::blackbox_collect(gp::BlackboxCommand{s_blackbox, s_blackbox_args, true}, model,
                                           gp::split_batches(s_m, s_batch == 0 ? s_m : s_batch), seed);
            samples.meta["model_fingerprint"] = gp::model_fingerprint(model);
            write_text(s_out, gp::samples_to_text(samples));
        } else if (*shim) {
            const gp::GibbsModel model = gp::read_model(sh_model);
            gp::SampleSet samples = maybe_noisy(model, sh_noise, sh_reads, seed, false);
            gp::write_samples(samples, sh_out);
        } else if (*learn) {
            const gp::SampleSet samples = gp::read_samples(l_samples);
            const gp::LearnResult result = gp::learn_model(samples, l_config);
            write_text(l_out, gp::model_to_json(result.model));
            if (!l_report.empty()) {
                write_text(l_report, gp::learn_report_json(result, l_config));
            }
        } else if (*err) {
            const gp::GibbsModel reference = gp::read_model(e_model);
            const gp::ErrorReport report = gp::estimate_error(reference, e_m, e_r, e_config, seed);
            write_text(e_json, gp::error_report_json(report));
            if (!e_csv.empty()) {
                write_text(e_csv, gp::error_report_csv(report));
            }
            if (!e_learned.empty()) {
                const auto mask = gp::significance_mask(gp::read_model(e_learned), report);
                std::cerr << mask.size() << " terms above threshold " << report.threshold << ":";
                for (const auto &key : mask) {
                    std::cerr << ' ' << gp::format_key(key);
                }
                std::cerr << '\n';
            }
        } else if (*fit) {
            const gp::FieldScan scan = gp::read_scan(f_scan);
            if (f_interval != "clopper-pearson" && f_interval != "crow") {
                throw gp::InvariantError("unknown interval method '" + f_interval + "'");
            }
            if (!f_hout.empty()) {
                const auto method = f_interval == "crow" ? gp::IntervalMethod::kCrow
                                                         : gp::IntervalMethod::kClopperPearson;
                std::ostringstream csv;
                csv.precision(12);
                csv << "h_in,h_out,ci_low,ci_high,saturated\n";
                for (const auto &pt : scan.points) {
                    const auto est = gp::estimate_hout(pt.positives, pt.total, f_confidence, method);
                    csv << pt.h_in << ',';
                    if (est.h_out) {
                        csv << *est.h_out;
                    }
                    csv << ',' << est.ci_low << ',' << est.ci_high << ','
                        << (est.saturation == gp::Saturation::kNone
                                ? "no"
                                : (est.saturation == gp::Saturation::kAllPositive ? "positive"
                                                                                  : "negative"))
                        << '\n';
                }
                write_text(f_hout, csv.str());
            }
            std::vector<gp::ResponseKind> kinds;
            if (f_kind == "all") {
                kinds = {gp::ResponseKind::kClassical, gp::ResponseKind::kQuantum,
                         gp::ResponseKind::kNoisyQuantum};
            } else {
                kinds = {gp::parse_response_kind(f_kind)};
            }
            Json fits = Json::array();
            for (auto kind : kinds) {
                fits.push_back(Json::parse(gp::fit_to_json(gp::fit_scan(scan, kind))));
            }
            write_text(f_out, fits.dump(2) + "\n");
        } else if (*respond) {
            gp::QuadraticFit result;
            if (!r_pairs_in.empty()) {
                const gp::PairsTable table = gp::parse_pairs_csv(read_text(r_pairs_in), r_num_inputs, r_pairs_in);
                result = gp::fit_quadratic(table.inputs, table.outputs, table.input_names,
                                           table.output_names);
            } else {
                if (r_noise.empty()) {
                    throw gp::InvariantError("respond needs --noise or --pairs");
                }
                gp::PipelineOptions options;
                options.n_models = r_models;
                options.seed = seed;
                if (!r_grid.empty()) {
                    options.grid = r_grid;
                }
                if (r_mode == "samples") {
                    options.mode = gp::PipelineMode::kFiniteSamples;
                    options.samples_per_model = r_samples;
                } else if (r_mode != "exact") {
                    throw gp::InvariantError("unknown pipeline mode '" + r_mode + "'");
                }
                const gp::Roster roster = read_roster(r_roster);
                gp::PipelineResult run =
                    gp::simulate_response_pipeline(gp::read_noise(r_noise), roster, options);
                if (!r_pairs_out.empty()) {
                    write_text(r_pairs_out, gp::pairs_to_csv(run.inputs, run.outputs, roster.input_names(),
                                                             roster.output_names()));
                }
                result = std::move(run.fit);
            }
            for (const auto &w : result.diagnostics.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            write_text(r_out, gp::response_to_json(result.rf));
        } else if (*oracle) {
            gp::ReproduceOptions options;
            options.seed = seed;
            const gp::ReproduceResult result = gp::reproduce("oracle-grid", options);
            write_text(o_out, result.csv);
            for (const auto &c : result.checks) {
                std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
            }
            return result.passed() ? kExitOk : kExitAcceptance;
        } else if (*repro) {
            if (p_targets.size() == 1 && p_targets[0] == "all") {
                p_targets = gp::reproduce_targets();
            }
            gp::ReproduceOptions options;
            options.seed = seed;
            options.reduced = p_reduced;
            options.reference_path = p_reference;
            options.n_models = p_models;
            if (!p_out_dir.empty()) {
                std::filesystem::create_directories(p_out_dir);
            }
            bool all_pass = true;
            for (const auto &target : p_targets) {
                const gp::ReproduceResult result = gp::reproduce(target, options);
                for (const auto &c : result.checks) {
                    std::cout << (c.pass ? "PASS " : "FAIL ") << target << ": " << c.name << " ("
                              << c.detail << ")\n";
                }
                std::cout << target << ": " << (result.passed() ? "passed" : "FAILED") << " in "
                          << result.seconds << " s\n";
                if (!p_out_dir.empty()) {
                    write_text(p_out_dir + "/" + target + ".csv", result.csv);
                }
                all_pass = all_pass && result.passed();
            }
            return all_pass ? kExitOk : kExitAcceptance;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitOk;
}
