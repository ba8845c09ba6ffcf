/*
 * Copyright 2026 The seirgame Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "seirgame/seirgame.h"

#include "core/evaluation.hpp"
#include "core/io.hpp"
#include "core/scenario.hpp"
#include "core/solver.hpp"
#include "core/verify.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <new>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace seirgame;

struct seirgame_scenario {
    Scenario scenario;
};

struct seirgame_profile {
    PolicyProfile profile;
    std::optional<Checkpoint> checkpoint; // absent for constant profiles
};

struct seirgame_verify_report {
    std::vector<CheckResult> checks;
};

namespace
{

thread_local std::string last_error;
constexpr int kMinSummaryPaths = 40;

// Errors that carry their own status code out of the guarded region.
struct StatusError : std::runtime_error {
    StatusError(seirgame_status status, const std::string& what)
        : std::runtime_error(what)
        , status(status)
    {
    }
    seirgame_status status;
};

seirgame_status fail(seirgame_status status, const std::string& message)
{
    last_error = message;
    return status;
}

template <typename Body>
seirgame_status guarded(Body&& body)
{
    try {
        last_error.clear();
        return body();
    }
    catch (const StatusError& e) {
        return fail(e.status, e.what());
    }
    catch (const ModelError& e) {
        return fail(SEIRGAME_ERROR_CONFIG, e.what());
    }
    catch (const YAML::Exception& e) {
        return fail(SEIRGAME_ERROR_CONFIG, e.what());
    }
    catch (const std::filesystem::filesystem_error& e) {
        return fail(SEIRGAME_ERROR_IO, e.what());
    }
    catch (const std::invalid_argument& e) {
        return fail(SEIRGAME_ERROR_ARGUMENT, e.what());
    }
    catch (const std::bad_alloc&) {
        return fail(SEIRGAME_ERROR_INTERNAL, "out of memory");
    }
    catch (const std::exception& e) {
        return fail(SEIRGAME_ERROR_INTERNAL, e.what());
    }
    catch (...) {
        return fail(SEIRGAME_ERROR_INTERNAL, "unknown error");
    }
}

void require(bool condition, const char* what)
{
    if (!condition) {
        throw StatusError(SEIRGAME_ERROR_ARGUMENT, what);
    }
}

char* duplicate(const std::string& text)
{
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

const VectorXd& initial_state(const Scenario& scenario)
{
    if (!scenario.initial) {
        throw StatusError(SEIRGAME_ERROR_CONFIG,
                          "initial: required field is missing (s, e, i per region)");
    }
    return *scenario.initial;
}

std::filesystem::path output_path(const char* dir, const char* file)
{
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / file;
}

CsvContext context(const Scenario& scenario, const char* kind, std::uint64_t seed)
{
    return CsvContext{kind, scenario.digest, seed, scenario.params.regions.names};
}

template <typename Writer>
void write_output(const std::filesystem::path& path, Writer&& writer)
{
    std::ostringstream out;
    writer(out);
    write_file_atomically(path.string(), out.str());
}

void check_digest(const seirgame_scenario* scenario, const seirgame_profile* profile, int force)
{
    if (force || !profile->checkpoint) {
        return;
    }
    if (profile->checkpoint->config_digest != scenario->scenario.digest) {
        throw StatusError(SEIRGAME_ERROR_MISMATCH,
                          "profile was trained for scenario digest " +
                              profile->checkpoint->config_digest + ", current scenario is " +
                              scenario->scenario.digest);
    }
    if (profile->profile.size() != scenario->scenario.params.regions_count()) {
        throw StatusError(SEIRGAME_ERROR_MISMATCH, "profile and scenario region counts differ");
    }
}

int run_paths(const Scenario& scenario, const seirgame_run_options* options)
{
    return options && options->paths > 0 ? options->paths : scenario.evaluation.paths;
}

std::uint64_t run_seed(const Scenario& scenario, const seirgame_run_options* options)
{
    return options && options->has_seed ? options->seed : scenario.evaluation.seed;
}

std::string stage_file(int stage)
{
    std::ostringstream name;
    name << "stage-" << std::setw(4) << std::setfill('0') << stage << ".json";
    return name.str();
}

} // namespace

extern "C" {

const char* seirgame_version(void)
{
    return SEIRGAME_VERSION;
}

const char* seirgame_last_error(void)
{
    return last_error.c_str();
}

const char* seirgame_status_name(seirgame_status status)
{
    switch (status) {
    case SEIRGAME_OK:
        return "ok";
    case SEIRGAME_ERROR_ARGUMENT:
        return "invalid argument";
    case SEIRGAME_ERROR_CONFIG:
        return "configuration error";
    case SEIRGAME_ERROR_MISMATCH:
        return "artifact mismatch";
    case SEIRGAME_ERROR_ABORTED:
        return "solver aborted";
    case SEIRGAME_ERROR_VERIFY:
        return "verification error";
    case SEIRGAME_ERROR_IO:
        return "i/o error";
    case SEIRGAME_ERROR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

void seirgame_string_free(char* text)
{
    std::free(text);
}

seirgame_status seirgame_scenario_load(const char* path, seirgame_scenario** out)
{
    return guarded([&] {
        require(path != nullptr && out != nullptr, "scenario_load: null argument");
        *out = nullptr;
        if (!std::filesystem::exists(path)) {
            throw StatusError(SEIRGAME_ERROR_CONFIG, std::string("cannot open scenario ") + path);
        }
        auto handle = std::make_unique<seirgame_scenario>();
        handle->scenario = load_scenario(path);
        *out = handle.release();
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_scenario_parse(const char* yaml_text, seirgame_scenario** out)
{
    return guarded([&] {
        require(yaml_text != nullptr && out != nullptr, "scenario_parse: null argument");
        *out = nullptr;
        auto handle = std::make_unique<seirgame_scenario>();
        handle->scenario = resolve_scenario(parse_scenario_tree(yaml_text));
        *out = handle.release();
        return SEIRGAME_OK;
    });
}

void seirgame_scenario_free(seirgame_scenario* scenario)
{
    delete scenario;
}

seirgame_status seirgame_scenario_set(seirgame_scenario* scenario, const char* dotted_key,
                                      const char* yaml_value)
{
    return guarded([&] {
        require(scenario && dotted_key && yaml_value, "scenario_set: null argument");
        YAML::Node tree = YAML::Clone(scenario->scenario.tree);
        set_tree_value(tree, dotted_key, yaml_value);
        scenario->scenario = resolve_scenario(tree);
        return SEIRGAME_OK;
    });
}

const char* seirgame_scenario_digest(const seirgame_scenario* scenario)
{
    return scenario ? scenario->scenario.digest.c_str() : "";
}

const char* seirgame_scenario_name(const seirgame_scenario* scenario)
{
    return scenario ? scenario->scenario.name.c_str() : "";
}

int seirgame_scenario_regions(const seirgame_scenario* scenario)
{
    return scenario ? scenario->scenario.params.regions_count() : 0;
}

int seirgame_scenario_has_initial(const seirgame_scenario* scenario)
{
    return scenario && scenario->scenario.initial ? 1 : 0;
}

size_t seirgame_scenario_warning_count(const seirgame_scenario* scenario)
{
    return scenario ? scenario->scenario.warnings.size() : 0;
}

const char* seirgame_scenario_warning(const seirgame_scenario* scenario, size_t index)
{
    if (!scenario || index >= scenario->scenario.warnings.size()) {
        return "";
    }
    return scenario->scenario.warnings[index].c_str();
}

seirgame_status seirgame_scenario_resolved_yaml(const seirgame_scenario* scenario, char** out)
{
    return guarded([&] {
        require(scenario && out, "scenario_resolved_yaml: null argument");
        *out = duplicate(emit_yaml(resolved_tree(scenario->scenario)));
        return SEIRGAME_OK;
    });
}

void seirgame_solve_options_init(seirgame_solve_options* options)
{
    if (options != nullptr) {
        *options = seirgame_solve_options{};
    }
}

seirgame_status seirgame_solve(const seirgame_scenario* scenario,
                               const seirgame_solve_options* options, seirgame_profile** out)
{
    return guarded([&] {
        require(scenario && out, "solve: null argument");
        *out = nullptr;
        seirgame_solve_options opts;
        seirgame_solve_options_init(&opts);
        if (options != nullptr) {
            opts = *options;
        }
        const Scenario& sc = scenario->scenario;
        const VectorXd& x0 = initial_state(sc);

        SolverConfig config = sc.solver;
        config.time_steps = sc.grid.steps;
        if (opts.stages > 0) {
            config.stages = opts.stages;
        }
        if (opts.batch > 0) {
            config.batch = opts.batch;
        }
        if (opts.workers > 0) {
            config.workers = opts.workers;
        }
        if (opts.has_seed) {
            config.seed = opts.seed;
        }
        const int checkpoint_every =
            opts.checkpoint_every > 0 ? opts.checkpoint_every : sc.checkpoint_every;

        std::optional<StageState> start;
        if (opts.resume_path != nullptr) {
            Checkpoint resumed = load_checkpoint(opts.resume_path);
            if (resumed.config_digest != sc.digest && !opts.force) {
                throw StatusError(SEIRGAME_ERROR_MISMATCH,
                                  std::string("checkpoint ") + opts.resume_path +
                                      " belongs to scenario digest " + resumed.config_digest +
                                      ", current scenario is " + sc.digest);
            }
            if (static_cast<int>(resumed.state.players.size()) != sc.params.regions_count()) {
                throw StatusError(SEIRGAME_ERROR_MISMATCH,
                                  "checkpoint and scenario region counts differ");
            }
            // The noise streams are keyed by the run seed, so a resumed run
            // keeps the seed it started with.
            if (!opts.has_seed) {
                config.seed = resumed.seed;
            }
            start = std::move(resumed.state);
        }
        config.validate();

        std::optional<std::ofstream> diagnostics;
        std::filesystem::path checkpoint_dir;
        CsvContext diag_ctx = context(sc, "diagnostics", config.seed);
        if (opts.output_dir != nullptr) {
            const auto diag_path = output_path(opts.output_dir, "diagnostics.csv");
            checkpoint_dir = std::filesystem::path(opts.output_dir) / "checkpoints";
            std::filesystem::create_directories(checkpoint_dir);
            const bool append = start.has_value() && std::filesystem::exists(diag_path);
            diagnostics.emplace(diag_path, append ? std::ios::app : std::ios::trunc);
            if (!*diagnostics) {
                throw StatusError(SEIRGAME_ERROR_IO, "cannot write " + diag_path.string());
            }
            if (!append) {
                write_diagnostics_header(*diagnostics, diag_ctx);
            }
        }

        const double horizon = sc.params.cost.horizon;
        auto make_checkpoint = [&](const StageState& state) {
            Checkpoint ckpt;
            ckpt.state = state;
            ckpt.config_digest = sc.digest;
            ckpt.seed = config.seed;
            ckpt.horizon = horizon;
            return ckpt;
        };

        SolverCallbacks callbacks;
        callbacks.on_stage = [&](const StageState& state, const std::vector<StageRecord>& records) {
            if (diagnostics) {
                write_diagnostics_rows(*diagnostics, records, opts.timing != 0);
                diagnostics->flush();
                if (state.stage % checkpoint_every == 0) {
                    save_checkpoint((checkpoint_dir / stage_file(state.stage)).string(),
                                    make_checkpoint(state));
                }
            }
            if (opts.on_stage != nullptr) {
                std::vector<double> losses;
                for (const StageRecord& r : records) {
                    losses.push_back(r.validation_loss);
                }
                opts.on_stage(state.stage, records.empty() ? 0.0 : records.front().convergence_metric,
                              losses.data(), static_cast<int>(losses.size()), opts.user_data);
            }
        };

        SolverResult result = start ? run_solver(config, sc.params, x0, std::move(*start), callbacks)
                                    : run_solver(config, sc.params, x0, callbacks);

        auto handle = std::make_unique<seirgame_profile>();
        handle->checkpoint = make_checkpoint(result.state);
        handle->profile = handle->checkpoint->profile();
        if (opts.output_dir != nullptr) {
            save_checkpoint(output_path(opts.output_dir, "profile.json").string(),
                            *handle->checkpoint);
        }
        *out = handle.release();
        if (result.diagnostics.aborted) {
            return fail(SEIRGAME_ERROR_ABORTED, result.diagnostics.abort_reason);
        }
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_profile_load(const char* checkpoint_path, seirgame_profile** out)
{
    return guarded([&] {
        require(checkpoint_path && out, "profile_load: null argument");
        *out = nullptr;
        auto handle = std::make_unique<seirgame_profile>();
        try {
            handle->checkpoint = load_checkpoint(checkpoint_path);
        }
        catch (const std::runtime_error& e) {
            throw StatusError(SEIRGAME_ERROR_IO, e.what());
        }
        handle->profile = handle->checkpoint->profile();
        *out = handle.release();
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_profile_constant(const seirgame_scenario* scenario, double level,
                                          seirgame_profile** out)
{
    return guarded([&] {
        require(scenario && out, "profile_constant: null argument");
        require(level >= 0.0 && level <= 1.0, "profile_constant: level must lie in [0, 1]");
        *out = nullptr;
        auto handle = std::make_unique<seirgame_profile>();
        handle->profile = PolicyProfile::constant(scenario->scenario.params.regions_count(), level,
                                                  scenario->scenario.params.cost.horizon);
        *out = handle.release();
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_profile_save(const seirgame_profile* profile, const char* path)
{
    return guarded([&] {
        require(profile && path, "profile_save: null argument");
        if (!profile->checkpoint) {
            throw StatusError(SEIRGAME_ERROR_ARGUMENT, "constant profiles have no network state");
        }
        save_checkpoint(path, *profile->checkpoint);
        return SEIRGAME_OK;
    });
}

void seirgame_profile_free(seirgame_profile* profile)
{
    delete profile;
}

int seirgame_profile_players(const seirgame_profile* profile)
{
    return profile ? profile->profile.size() : 0;
}

int seirgame_profile_stage(const seirgame_profile* profile)
{
    return profile && profile->checkpoint ? profile->checkpoint->state.stage : 0;
}

const char* seirgame_profile_digest(const seirgame_profile* profile)
{
    return profile && profile->checkpoint ? profile->checkpoint->config_digest.c_str() : "";
}

uint64_t seirgame_profile_seed(const seirgame_profile* profile)
{
    return profile && profile->checkpoint ? profile->checkpoint->seed : 0;
}

seirgame_status seirgame_profile_evaluate(const seirgame_profile* profile, double t,
                                          const double* state, size_t state_len, double* out,
                                          size_t out_len)
{
    return guarded([&] {
        require(profile && state && out, "profile_evaluate: null argument");
        const auto players = static_cast<size_t>(profile->profile.size());
        require(state_len == 3 * players, "profile_evaluate: state must hold 3N values");
        require(out_len >= players, "profile_evaluate: output buffer too small");
        const MatrixXd column = Eigen::Map<const VectorXd>(state, static_cast<Eigen::Index>(state_len));
        const MatrixXd levels = profile->profile.evaluate(t, column);
        for (size_t n = 0; n < players; ++n) {
            out[n] = levels(static_cast<Eigen::Index>(n), 0);
        }
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_simulate(const seirgame_scenario* scenario,
                                  const seirgame_profile* profile,
                                  const seirgame_run_options* options)
{
    return guarded([&] {
        require(scenario && profile, "simulate: null argument");
        check_digest(scenario, profile, options ? options->force : 0);
        const Scenario& sc = scenario->scenario;
        const int paths = run_paths(sc, options);
        const std::uint64_t seed = run_seed(sc, options);
        require(paths >= 1, "simulate: paths must be positive");
        const PathBatch batch =
            simulate(sc.params, profile->profile, initial_state(sc), sc.grid, paths, seed);
        if (options && options->output_dir) {
            write_output(output_path(options->output_dir, "paths.csv"), [&](std::ostream& o) {
                write_paths_csv(o, batch, context(sc, "paths", seed));
            });
            // Quantile bands need a minimum sample; smaller runs get paths only.
            if (paths >= kMinSummaryPaths) {
                write_output(output_path(options->output_dir, "summary.csv"), [&](std::ostream& o) {
                    write_summary_csv(o, summarize(batch, kMinSummaryPaths),
                                      context(sc, "summary", seed));
                });
            }
        }
        return SEIRGAME_OK;
    });
}

seirgame_status seirgame_evaluate(const seirgame_scenario* scenario,
                                  const seirgame_profile* profile,
                                  const seirgame_run_options* options, seirgame_evaluation* out)
{
    return guarded([&] {
        require(scenario && profile, "evaluate: null argument");
        check_digest(scenario, profile, options ? options->force : 0);
        const Scenario& sc = scenario->scenario;
        const int regions = sc.params.regions_count();
        require(regions <= SEIRGAME_MAX_PLAYERS, "evaluate: too many players for the report");
        const int paths = run_paths(sc, options);
        const std::uint64_t seed = run_seed(sc, options);
        require(paths >= 2, "evaluate: at least two paths are needed for standard errors");
        const VectorXd& x0 = initial_state(sc);

        const PathBatch batch = simulate(sc.params, profile->profile, x0, sc.grid, paths, seed);
        const CostReport costs = cost_report(batch);
        const EquilibriumLabel label = classify(batch, sc.evaluation.threshold);
        const std::vector<double> lockdown = mean_lockdown(batch);

        std::vector<ProbeReport> probes;
        const bool probe = options && options->probe;
        if (probe) {
            for (int n = 0; n < regions; ++n) {
                probes.push_back(exploitability_probe(profile->profile, n,
                                                      default_deviations(profile->profile, n), sc.params,
                                                      x0, sc.grid, paths, seed,
                                                      sc.evaluation.nash_tolerance));
            }
        }

        if (options && options->output_dir) {
            write_output(output_path(options->output_dir, "cost.csv"), [&](std::ostream& o) {
                write_cost_csv(o, costs, context(sc, "cost", seed));
            });
            write_output(output_path(options->output_dir, "classification.csv"),
                         [&](std::ostream& o) {
                             write_classification_csv(o, label, context(sc, "classification", seed));
                         });
            if (probe) {
                write_output(output_path(options->output_dir, "probe.csv"), [&](std::ostream& o) {
                    write_probe_csv(o, probes, context(sc, "probe", seed));
                });
            }
        }

        if (out != nullptr) {
            *out = seirgame_evaluation{};
            out->outcome =
                label.outcome == Outcome::controlled ? SEIRGAME_CONTROLLED : SEIRGAME_OUT_OF_CONTROL;
            out->players = regions;
            out->paths = paths;
            for (int n = 0; n < regions; ++n) {
                out->mean_cost[n] = costs.mean[n];
                out->cost_std_error[n] = costs.std_error[n];
                out->terminal_s[n] = label.terminal_s[n];
                out->mean_lockdown[n] = lockdown[n];
            }
            out->probe_ran = probe ? 1 : 0;
            out->probe_passed = probe ? 1 : 0;
            for (const ProbeReport& r : probes) {
                out->max_reduction[r.player] = r.max_reduction();
                out->max_reduction_std_error[r.player] = r.max_reduction_std_error();
                if (!r.passes()) {
                    out->probe_passed = 0;
                }
            }
        }
        return SEIRGAME_OK;
    });
}

size_t seirgame_verify_suite_count(void)
{
    return verification_suites().size();
}

const char* seirgame_verify_suite_name(size_t index)
{
    const auto& suites = verification_suites();
    return index < suites.size() ? suites[index].name.c_str() : "";
}

const char* seirgame_verify_suite_description(size_t index)
{
    const auto& suites = verification_suites();
    return index < suites.size() ? suites[index].description.c_str() : "";
}

seirgame_status seirgame_verify_run(const char* suite, const char* fault, uint64_t seed,
                                    seirgame_verify_report** out)
{
    return guarded([&] {
        require(suite && out, "verify_run: null argument");
        *out = nullptr;
        VerifyOptions options;
        options.seed = seed;
        options.fault = fault ? fault : "";
        auto report = std::make_unique<seirgame_verify_report>();
        try {
            report->checks = run_verification(suite, options);
        }
        catch (const std::invalid_argument& e) {
            throw StatusError(SEIRGAME_ERROR_VERIFY, e.what());
        }
        *out = report.release();
        return SEIRGAME_OK;
    });
}

size_t seirgame_verify_report_size(const seirgame_verify_report* report)
{
    return report ? report->checks.size() : 0;
}

size_t seirgame_verify_report_failures(const seirgame_verify_report* report)
{
    if (!report) {
        return 0;
    }
    return static_cast<size_t>(std::count_if(report->checks.begin(), report->checks.end(),
                                             [](const CheckResult& c) { return !c.passed; }));
}

seirgame_status seirgame_verify_report_check(const seirgame_verify_report* report, size_t index,
                                             seirgame_check* out)
{
    return guarded([&] {
        require(report && out, "verify_report_check: null argument");
        require(index < report->checks.size(), "verify_report_check: index out of range");
        const CheckResult& c = report->checks[index];
        *out = seirgame_check{c.suite.c_str(), c.check.c_str(), c.detail.c_str(),
                              c.passed ? 1 : 0,  c.measured,      c.tolerance};
        return SEIRGAME_OK;
    });
}

void seirgame_verify_report_free(seirgame_verify_report* report)
{
    delete report;
}

} // extern "C"
