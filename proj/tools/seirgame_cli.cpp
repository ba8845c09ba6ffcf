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

// Command-line front end. Talks to the library only through the C API.

#include "seirgame/seirgame.h"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace
{

enum ExitCode {
    kSuccess = 0,
    kFailure = 1,
    kConfigError = 2,
    kMismatch = 3,
    kSolverAbort = 4,
    kVerifyFailure = 5,
};

struct ScenarioDeleter {
    void operator()(seirgame_scenario* s) const { seirgame_scenario_free(s); }
};
struct ProfileDeleter {
    void operator()(seirgame_profile* p) const { seirgame_profile_free(p); }
};
struct ReportDeleter {
    void operator()(seirgame_verify_report* r) const { seirgame_verify_report_free(r); }
};
using ScenarioPtr = std::unique_ptr<seirgame_scenario, ScenarioDeleter>;
using ProfilePtr = std::unique_ptr<seirgame_profile, ProfileDeleter>;
using ReportPtr = std::unique_ptr<seirgame_verify_report, ReportDeleter>;

// Carries an exit code to main.
struct Exit {
    int code;
};

int exit_code(seirgame_status status)
{
    switch (status) {
    case SEIRGAME_OK:
        return kSuccess;
    case SEIRGAME_ERROR_ARGUMENT:
    case SEIRGAME_ERROR_CONFIG:
        return kConfigError;
    case SEIRGAME_ERROR_MISMATCH:
        return kMismatch;
    case SEIRGAME_ERROR_ABORTED:
        return kSolverAbort;
    case SEIRGAME_ERROR_VERIFY:
        return kVerifyFailure;
    default:
        return kFailure;
    }
}

void check(seirgame_status status, const std::string& what)
{
    if (status != SEIRGAME_OK) {
        std::cerr << "seirgame " << what << ": " << seirgame_last_error() << " ("
                  << seirgame_status_name(status) << ")\n";
        throw Exit{exit_code(status)};
    }
}

std::string utc_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string json_string(const std::string& text)
{
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buffer[8];
                std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                out += buffer;
            }
            else {
                out += c;
            }
        }
    }
    return out + "\"";
}

// Common inputs of the scenario-driven subcommands.
struct ScenarioArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string out_dir;
};

void add_scenario_args(CLI::App* cmd, ScenarioArgs& args)
{
    cmd->add_option("config", args.config, "Scenario file (YAML)")->required();
    cmd->add_option("--set", args.overrides, "Override a field, e.g. --set cost.a=5")
        ->take_all();
    cmd->add_option("-o,--out", args.out_dir,
                    "Output directory (default: $SEIRGAME_OUTPUT_ROOT or ./runs, then "
                    "<scenario>/<command>)");
}

ScenarioPtr open_scenario(const ScenarioArgs& args)
{
    seirgame_scenario* raw = nullptr;
    check(seirgame_scenario_load(args.config.c_str(), &raw), "config");
    ScenarioPtr scenario(raw);
    for (const std::string& item : args.overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "seirgame config: --set expects key=value, got '" << item << "'\n";
            throw Exit{kConfigError};
        }
        check(seirgame_scenario_set(scenario.get(), item.substr(0, eq).c_str(),
                                    item.substr(eq + 1).c_str()),
              "config");
    }
    for (size_t k = 0; k < seirgame_scenario_warning_count(scenario.get()); ++k) {
        std::cerr << "warning: " << seirgame_scenario_warning(scenario.get(), k) << "\n";
    }
    return scenario;
}

fs::path output_dir(const ScenarioArgs& args, const seirgame_scenario* scenario,
                    const std::string& command)
{
    if (!args.out_dir.empty()) {
        return args.out_dir;
    }
    const char* root = std::getenv("SEIRGAME_OUTPUT_ROOT");
    fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("runs");
    std::string name = seirgame_scenario_name(scenario);
    if (name.empty()) {
        name = fs::path(args.config).stem().string();
    }
    return base / name / command;
}

struct Manifest {
    std::string command;
    std::string config;
    std::string digest;
    std::optional<std::uint64_t> seed;
    std::string started;
    std::vector<std::string> files;
};

void write_manifest(const fs::path& dir, const Manifest& m)
{
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << "{\n"
        << "  \"artifact\": \"seirgame-run\",\n"
        << "  \"artifact_version\": " << json_string(seirgame_version()) << ",\n"
        << "  \"command\": " << json_string(m.command) << ",\n"
        << "  \"config\": " << json_string(m.config) << ",\n"
        << "  \"config_digest\": " << json_string(m.digest) << ",\n"
        << "  \"seed\": " << (m.seed ? std::to_string(*m.seed) : std::string("null")) << ",\n"
        << "  \"started\": " << json_string(m.started) << ",\n"
        << "  \"finished\": " << json_string(utc_now()) << ",\n"
        << "  \"files\": [";
    std::vector<std::string> present;
    for (const std::string& f : m.files) {
        if (fs::exists(dir / f)) {
            present.push_back(f);
        }
    }
    for (size_t k = 0; k < present.size(); ++k) {
        out << (k ? ", " : "") << json_string(present[k]);
    }
    out << "]\n}\n";
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateArgs {
    ScenarioArgs scenario;
    std::string output;
};

int cmd_calibrate(const CalibrateArgs& args)
{
    const std::string started = utc_now();
    ScenarioPtr scenario = open_scenario(args.scenario);
    char* text = nullptr;
    check(seirgame_scenario_resolved_yaml(scenario.get(), &text), "calibrate");
    const std::string resolved(text);
    seirgame_string_free(text);

    const fs::path dir = output_dir(args.scenario, scenario.get(), "calibrate");
    const fs::path file = args.output.empty() ? dir / "resolved.yaml" : fs::path(args.output);
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
    std::ofstream(file, std::ios::trunc) << resolved;
    std::cout << resolved;
    std::cerr << "wrote " << file.string() << " (digest " << seirgame_scenario_digest(scenario.get())
              << ")\n";
    if (args.output.empty()) {
        write_manifest(dir, {"calibrate", args.scenario.config,
                             seirgame_scenario_digest(scenario.get()), std::nullopt, started,
                             {"resolved.yaml"}});
    }
    return kSuccess;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
    ScenarioArgs scenario;
    int stages = 0;
    int batch = 0;
    int workers = 0;
    int checkpoint_every = 0;
    std::optional<std::uint64_t> seed;
    std::string resume;
    bool timing = false;
    bool degenerate = false;
    bool force = false;
    bool quiet = false;
};

void print_stage(int stage, double metric, const double* losses, int players, void* user)
{
    if (*static_cast<bool*>(user)) {
        return;
    }
    std::cerr << "stage " << stage << " metric " << metric;
    for (int n = 0; n < players; ++n) {
        std::cerr << " val[" << n << "] " << losses[n];
    }
    std::cerr << "\n";
}

int cmd_solve(SolveArgs args)
{
    const std::string started = utc_now();
    ScenarioPtr scenario = open_scenario(args.scenario);
    if (args.degenerate) {
        // Zero running cost: V = 0 and the best response is 0 everywhere. The
        // networks start at zero and train with a large step so one stage
        // suffices.
        for (const auto& [key, value] :
             std::vector<std::pair<const char*, const char*>>{{"cost.w", "0"},
                                                              {"cost.a", "0"},
                                                              {"cost.eta", "0"},
                                                              {"solver.zero_init", "true"},
                                                              {"solver.learning_rate", "0.2"},
                                                              {"solver.sgd_per_stage", "200"}}) {
            check(seirgame_scenario_set(scenario.get(), key, value), "config");
        }
    }
    const fs::path dir = output_dir(args.scenario, scenario.get(), "solve");
    const std::string dir_text = dir.string();

    seirgame_solve_options options;
    seirgame_solve_options_init(&options);
    options.stages = args.stages;
    options.batch = args.batch;
    options.workers = args.workers;
    options.checkpoint_every = args.checkpoint_every;
    if (args.seed) {
        options.seed = *args.seed;
        options.has_seed = 1;
    }
    options.output_dir = dir_text.c_str();
    options.resume_path = args.resume.empty() ? nullptr : args.resume.c_str();
    options.force = args.force ? 1 : 0;
    options.timing = args.timing ? 1 : 0;
    options.on_stage = print_stage;
    options.user_data = &args.quiet;

    seirgame_profile* raw = nullptr;
    const seirgame_status status = seirgame_solve(scenario.get(), &options, &raw);
    ProfilePtr profile(raw);
    std::vector<std::string> files{"diagnostics.csv", "profile.json"};
    std::optional<std::uint64_t> seed;
    if (profile) {
        seed = seirgame_profile_seed(profile.get());
    }
    write_manifest(dir, {"solve", args.scenario.config, seirgame_scenario_digest(scenario.get()),
                         seed, started, files});
    check(status, "solve");
    std::cout << "profile " << (dir / "profile.json").string() << " stage "
              << seirgame_profile_stage(profile.get()) << "\n";
    return kSuccess;
}

// ---- simulate / evaluate --------------------------------------------------

struct RunArgs {
    ScenarioArgs scenario;
    std::string profile;
    std::string fixed_policy;
    int paths = 0;
    std::optional<std::uint64_t> seed;
    bool force = false;
    bool probe = false;
};

double parse_fixed_policy(const std::string& text)
{
    // Accepts "0.3" or "ell=0.3".
    const auto eq = text.find('=');
    const std::string number = eq == std::string::npos ? text : text.substr(eq + 1);
    try {
        size_t used = 0;
        const double level = std::stod(number, &used);
        if (used == number.size()) {
            return level;
        }
    }
    catch (const std::exception&) {
    }
    std::cerr << "seirgame: --fixed-policy expects a number in [0, 1], got '" << text << "'\n";
    throw Exit{kConfigError};
}

ProfilePtr open_profile(const RunArgs& args, const seirgame_scenario* scenario)
{
    seirgame_profile* raw = nullptr;
    if (!args.fixed_policy.empty()) {
        check(seirgame_profile_constant(scenario, parse_fixed_policy(args.fixed_policy), &raw),
              "fixed-policy");
    }
    else if (!args.profile.empty()) {
        check(seirgame_profile_load(args.profile.c_str(), &raw), "profile");
    }
    else {
        std::cerr << "seirgame: give --profile <checkpoint> or --fixed-policy <level>\n";
        throw Exit{kConfigError};
    }
    return ProfilePtr(raw);
}

seirgame_run_options run_options(const RunArgs& args, const std::string& dir)
{
    seirgame_run_options options{};
    options.paths = args.paths;
    if (args.seed) {
        options.seed = *args.seed;
        options.has_seed = 1;
    }
    options.force = args.force ? 1 : 0;
    options.probe = args.probe ? 1 : 0;
    options.output_dir = dir.c_str();
    return options;
}

int cmd_simulate(const RunArgs& args)
{
    const std::string started = utc_now();
    ScenarioPtr scenario = open_scenario(args.scenario);
    ProfilePtr profile = open_profile(args, scenario.get());
    const fs::path dir = output_dir(args.scenario, scenario.get(), "simulate");
    const std::string dir_text = dir.string();
    const seirgame_run_options options = run_options(args, dir_text);
    check(seirgame_simulate(scenario.get(), profile.get(), &options), "simulate");
    write_manifest(dir, {"simulate", args.scenario.config, seirgame_scenario_digest(scenario.get()),
                         args.seed, started, {"paths.csv", "summary.csv"}});
    std::cout << "wrote " << (dir / "paths.csv").string() << "\n";
    return kSuccess;
}

int cmd_evaluate(const RunArgs& args)
{
    const std::string started = utc_now();
    ScenarioPtr scenario = open_scenario(args.scenario);
    ProfilePtr profile = open_profile(args, scenario.get());
    const fs::path dir = output_dir(args.scenario, scenario.get(), "evaluate");
    const std::string dir_text = dir.string();
    const seirgame_run_options options = run_options(args, dir_text);
    seirgame_evaluation result{};
    check(seirgame_evaluate(scenario.get(), profile.get(), &options, &result), "evaluate");
    write_manifest(dir, {"evaluate", args.scenario.config, seirgame_scenario_digest(scenario.get()),
                         args.seed, started,
                         {"cost.csv", "classification.csv", "probe.csv"}});

    std::cout << "classification "
              << (result.outcome == SEIRGAME_CONTROLLED ? "controlled" : "out_of_control") << "\n";
    for (int n = 0; n < result.players; ++n) {
        std::cout << "player " << n << " cost " << result.mean_cost[n] << " +- "
                  << result.cost_std_error[n] << " terminal_s " << result.terminal_s[n]
                  << " mean_lockdown " << result.mean_lockdown[n];
        if (result.probe_ran) {
            std::cout << " max_reduction " << result.max_reduction[n] << " +- "
                      << result.max_reduction_std_error[n];
        }
        std::cout << "\n";
    }
    if (result.probe_ran) {
        std::cout << "probe " << (result.probe_passed ? "within tolerance" : "deviation found")
                  << "\n";
    }
    return kSuccess;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
    std::string suite = "all";
    bool list = false;
    std::string fault;
    std::uint64_t seed = 20260417;
    std::string out_file;
};

int cmd_verify(const VerifyArgs& args)
{
    if (args.list) {
        for (size_t k = 0; k < seirgame_verify_suite_count(); ++k) {
            std::cout << seirgame_verify_suite_name(k) << "\t"
                      << seirgame_verify_suite_description(k) << "\n";
        }
        return kSuccess;
    }
    seirgame_verify_report* raw = nullptr;
    check(seirgame_verify_run(args.suite.c_str(), args.fault.empty() ? nullptr : args.fault.c_str(),
                              args.seed, &raw),
          "verify");
    ReportPtr report(raw);

    std::ostringstream table;
    table << "suite,check,result,measured,tolerance,detail\n";
    std::vector<std::string> failing;
    for (size_t k = 0; k < seirgame_verify_report_size(report.get()); ++k) {
        seirgame_check c{};
        check(seirgame_verify_report_check(report.get(), k, &c), "verify");
        std::ostringstream measured;
        measured << std::setprecision(6) << c.measured << "," << c.tolerance;
        table << c.suite << "," << json_string(c.check) << "," << (c.passed ? "PASS" : "FAIL")
              << "," << measured.str() << "," << json_string(c.detail) << "\n";
        if (!c.passed) {
            failing.push_back(std::string(c.suite) + " / " + c.check);
        }
    }
    std::cout << table.str();
    if (!args.out_file.empty()) {
        std::ofstream(args.out_file, std::ios::trunc) << table.str();
    }
    if (!failing.empty()) {
        std::cerr << failing.size() << " check(s) failed:\n";
        for (const std::string& f : failing) {
            std::cerr << "  " << f << "\n";
        }
        return kVerifyFailure;
    }
    std::cerr << "all " << seirgame_verify_report_size(report.get()) << " checks passed\n";
    return kSuccess;
}

// ---- info -----------------------------------------------------------------

struct InfoArgs {
    ScenarioArgs scenario;
    std::string profile;
};

int cmd_info(const InfoArgs& args)
{
    ScenarioPtr scenario = open_scenario(args.scenario);
    std::cout << "seirgame " << seirgame_version() << "\n"
              << "scenario " << seirgame_scenario_name(scenario.get()) << "\n"
              << "digest " << seirgame_scenario_digest(scenario.get()) << "\n"
              << "regions " << seirgame_scenario_regions(scenario.get()) << "\n"
              << "initial " << (seirgame_scenario_has_initial(scenario.get()) ? "set" : "missing")
              << "\n";
    if (!args.profile.empty()) {
        seirgame_profile* raw = nullptr;
        check(seirgame_profile_load(args.profile.c_str(), &raw), "profile");
        ProfilePtr profile(raw);
        const std::string digest = seirgame_profile_digest(profile.get());
        std::cout << "profile stage " << seirgame_profile_stage(profile.get()) << " seed "
                  << seirgame_profile_seed(profile.get()) << " digest " << digest
                  << (digest == seirgame_scenario_digest(scenario.get()) ? " (matches)"
                                                                         : " (differs)")
                  << "\n";
    }
    return kSuccess;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-region SEIR lockdown games: equilibrium solver and evaluation"};
    app.set_version_flag("--version", std::string(seirgame_version()));
    app.require_subcommand(1);

    CalibrateArgs calibrate;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Write the fully resolved parameter file");
    add_scenario_args(calibrate_cmd, calibrate.scenario);
    calibrate_cmd->add_option("--output", calibrate.output, "Resolved file path");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Train the equilibrium policy profile");
    add_scenario_args(solve_cmd, solve.scenario);
    solve_cmd->add_option("--stages", solve.stages, "Fictitious-play stages to run")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--batch", solve.batch, "Paths per SGD step")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--seed", solve.seed, "Base seed");
    solve_cmd->add_option("--checkpoint-every", solve.checkpoint_every, "Stages between checkpoints")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--resume", solve.resume, "Continue from a checkpoint file")
        ->check(CLI::ExistingFile);
    solve_cmd->add_option("--workers", solve.workers, "Player threads")->check(CLI::PositiveNumber);
    solve_cmd->add_flag("--timing", solve.timing, "Record wall times in diagnostics.csv");
    solve_cmd->add_flag("--degenerate-zero-cost", solve.degenerate,
                        "Zero all running costs (oracle run: V must vanish)");
    solve_cmd->add_flag("--force", solve.force, "Resume even if the scenario digest differs");
    solve_cmd->add_flag("-q,--quiet", solve.quiet, "No per-stage progress");

    RunArgs simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Sample paths under a profile");
    RunArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Costs, classification and probe");
    for (auto [cmd, args] : {std::pair{simulate_cmd, &simulate}, std::pair{evaluate_cmd, &evaluate}}) {
        add_scenario_args(cmd, args->scenario);
        auto* profile = cmd->add_option("--profile", args->profile, "Profile checkpoint")
                            ->check(CLI::ExistingFile);
        cmd->add_option("--fixed-policy", args->fixed_policy,
                        "Constant lockdown for every player, e.g. 0 or ell=0.5")
            ->excludes(profile);
        cmd->add_option("--paths", args->paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", args->seed, "Simulation seed");
        cmd->add_flag("--force", args->force, "Ignore a profile/scenario digest mismatch");
    }
    evaluate_cmd->add_flag("--probe", evaluate.probe, "Unilateral constant-deviation probe");

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run the built-in oracle suites");
    verify_cmd->add_option("suite", verify.suite, "Suite name or 'all'");
    verify_cmd->add_flag("--list", verify.list, "List suites without running them");
    verify_cmd->add_option("--inject-fault", verify.fault, "Deliberate defect (mutation check)");
    verify_cmd->add_option("--seed", verify.seed, "Seed for the randomized instances");
    verify_cmd->add_option("--report", verify.out_file, "Also write the CSV report here");

    InfoArgs info;
    auto* info_cmd = app.add_subcommand("info", "Show scenario digest and profile provenance");
    add_scenario_args(info_cmd, info.scenario);
    info_cmd->add_option("--profile", info.profile, "Profile checkpoint")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (calibrate_cmd->parsed()) {
            return cmd_calibrate(calibrate);
        }
        if (solve_cmd->parsed()) {
            return cmd_solve(solve);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(simulate);
        }
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(evaluate);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(verify);
        }
        if (info_cmd->parsed()) {
            return cmd_info(info);
        }
    }
    catch (const Exit& e) {
        return e.code;
    }
    catch (const std::exception& e) {
        std::cerr << "seirgame: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
