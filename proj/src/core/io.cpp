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
#include "core/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace seirgame
{

namespace
{

using ordered_json = nlohmann::ordered_json;

std::string region_name(const CsvContext& ctx, int n)
{
    return n < static_cast<int>(ctx.region_names.size()) ? ctx.region_names[n]
                                                         : std::to_string(n);
}

ordered_json vector_json(const VectorXd& v)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        out.push_back(v[k]);
    }
    return out;
}

VectorXd vector_from_json(const nlohmann::json& node, const char* what)
{
    if (!node.is_array()) {
        throw std::runtime_error(std::string("checkpoint: ") + what + " must be an array");
    }
    VectorXd out(static_cast<Eigen::Index>(node.size()));
    for (std::size_t k = 0; k < node.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = node[k].get<double>();
    }
    return out;
}

ordered_json optimizer_json(const OptimizerState& state)
{
    ordered_json out;
    out["step"] = state.step;
    out["learning_rate"] = state.learning_rate;
    out["beta1"] = state.beta1;
    out["beta2"] = state.beta2;
    out["epsilon"] = state.epsilon;
    out["first_moment"] = vector_json(state.first_moment);
    out["second_moment"] = vector_json(state.second_moment);
    return out;
}

OptimizerState optimizer_from_json(const nlohmann::json& node)
{
    OptimizerState state;
    state.step = node.at("step").get<long>();
    state.learning_rate = node.at("learning_rate").get<double>();
    state.beta1 = node.at("beta1").get<double>();
    state.beta2 = node.at("beta2").get<double>();
    state.epsilon = node.at("epsilon").get<double>();
    state.first_moment = vector_from_json(node.at("first_moment"), "first_moment");
    state.second_moment = vector_from_json(node.at("second_moment"), "second_moment");
    return state;
}

} // namespace

std::string format_number(double value)
{
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.15g", value);
    return buffer;
}

void write_csv_preamble(std::ostream& out, const CsvContext& ctx)
{
    out << "# seirgame-csv v" << kCsvVersion << " kind=" << ctx.kind << " digest=" << ctx.digest
        << " seed=" << ctx.seed << "\n";
}

void write_paths_csv(std::ostream& out, const PathBatch& batch, const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "path_id,t,region,S,E,I,R,ell,stepwise_cost\n";
    for (int p = 0; p < batch.paths; ++p) {
        for (int k = 0; k < batch.nodes(); ++k) {
            for (int n = 0; n < batch.regions; ++n) {
                out << p << ',' << format_number(batch.time(k)) << ',' << region_name(ctx, n) << ','
                    << format_number(batch.s(p, k, n)) << ',' << format_number(batch.e(p, k, n))
                    << ',' << format_number(batch.i(p, k, n)) << ','
                    << format_number(batch.r(p, k, n)) << ',' << format_number(batch.ell(p, k, n))
                    << ',' << format_number(batch.cost_step(p, k, n)) << '\n';
            }
        }
    }
}

void write_summary_csv(std::ostream& out, const TrajectorySummary& summary, const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "t,region";
    for (const char* var : {"S", "E", "I", "R", "ell"}) {
        for (const char* stat : {"mean", "lo95", "lo50", "hi50", "hi95"}) {
            out << ',' << var << '_' << stat;
        }
    }
    out << '\n';
    for (Eigen::Index k = 0; k < summary.times.size(); ++k) {
        for (std::size_t n = 0; n < summary.regions.size(); ++n) {
            const RegionSummary& r = summary.regions[n];
            out << format_number(summary.times[k]) << ',' << region_name(ctx, static_cast<int>(n));
            for (const SeriesBand* b : {&r.s, &r.e, &r.i, &r.r, &r.ell}) {
                out << ',' << format_number(b->mean[k]) << ',' << format_number(b->lower95[k])
                    << ',' << format_number(b->lower50[k]) << ',' << format_number(b->upper50[k])
                    << ',' << format_number(b->upper95[k]);
            }
            out << '\n';
        }
    }
}

void write_cost_csv(std::ostream& out, const CostReport& report, const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "player,mean_cost,stderr,B,seed\n";
    for (std::size_t n = 0; n < report.mean.size(); ++n) {
        out << region_name(ctx, static_cast<int>(n)) << ',' << format_number(report.mean[n]) << ','
            << format_number(report.std_error[n]) << ',' << report.paths << ',' << report.seed
            << '\n';
    }
}

void write_probe_csv(std::ostream& out, const std::vector<ProbeReport>& reports,
                     const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "player,deviation,cost,reduction,stderr,tolerance,within_tolerance\n";
    for (const ProbeReport& r : reports) {
        out << region_name(ctx, r.player) << ",baseline," << format_number(r.baseline_cost)
            << ",0," << format_number(r.baseline_std_error) << ',' << format_number(r.tolerance)
            << ",1\n";
        for (const DeviationOutcome& d : r.deviations) {
            out << region_name(ctx, r.player) << ',' << d.label << ',' << format_number(d.cost)
                << ',' << format_number(d.reduction) << ',' << format_number(d.std_error) << ','
                << format_number(r.tolerance) << ',' << (d.within_tolerance ? 1 : 0) << '\n';
        }
    }
}

void write_classification_csv(std::ostream& out, const EquilibriumLabel& label,
                              const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "region,initial_s,terminal_s,threshold,label\n";
    for (std::size_t n = 0; n < label.terminal_s.size(); ++n) {
        out << region_name(ctx, static_cast<int>(n)) << ',' << format_number(label.initial_s[n])
            << ',' << format_number(label.terminal_s[n]) << ',' << format_number(label.threshold)
            << ',' << to_string(label.outcome) << '\n';
    }
}

void write_diagnostics_header(std::ostream& out, const CsvContext& ctx)
{
    write_csv_preamble(out, ctx);
    out << "stage,player,train_loss_mean,validation_loss,convergence_metric,wall_time\n";
}

void write_diagnostics_rows(std::ostream& out, const std::vector<StageRecord>& records,
                            bool timing)
{
    for (const StageRecord& r : records) {
        out << r.stage << ',' << r.player << ',' << format_number(r.train_loss_mean) << ','
            << format_number(r.validation_loss) << ',' << format_number(r.convergence_metric)
            << ',' << format_number(timing ? r.wall_time : 0.0) << '\n';
    }
}

PolicyProfile Checkpoint::profile() const
{
    PolicyProfile out = state.profile(horizon);
    out.config_digest = config_digest;
    out.seed = seed;
    return out;
}

nlohmann::ordered_json network_json(const Mlp& net)
{
    ordered_json out;
    out["head"] = to_string(net.head());
    out["dims"] = net.dims();
    out["parameters"] = vector_json(net.parameters());
    return out;
}

Mlp network_from_json(const nlohmann::json& node)
{
    const auto dims = node.at("dims").get<std::vector<int>>();
    Mlp net(dims, output_head_from_string(node.at("head").get<std::string>()));
    const VectorXd params = vector_from_json(node.at("parameters"), "parameters");
    if (params.size() != net.parameter_count()) {
        throw std::runtime_error("checkpoint: parameter count does not match the layer shapes");
    }
    net.set_parameters(params);
    return net;
}

nlohmann::ordered_json checkpoint_json(const Checkpoint& checkpoint)
{
    ordered_json out;
    out["format"] = "seirgame-checkpoint";
    out["version"] = kCheckpointVersion;
    out["stage"] = checkpoint.state.stage;
    out["config_digest"] = checkpoint.config_digest;
    out["seed"] = checkpoint.seed;
    out["horizon"] = checkpoint.horizon;
    ordered_json players = ordered_json::array();
    for (std::size_t n = 0; n < checkpoint.state.players.size(); ++n) {
        const PlayerNets& nets = checkpoint.state.players[n];
        ordered_json p;
        p["player"] = n;
        p["value"] = network_json(nets.value);
        p["policy"] = network_json(nets.policy);
        p["value_optimizer"] = optimizer_json(nets.value_opt);
        p["policy_optimizer"] = optimizer_json(nets.policy_opt);
        players.push_back(std::move(p));
    }
    out["players"] = std::move(players);
    return out;
}

Checkpoint checkpoint_from_json(const nlohmann::json& node)
{
    if (node.value("format", std::string()) != "seirgame-checkpoint") {
        throw std::runtime_error("checkpoint: not a seirgame checkpoint");
    }
    if (node.at("version").get<int>() != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version");
    }
    Checkpoint out;
    out.state.stage = node.at("stage").get<int>();
    out.config_digest = node.at("config_digest").get<std::string>();
    out.seed = node.at("seed").get<std::uint64_t>();
    out.horizon = node.at("horizon").get<double>();
    for (const auto& p : node.at("players")) {
        PlayerNets nets{network_from_json(p.at("value")), network_from_json(p.at("policy")),
                        optimizer_from_json(p.at("value_optimizer")),
                        optimizer_from_json(p.at("policy_optimizer"))};
        if (nets.value_opt.first_moment.size() != nets.value.parameter_count() ||
            nets.policy_opt.first_moment.size() != nets.policy.parameter_count()) {
            throw std::runtime_error("checkpoint: optimizer state does not match the network");
        }
        out.state.players.push_back(std::move(nets));
    }
    return out;
}

void write_file_atomically(const std::string& path, const std::string& contents)
{
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + temp);
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("write failed: " + temp);
        }
    }
    std::filesystem::rename(temp, path);
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint)
{
    write_file_atomically(path, checkpoint_json(checkpoint).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint " + path);
    }
    try {
        return checkpoint_from_json(nlohmann::json::parse(in));
    }
    catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint " + path + ": " + e.what());
    }
}

} // namespace seirgame
