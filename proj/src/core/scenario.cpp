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
#include "core/scenario.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace seirgame
{

namespace
{

namespace fs = std::filesystem;

constexpr int kMaxExtendsDepth = 16;

YAML::Node load_chain(const fs::path& path, int depth)
{
    if (depth > kMaxExtendsDepth) {
        throw ModelError("extends", "chain too deep (cycle?) at " + path.string());
    }
    std::ifstream in(path);
    if (!in) {
        throw ModelError("", "cannot open scenario file " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    YAML::Node node = parse_scenario_tree(text.str());
    if (node["extends"]) {
        const fs::path parent = path.parent_path() / node["extends"].as<std::string>();
        node.remove("extends");
        return merge_trees(load_chain(parent, depth + 1), node);
    }
    return node;
}

std::string join(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

std::string indexed(const std::string& field, std::size_t index)
{
    return field + "[" + std::to_string(index) + "]";
}

// Field readers that report the dotted path of the offending item.
class Reader
{
public:
    Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    Reader child(const std::string& key) const
    {
        return Reader(has(key) ? node_[key] : YAML::Node(), join(path_, key));
    }

    double number(const std::string& key) const
    {
        if (!has(key)) {
            throw ModelError(join(path_, key), "missing required field");
        }
        return as_number(node_[key], join(path_, key));
    }

    double number(const std::string& key, double fallback) const
    {
        return has(key) ? as_number(node_[key], join(path_, key)) : fallback;
    }

    int integer(const std::string& key, int fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const double value = as_number(node_[key], join(path_, key));
        if (value != std::floor(value) || std::abs(value) > 2e9) {
            throw ModelError(join(path_, key), "expected an integer");
        }
        return static_cast<int>(value);
    }

    bool flag(const std::string& key, bool fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        try {
            return node_[key].as<bool>();
        }
        catch (const YAML::Exception&) {
            throw ModelError(join(path_, key), "expected true or false");
        }
    }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        return has(key) ? node_[key].as<std::string>() : fallback;
    }

    std::vector<double> numbers(const std::string& key) const
    {
        if (!has(key)) {
            throw ModelError(join(path_, key), "missing required field");
        }
        return as_numbers(node_[key], join(path_, key));
    }

    /// Scalar broadcast to `count` entries, or a list of exactly `count`.
    VectorXd per_region(const std::string& key, int count, double fallback) const
    {
        if (!has(key)) {
            return VectorXd::Constant(count, fallback);
        }
        const YAML::Node item = node_[key];
        const std::string field = join(path_, key);
        if (item.IsScalar()) {
            return VectorXd::Constant(count, as_number(item, field));
        }
        const std::vector<double> values = as_numbers(item, field);
        if (static_cast<int>(values.size()) != count) {
            throw ModelError(field, "expected one entry per region");
        }
        return Eigen::Map<const VectorXd>(values.data(), count);
    }

    const YAML::Node& node() const { return node_; }
    const std::string& path() const { return path_; }

    static double as_number(const YAML::Node& item, const std::string& field)
    {
        if (!item.IsScalar()) {
            throw ModelError(field, "expected a number");
        }
        try {
            return item.as<double>();
        }
        catch (const YAML::Exception&) {
            throw ModelError(field, "expected a number, got '" + item.Scalar() + "'");
        }
    }

    static std::vector<double> as_numbers(const YAML::Node& item, const std::string& field)
    {
        if (!item.IsSequence()) {
            throw ModelError(field, "expected a list of numbers");
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < item.size(); ++k) {
            out.push_back(as_number(item[k], indexed(field, k)));
        }
        return out;
    }

private:
    YAML::Node node_;
    std::string path_;
};

nlohmann::json to_json(const YAML::Node& node)
{
    switch (node.Type()) {
    case YAML::NodeType::Map: {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& kv : node) {
            out[kv.first.as<std::string>()] = to_json(kv.second);
        }
        return out;
    }
    case YAML::NodeType::Sequence: {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& item : node) {
            out.push_back(to_json(item));
        }
        return out;
    }
    case YAML::NodeType::Scalar: {
        const std::string& text = node.Scalar();
        if (node.Tag() != "!") { // unquoted scalars may be numbers or booleans
            double number = 0.0;
            if (YAML::convert<double>::decode(node, number)) {
                return number;
            }
            bool truth = false;
            if (YAML::convert<bool>::decode(node, truth)) {
                return truth;
            }
        }
        return text;
    }
    default:
        return nullptr;
    }
}

TravelMatrix read_travel(const Reader& travel, int regions)
{
    TravelMatrix out;
    out.allow_outside = travel.flag("allow_outside", false);
    if (travel.has("matrix")) {
        const YAML::Node rows = travel.node()["matrix"];
        const std::string field = join(travel.path(), "matrix");
        if (!rows.IsSequence() || static_cast<int>(rows.size()) != regions) {
            throw ModelError(field, "expected one row per region");
        }
        out.fractions.resize(regions, regions);
        for (int r = 0; r < regions; ++r) {
            const std::vector<double> row = Reader::as_numbers(rows[r], indexed(field, r));
            if (static_cast<int>(row.size()) != regions) {
                throw ModelError(indexed(field, r), "expected one entry per region");
            }
            for (int c = 0; c < regions; ++c) {
                out.fractions(r, c) = row[c];
            }
        }
    }
    else if (travel.has("home_fraction")) {
        const double home = travel.number("home_fraction");
        const double away = regions > 1 ? (1.0 - home) / (regions - 1) : 0.0;
        out.fractions = MatrixXd::Constant(regions, regions, away);
        out.fractions.diagonal().setConstant(home);
    }
    else {
        throw ModelError(join(travel.path(), "matrix"), "missing required field");
    }
    return out;
}

EpiParams read_epidemic(const Reader& epi, const ModelParams& partial)
{
    const int regions = partial.regions_count();
    EpiParams out;
    if (epi.has("calibration")) {
        const Reader cal = epi.child("calibration");
        const Calibration c = calibrate(cal.number("r0"), cal.number("infectious_days"),
                                        cal.number("ifr"), cal.number("latent_days"));
        out.beta = c.beta;
        out.gamma = c.gamma;
        out.lambda = c.lambda;
        out.kappa = c.kappa;
    }
    else {
        out.gamma = epi.number("gamma");
        out.lambda = epi.number("lambda");
        out.kappa = epi.number("kappa");
        out.beta = epi.number("beta", 0.0);
    }
    if (epi.has("beta_matrix")) {
        const YAML::Node rows = epi.node()["beta_matrix"];
        const std::string field = join(epi.path(), "beta_matrix");
        if (!rows.IsSequence() || static_cast<int>(rows.size()) != regions) {
            throw ModelError(field, "expected one row per region");
        }
        out.beta_matrix.resize(regions, regions);
        for (int r = 0; r < regions; ++r) {
            const std::vector<double> row = Reader::as_numbers(rows[r], indexed(field, r));
            if (static_cast<int>(row.size()) != regions) {
                throw ModelError(indexed(field, r), "expected one entry per region");
            }
            for (int c = 0; c < regions; ++c) {
                out.beta_matrix(r, c) = row[c];
            }
        }
    }
    else {
        if (!epi.has("beta") && !epi.has("calibration")) {
            throw ModelError(join(epi.path(), "beta"), "missing required field");
        }
        out.beta_matrix = build_transmission_matrix(out.beta, partial.travel, partial.regions);
    }
    out.theta = epi.number("theta");
    out.sigma_s = epi.per_region("sigma_s", regions, 0.0);
    out.sigma_e = epi.per_region("sigma_e", regions, 0.0);
    out.vaccination = epi.number("vaccination", 0.0);
    return out;
}

SolverConfig read_solver(const Reader& solver, int& checkpoint_every)
{
    SolverConfig out;
    out.stages = solver.integer("stages", out.stages);
    out.sgd_per_stage = solver.integer("sgd_per_stage", out.sgd_per_stage);
    out.batch = solver.integer("batch", out.batch);
    out.time_steps = solver.integer("time_steps", out.time_steps);
    out.learning_rate = solver.number("learning_rate", out.learning_rate);
    out.tau = solver.number("tau", out.tau);
    out.convergence_threshold = solver.number("convergence_threshold", out.convergence_threshold);
    out.seed = static_cast<std::uint64_t>(solver.number("seed", static_cast<double>(out.seed)));
    out.validation_paths = solver.integer("validation_paths", out.validation_paths);
    out.probe_points = solver.integer("probe_points", out.probe_points);
    out.width = solver.integer("width", out.width);
    out.hidden_layers = solver.integer("hidden_layers", out.hidden_layers);
    out.x0_box = solver.number("x0_box", out.x0_box);
    out.zero_init = solver.flag("zero_init", out.zero_init);
    out.workers = solver.integer("workers", out.workers);
    out.divergence_factor = solver.number("divergence_factor", out.divergence_factor);
    out.divergence_patience = solver.integer("divergence_patience", out.divergence_patience);
    checkpoint_every = solver.integer("checkpoint_every", checkpoint_every);
    if (checkpoint_every < 0) {
        throw ModelError("solver.checkpoint_every", "must be >= 0");
    }
    return out;
}

// Shortest text that reads back to the same double.
YAML::Node number(double value)
{
    // Shortest round-trip text; plain decimals for everyday magnitudes.
    char buffer[64];
    const double magnitude = std::abs(value);
    const auto result = magnitude >= 1e-6 && magnitude < 1e15
                            ? std::to_chars(buffer, buffer + sizeof(buffer), value,
                                            std::chars_format::fixed)
                            : std::to_chars(buffer, buffer + sizeof(buffer), value);
    return YAML::Node(std::string(buffer, result.ptr));
}

YAML::Node sequence(const std::vector<double>& values)
{
    YAML::Node node(YAML::NodeType::Sequence);
    for (double v : values) {
        node.push_back(number(v));
    }
    node.SetStyle(YAML::EmitterStyle::Flow);
    return node;
}

YAML::Node sequence(const VectorXd& values)
{
    return sequence(std::vector<double>(values.data(), values.data() + values.size()));
}

YAML::Node matrix_node(const MatrixXd& m)
{
    YAML::Node node(YAML::NodeType::Sequence);
    for (int r = 0; r < m.rows(); ++r) {
        node.push_back(sequence(VectorXd(m.row(r).transpose())));
    }
    return node;
}

} // namespace

YAML::Node parse_scenario_tree(const std::string& text)
{
    try {
        YAML::Node node = YAML::Load(text);
        if (!node || node.IsNull()) {
            return YAML::Node(YAML::NodeType::Map);
        }
        if (!node.IsMap()) {
            throw ModelError("", "scenario document must be a mapping");
        }
        return node;
    }
    catch (const YAML::ParserException& e) {
        throw ModelError("", std::string("YAML syntax error: ") + e.what());
    }
}

YAML::Node load_scenario_tree(const std::string& path)
{
    return load_chain(fs::path(path), 0);
}

YAML::Node merge_trees(const YAML::Node& base, const YAML::Node& overlay)
{
    if (!base || !base.IsMap() || !overlay.IsMap()) {
        return YAML::Clone(overlay);
    }
    YAML::Node out = YAML::Clone(base);
    for (const auto& kv : overlay) {
        const std::string key = kv.first.as<std::string>();
        out[key] = out[key] ? merge_trees(out[key], kv.second) : YAML::Clone(kv.second);
    }
    return out;
}

void set_tree_value(YAML::Node& tree, const std::string& dotted_key, const std::string& yaml_value)
{
    if (dotted_key.empty()) {
        throw ModelError("", "empty override key");
    }
    YAML::Node value;
    try {
        value = YAML::Load(yaml_value);
    }
    catch (const YAML::ParserException& e) {
        throw ModelError(dotted_key, std::string("bad override value: ") + e.what());
    }
    std::vector<std::string> parts;
    std::stringstream stream(dotted_key);
    for (std::string part; std::getline(stream, part, '.');) {
        parts.push_back(part);
    }
    // Walk by value copies: yaml-cpp nodes are handles into the same tree.
    std::vector<YAML::Node> chain{tree};
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        YAML::Node next = chain.back()[parts[k]];
        if (!next || !next.IsMap()) {
            chain.back()[parts[k]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[parts[k]];
        }
        chain.push_back(next);
    }
    chain.back()[parts.back()] = value;
}

Scenario resolve_scenario(const YAML::Node& tree)
{
    const Reader root(tree, "");
    Scenario out;
    out.tree = YAML::Clone(tree);
    out.name = root.text("name", "scenario");

    const Reader regions = root.child("regions");
    for (double p : regions.numbers("populations")) {
        out.params.regions.populations.push_back(p);
    }
    const int count = out.params.regions.count();
    if (regions.has("names")) {
        for (const auto& item : regions.node()["names"]) {
            out.params.regions.names.push_back(item.as<std::string>());
        }
    }
    else {
        for (int n = 0; n < count; ++n) {
            out.params.regions.names.push_back("region" + std::to_string(n + 1));
        }
    }
    out.params.regions.validate();

    out.params.travel = read_travel(root.child("travel"), count);
    out.warnings = out.params.travel.validate();
    out.params.epi = read_epidemic(root.child("epidemic"), out.params);

    const Reader cost = root.child("cost");
    out.params.cost.w = cost.number("w");
    out.params.cost.chi = cost.number("chi");
    out.params.cost.p = cost.number("p");
    out.params.cost.c = cost.number("c");
    out.params.cost.a = cost.number("a");
    out.params.cost.r = cost.number("r", 0.0);
    out.params.cost.eta = cost.number("eta", 0.0);
    out.params.cost.horizon = cost.number("horizon");
    out.params.validate();

    out.solver = read_solver(root.child("solver"), out.checkpoint_every);
    out.grid.horizon = out.params.cost.horizon;
    out.grid.steps = root.child("grid").integer("steps", out.solver.time_steps);
    out.solver.time_steps = out.grid.steps;
    out.grid.validate();
    out.solver.validate();

    if (root.has("initial")) {
        const Reader initial = root.child("initial");
        auto block = [&](const char* key) {
            const std::vector<double> values = initial.numbers(key);
            if (static_cast<int>(values.size()) != count) {
                throw ModelError(join(initial.path(), key), "expected one entry per region");
            }
            return VectorXd(Eigen::Map<const VectorXd>(values.data(), count));
        };
        const StateVector x0 = StateVector::from_blocks(block("s"), block("e"), block("i"));
        if (const auto problems = x0.check(); !problems.empty()) {
            throw ModelError("initial", problems.front());
        }
        out.initial = x0.values();
    }

    const Reader eval = root.child("evaluation");
    out.evaluation.paths = eval.integer("paths", out.evaluation.paths);
    out.evaluation.seed =
        static_cast<std::uint64_t>(eval.number("seed", static_cast<double>(out.evaluation.seed)));
    out.evaluation.threshold = eval.number("threshold", out.evaluation.threshold);
    out.evaluation.nash_tolerance = eval.number("nash_tolerance", out.evaluation.nash_tolerance);
    if (out.evaluation.paths < 2) {
        throw ModelError("evaluation.paths", "must be at least 2");
    }

    out.digest = scenario_digest(tree);
    return out;
}

Scenario load_scenario(const std::string& path)
{
    return resolve_scenario(load_scenario_tree(path));
}

std::string canonical_json(const YAML::Node& node)
{
    return to_json(node).dump();
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string scenario_digest(const YAML::Node& tree)
{
    YAML::Node game(YAML::NodeType::Map);
    for (const char* key : {"regions", "travel", "epidemic", "cost", "grid", "initial"}) {
        if (tree[key]) {
            game[key] = tree[key];
        }
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(game))));
    return buffer;
}

YAML::Node resolved_tree(const Scenario& s)
{
    const ModelParams& p = s.params;
    YAML::Node out(YAML::NodeType::Map);
    out["name"] = s.name;
    out["regions"]["names"] = YAML::Node(p.regions.names);
    out["regions"]["names"].SetStyle(YAML::EmitterStyle::Flow);
    out["regions"]["populations"] = sequence(p.regions.populations);
    out["travel"]["matrix"] = matrix_node(p.travel.fractions);
    out["travel"]["allow_outside"] = p.travel.allow_outside;
    YAML::Node epi = out["epidemic"];
    epi["beta"] = number(p.epi.beta);
    epi["gamma"] = number(p.epi.gamma);
    epi["lambda"] = number(p.epi.lambda);
    epi["kappa"] = number(p.epi.kappa);
    epi["theta"] = number(p.epi.theta);
    epi["sigma_s"] = sequence(p.epi.sigma_s);
    epi["sigma_e"] = sequence(p.epi.sigma_e);
    epi["vaccination"] = number(p.epi.vaccination);
    epi["beta_matrix"] = matrix_node(p.epi.beta_matrix);
    YAML::Node cost = out["cost"];
    cost["w"] = number(p.cost.w);
    cost["chi"] = number(p.cost.chi);
    cost["p"] = number(p.cost.p);
    cost["c"] = number(p.cost.c);
    cost["a"] = number(p.cost.a);
    cost["r"] = number(p.cost.r);
    cost["eta"] = number(p.cost.eta);
    cost["horizon"] = number(p.cost.horizon);
    out["grid"]["steps"] = s.grid.steps;
    if (s.initial) {
        const StateVector x0(*s.initial);
        const int n = x0.regions();
        out["initial"]["s"] = sequence(VectorXd(s.initial->head(n)));
        out["initial"]["e"] = sequence(VectorXd(s.initial->segment(n, n)));
        out["initial"]["i"] = sequence(VectorXd(s.initial->tail(n)));
    }
    if (s.tree["solver"]) {
        out["solver"] = YAML::Clone(s.tree["solver"]);
    }
    if (s.tree["evaluation"]) {
        out["evaluation"] = YAML::Clone(s.tree["evaluation"]);
    }
    return out;
}

std::string emit_yaml(const YAML::Node& node)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << node;
    return std::string(out.c_str()) + "\n";
}

} // namespace seirgame
