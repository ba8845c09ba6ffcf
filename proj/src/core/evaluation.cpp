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
#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace seirgame
{

namespace
{

struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

Moments moments(const std::vector<double>& values)
{
    Moments m;
    const auto count = static_cast<double>(values.size());
    if (values.empty()) {
        m.mean = std::numeric_limits<double>::quiet_NaN();
        m.std_error = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    for (double v : values) {
        m.mean += v;
    }
    m.mean /= count;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - m.mean) * (v - m.mean);
        }
        m.std_error = std::sqrt(ss / (count - 1.0) / count);
    }
    return m;
}

double sorted_quantile(const std::vector<double>& sorted, double level)
{
    const double pos = std::clamp(level, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SeriesBand band(const PathBatch& batch, const std::vector<int>& kept,
                double (PathBatch::*get)(int, int, int) const, int n)
{
    const int nodes = batch.nodes();
    SeriesBand out;
    out.mean.resize(nodes);
    out.lower95.resize(nodes);
    out.lower50.resize(nodes);
    out.upper50.resize(nodes);
    out.upper95.resize(nodes);
    std::vector<double> column(kept.size());
    for (int k = 0; k < nodes; ++k) {
        double sum = 0.0;
        for (std::size_t idx = 0; idx < kept.size(); ++idx) {
            column[idx] = (batch.*get)(kept[idx], k, n);
            sum += column[idx];
        }
        out.mean[k] = sum / static_cast<double>(kept.size());
        std::sort(column.begin(), column.end());
        auto q = [&](double level) { return sorted_quantile(column, level); };
        out.lower95[k] = q(0.025);
        out.lower50[k] = q(0.25);
        out.upper50[k] = q(0.75);
        out.upper95[k] = q(0.975);
        // Rounding in the interpolation must not push the mean of a
        // degenerate column outside its band.
        if (column.front() == column.back()) {
            out.mean[k] = column.front();
        }
    }
    return out;
}

std::vector<int> healthy_paths(const PathBatch& batch)
{
    std::vector<int> kept;
    for (int p = 0; p < batch.paths; ++p) {
        if (!batch.failed[p]) {
            kept.push_back(p);
        }
    }
    return kept;
}

std::string constant_label(double level)
{
    std::ostringstream out;
    out.precision(1);
    out << std::fixed << "constant:" << level;
    return out.str();
}

} // namespace

CostReport cost_report(const PathBatch& batch)
{
    CostReport report;
    report.paths = batch.paths;
    report.seed = batch.seed;
    report.failed_paths = batch.failed_count();
    std::vector<double> values;
    for (int n = 0; n < batch.regions; ++n) {
        values.clear();
        for (int p = 0; p < batch.paths; ++p) {
            if (!batch.failed[p]) {
                values.push_back(batch.cost(p, n));
            }
        }
        const Moments m = moments(values);
        report.mean.push_back(m.mean);
        report.std_error.push_back(m.std_error);
    }
    return report;
}

CostReport estimate_cost(const PolicyProfile& profile, const ModelParams& params,
                         const VectorXd& x0, const TimeGrid& grid, int paths, std::uint64_t seed)
{
    if (paths < 2) {
        throw std::invalid_argument("estimate_cost: need at least two paths");
    }
    return cost_report(simulate(params, profile, x0, grid, paths, seed));
}

std::vector<Deviation> default_deviations(const PolicyProfile& profile, int n)
{
    std::vector<Deviation> out;
    for (int step = 0; step <= 10; ++step) {
        const double level = step / 10.0;
        out.push_back({constant_label(level), PlayerPolicy::fixed(level)});
    }
    out.push_back({"learned", profile.players.at(n)});
    return out;
}

double ProbeReport::max_reduction() const
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& d : deviations) {
        best = std::max(best, d.reduction);
    }
    return best;
}

double ProbeReport::max_reduction_std_error() const
{
    double best = -std::numeric_limits<double>::infinity();
    double se = 0.0;
    for (const auto& d : deviations) {
        if (d.reduction > best) {
            best = d.reduction;
            se = d.std_error;
        }
    }
    return se;
}

bool ProbeReport::passes() const
{
    return std::all_of(deviations.begin(), deviations.end(),
                       [](const DeviationOutcome& d) { return d.within_tolerance; });
}

ProbeReport exploitability_probe(const PolicyProfile& profile, int n,
                                 const std::vector<Deviation>& alternatives,
                                 const ModelParams& params, const VectorXd& x0,
                                 const TimeGrid& grid, int paths, std::uint64_t seed,
                                 double relative_tolerance)
{
    if (n < 0 || n >= profile.size()) {
        throw std::out_of_range("exploitability_probe: player index out of range");
    }
    if (paths < 2) {
        throw std::invalid_argument("exploitability_probe: need at least two paths");
    }
    const PathBatch base = simulate(params, profile, x0, grid, paths, seed);
    ProbeReport report;
    report.player = n;
    std::vector<double> base_costs;
    for (int p = 0; p < paths; ++p) {
        if (!base.failed[p]) {
            base_costs.push_back(base.cost(p, n));
        }
    }
    const Moments base_moments = moments(base_costs);
    report.baseline_cost = base_moments.mean;
    report.baseline_std_error = base_moments.std_error;
    report.tolerance = relative_tolerance * std::abs(report.baseline_cost);

    for (const Deviation& alt : alternatives) {
        const PathBatch dev =
            simulate(params, profile.with_player(n, alt.policy), x0, grid, paths, seed);
        std::vector<double> diffs;
        std::vector<double> costs;
        for (int p = 0; p < paths; ++p) {
            if (!base.failed[p] && !dev.failed[p]) {
                diffs.push_back(base.cost(p, n) - dev.cost(p, n));
                costs.push_back(dev.cost(p, n));
            }
        }
        const Moments d = moments(diffs);
        DeviationOutcome outcome;
        outcome.label = alt.label;
        outcome.cost = moments(costs).mean;
        outcome.reduction = d.mean;
        outcome.std_error = d.std_error;
        outcome.within_tolerance = d.mean <= report.tolerance + 2.0 * d.std_error;
        report.deviations.push_back(outcome);
    }
    return report;
}

double empirical_quantile(std::vector<double> values, double level)
{
    if (values.empty()) {
        throw std::invalid_argument("empirical_quantile: no values");
    }
    std::sort(values.begin(), values.end());
    return sorted_quantile(values, level);
}

TrajectorySummary summarize(const PathBatch& batch, int min_paths)
{
    const std::vector<int> kept = healthy_paths(batch);
    if (static_cast<int>(kept.size()) < std::max(min_paths, 1)) {
        throw std::invalid_argument("summarize: need at least " + std::to_string(min_paths) +
                                    " healthy paths");
    }
    TrajectorySummary out;
    out.paths = static_cast<int>(kept.size());
    out.times.resize(batch.nodes());
    for (int k = 0; k < batch.nodes(); ++k) {
        out.times[k] = batch.time(k);
    }
    for (int n = 0; n < batch.regions; ++n) {
        RegionSummary region;
        region.s = band(batch, kept, &PathBatch::s, n);
        region.e = band(batch, kept, &PathBatch::e, n);
        region.i = band(batch, kept, &PathBatch::i, n);
        region.r = band(batch, kept, &PathBatch::r, n);
        region.ell = band(batch, kept, &PathBatch::ell, n);
        out.regions.push_back(std::move(region));
    }
    return out;
}

const char* to_string(Outcome outcome)
{
    return outcome == Outcome::controlled ? "controlled" : "out_of_control";
}

EquilibriumLabel classify(const PathBatch& batch, double threshold)
{
    const std::vector<int> kept = healthy_paths(batch);
    if (kept.empty()) {
        throw std::invalid_argument("classify: no healthy paths");
    }
    EquilibriumLabel label;
    label.threshold = threshold;
    for (int n = 0; n < batch.regions; ++n) {
        double initial = 0.0;
        double terminal = 0.0;
        for (int p : kept) {
            initial += batch.s(p, 0, n);
            terminal += batch.s(p, batch.steps, n);
        }
        label.initial_s.push_back(initial / static_cast<double>(kept.size()));
        label.terminal_s.push_back(terminal / static_cast<double>(kept.size()));
        if (label.terminal_s.back() < threshold * label.initial_s.back()) {
            label.outcome = Outcome::out_of_control;
        }
    }
    return label;
}

std::vector<double> mean_lockdown(const PathBatch& batch)
{
    const std::vector<int> kept = healthy_paths(batch);
    std::vector<double> out(batch.regions, 0.0);
    if (kept.empty()) {
        return out;
    }
    for (int n = 0; n < batch.regions; ++n) {
        double sum = 0.0;
        for (int p : kept) {
            for (int k = 0; k < batch.steps; ++k) {
                sum += batch.ell(p, k, n);
            }
        }
        out[n] = sum / (static_cast<double>(kept.size()) * batch.steps);
    }
    return out;
}

} // namespace seirgame
