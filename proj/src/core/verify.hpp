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
#pragma once

// Built-in oracle suites, runnable from the command line.

#include <cstdint>
#include <string>
#include <vector>

namespace seirgame
{

struct SuiteInfo {
    std::string name;
    std::string description;
};

struct VerifyOptions {
    std::uint64_t seed = 20260417;
    /// Deliberate defect for mutation checks: "" or "mu-sign" (flips the
    /// reduced drift inside the splitting identity).
    std::string fault;
};

struct CheckResult {
    std::string suite;
    std::string check;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

const std::vector<SuiteInfo>& verification_suites();
std::vector<std::string> known_faults();

/// Runs one suite ("all" runs every suite). Throws std::invalid_argument for
/// unknown suite or fault names.
std::vector<CheckResult> run_verification(const std::string& suite,
                                          const VerifyOptions& options = {});

} // namespace seirgame
