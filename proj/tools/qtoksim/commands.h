// Copyright 2026 The qtoksim Authors
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

#ifndef QTOKSIM_TOOLS_COMMANDS_H
#define QTOKSIM_TOOLS_COMMANDS_H

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtoksim/uupuf.h"

namespace qtoksim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flag value or inconsistent arguments; maps to exit code 2.
class UsageError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// `start:stop:step`, inclusive of stop within step rounding. A bare number
/// is a one-point grid.
std::vector<double> parse_grid(std::string_view text);

/// Explicit flag wins, then QTOKSIM_SEED, then 0.
uint64_t resolve_seed(std::optional<uint64_t> flag);

struct DephasingRow {
    double t_us = 0.0;
    double flip_rate = 0.0;
    double analytic_p = 0.0;
};

/// Prepares |+>, dephases for each grid time and measures in the X basis
/// `shots` times per point.
std::vector<DephasingRow> dephasing_curve(double t2_us, double t_max_us, size_t points, size_t shots,
                                          uint64_t seed);
std::string dephasing_csv(const std::vector<DephasingRow> &rows);

enum class Estimator { collision, robustness };

/// One report per epsilon for the depolarizing perturbation of a single
/// Haar-random device. Every point reuses the same sample stream.
std::vector<uupuf::EstimatorReport> epsilon_sweep(size_t lambda, const std::vector<double> &epsilons,
                                                  Estimator estimator, double delta, size_t trials, uint64_t seed);

/// Parses and executes one command line. Never throws; returns an exit code
/// and writes diagnostics to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace qtoksim::cli

#endif
