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

#ifndef QTOKSIM_UUPUF_H
#define QTOKSIM_UUPUF_H

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtoksim/responder.h"
#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim::uupuf {

inline constexpr size_t kMaxLambda = 12;

/// Unknown-unitary PUF on D = 2^lambda dimensions. The unitary is only
/// reachable through evaluation.
class UuPuf {
   public:
    /// Wraps an explicit unitary. Meant for test doubles and for adversaries
    /// that were granted knowledge of the device.
    static UuPuf from_unitary(UnitaryOp u, std::string id);

    size_t lambda() const { return lambda_; }
    size_t dim() const { return size_t{1} << lambda_; }
    const std::string &id() const { return id_; }

    StateVector evaluate(const StateVector &psi) const;
    DensityMatrix evaluate(const DensityMatrix &rho) const;
    QuantumState evaluate(const QuantumState &s) const;

   private:
    UuPuf(UnitaryOp u, std::string id);
    friend UuPuf qgen_uu(size_t lambda, RngStream &rng);

    size_t lambda_;
    UnitaryOp unitary_;
    std::string id_;
};

/// Haar-random unitary on 2^lambda dimensions, 1 <= lambda <= 12. The id is
/// derived from the stream's (seed, stream id).
UuPuf qgen_uu(size_t lambda, RngStream &rng);

/// rho_out = U rho U^dagger.
DensityMatrix qeval(const UuPuf &puf, const DensityMatrix &rho_in);

/// Replacement channel for the imperfect device model.
struct ContractiveChannel {
    enum class Kind { depolarize, replace_with_pure };
    Kind kind = Kind::depolarize;
    /// Target of replace_with_pure.
    std::optional<StateVector> target;

    static ContractiveChannel depolarizing() { return {}; }
    static ContractiveChannel replacing_with(StateVector s) { return {Kind::replace_with_pure, std::move(s)}; }

    DensityMatrix apply(const DensityMatrix &rho) const;
};

/// E(rho) = (1 - eps) U rho U^dagger + eps E~(rho).
struct PerturbedPuf {
    PerturbedPuf(UuPuf base, double epsilon, ContractiveChannel channel = ContractiveChannel::depolarizing());

    UuPuf base;
    double epsilon;
    ContractiveChannel channel;
};

/// Exact density-matrix mixture. `rng` is unused here and kept so both
/// evaluation modes share a signature.
DensityMatrix perturbed_eval(const PerturbedPuf &p, const DensityMatrix &rho, RngStream &rng);
/// Trajectory mode: with probability eps the replacement channel fires,
/// otherwise the pure output U|psi> is returned.
QuantumState perturbed_sample(const PerturbedPuf &p, const StateVector &psi, RngStream &rng);

struct QuantumCrt {
    struct Entry {
        StateVector challenge;
        /// k2 identical copies of the reference response.
        std::vector<StateVector> response_copies;
    };
    std::vector<Entry> entries;
};

/// `count` Haar-random challenges with `k2` stored copies of each response.
QuantumCrt issue_crt(const UuPuf &puf, size_t count, size_t k2, RngStream &rng);

enum class TestStatus { ok, dimension_mismatch, lost };

struct TestResult {
    bool accept = false;
    double f_hat = 0.0;
    size_t k1 = 0;
    size_t k2 = 0;
    size_t accept_count = 0;
    TestStatus status = TestStatus::ok;
};

inline constexpr double kDefaultTau = 0.9;

/// SWAP-test acceptance probability (1 + <ref|rho|ref>) / 2; equals
/// (1 + F)/2 for pure inputs.
double swap_accept_probability(const QuantumState &response, const StateVector &reference);

/// One SWAP test; sampled from the analytic acceptance law.
bool swap_test(const StateVector &psi, const StateVector &phi, RngStream &rng);
bool swap_test(const QuantumState &response, const StateVector &reference, RngStream &rng);

/// f_hat = max(0, 2 * accepts / r - 1) over r = min(k1, k2) SWAP tests;
/// accepts iff f_hat >= tau.
TestResult test_algorithm(const StateVector &response, const StateVector &reference, size_t k1, size_t k2,
                          double tau, RngStream &rng);
/// Same, pairing the first min(k1, k2) responses with reference copies.
TestResult test_responses(std::span<const QuantumState> responses, const StateVector &reference, size_t k2,
                          double tau, RngStream &rng);

/// Sends the stored challenge to `holder` k1 times and tests the replies
/// against the stored copies. Lost or wrong-dimension replies reject.
TestResult uu_authenticate(const Responder &holder, const QuantumCrt &crt, size_t entry, size_t k1, double tau,
                           RngStream &rng);

Responder honest_holder(UuPuf puf);

/// Any CPTP map on density matrices of a fixed dimension.
using PufChannel = std::function<DensityMatrix(const DensityMatrix &)>;

PufChannel as_channel(const UuPuf &puf);
PufChannel as_channel(const PerturbedPuf &p);

/// Fraction of sampled input pairs with F(in) >= delta_r whose outputs keep
/// F(out) >= delta_r (compared with 1e-9 slack).
double estimate_robustness(const PufChannel &channel, size_t dim, double delta_r, size_t trials, RngStream &rng);
double estimate_robustness(const UuPuf &puf, double delta_r, size_t trials, RngStream &rng);

/// Fraction of sampled input pairs with F(in) <= 1 - delta_c whose outputs
/// keep F(out) <= 1 - delta_c.
double estimate_collision_resistance(const PufChannel &channel, size_t dim, double delta_c, size_t trials,
                                     RngStream &rng);
double estimate_collision_resistance(const UuPuf &puf, double delta_c, size_t trials, RngStream &rng);

/// Haar-averaged output trace distance 1/2 ||U rho U^dag - V rho V^dag||_1
/// over pure inputs. A sampling lower bound for half the diamond distance.
double estimate_uniqueness(const UuPuf &a, const UuPuf &b, size_t trials, RngStream &rng);

/// Trace distance sqrt(1 - |<a|b>|^2) between pure states, accurate near 0.
double pure_trace_distance(const StateVector &a, const StateVector &b);

struct EstimatorReport {
    size_t lambda = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    size_t trials = 0;
    double rate = 0.0;
    uint64_t seed = 0;
};

/// CSV with header `lambda,epsilon,delta,trials,rate,seed`.
std::string estimator_reports_to_csv(std::span<const EstimatorReport> rows);

}  // namespace qtoksim::uupuf

#endif
