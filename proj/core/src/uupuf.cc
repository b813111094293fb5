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

#include "qtoksim/uupuf.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qtoksim/format.h"
#include "qtoksim/ops.h"

namespace qtoksim::uupuf {

namespace {

// Slack for comparing fidelities against thresholds; covers roundoff only.
constexpr double kThresholdSlack = 1e-9;

std::string make_id(uint64_t seed, uint64_t stream_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "uu-%016llx",
                  static_cast<unsigned long long>(mix64(seed ^ mix64(stream_id))));
    return buf;
}

struct InputPair {
    StateVector a;
    StateVector b;
};

// Pure pair with |<a|b>|^2 drawn uniformly from [f_lo, f_hi]:
// b = cos(t) a + sin(t) c with c a Haar state orthogonal to a.
InputPair sample_pair(size_t dim, double f_lo, double f_hi, RngStream &rng) {
    if (dim < 2) {
        throw std::invalid_argument("input pairs need dimension >= 2");
    }
    StateVector a = haar_state(dim, rng);
    for (int attempt = 0; attempt < 100; attempt++) {
        StateVector c = haar_state(dim, rng);
        Eigen::VectorXcd perp = c.amplitudes() - a.amplitudes().dot(c.amplitudes()) * a.amplitudes();
        if (perp.norm() < 1e-8) {
            continue;
        }
        perp.normalize();
        double f = rng.uniform(f_lo, f_hi);
        double ct = std::sqrt(f);
        double st = std::sqrt(std::max(0.0, 1.0 - f));
        return InputPair{a, StateVector::normalized(ct * a.amplitudes() + st * perp)};
    }
    throw std::runtime_error("input pair calibration failed after 100 resamples");
}

void require_unit_interval(double v, const char *what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

}  // namespace

UuPuf::UuPuf(UnitaryOp u, std::string id)
    : lambda_(qubit_count_for_dim(u.dim())), unitary_(std::move(u)), id_(std::move(id)) {
}

UuPuf UuPuf::from_unitary(UnitaryOp u, std::string id) {
    return UuPuf(std::move(u), std::move(id));
}

StateVector UuPuf::evaluate(const StateVector &psi) const {
    return apply_unitary(unitary_, psi);
}

DensityMatrix UuPuf::evaluate(const DensityMatrix &rho) const {
    return apply_unitary(unitary_, rho);
}

QuantumState UuPuf::evaluate(const QuantumState &s) const {
    return apply_unitary(unitary_, s);
}

UuPuf qgen_uu(size_t lambda, RngStream &rng) {
    if (lambda < 1 || lambda > kMaxLambda) {
        throw std::invalid_argument("qgen_uu: lambda must lie in [1, 12]");
    }
    std::string id = make_id(rng.seed(), rng.stream_id());
    return UuPuf(haar_unitary(size_t{1} << lambda, rng), std::move(id));
}

DensityMatrix qeval(const UuPuf &puf, const DensityMatrix &rho_in) {
    return puf.evaluate(rho_in);
}

DensityMatrix ContractiveChannel::apply(const DensityMatrix &rho) const {
    if (kind == Kind::depolarize) {
        return DensityMatrix::maximally_mixed(rho.dim());
    }
    if (!target || target->dim() != rho.dim()) {
        throw std::invalid_argument("ContractiveChannel: replacement state has the wrong dimension");
    }
    return DensityMatrix::from_pure(*target);
}

PerturbedPuf::PerturbedPuf(UuPuf base_, double epsilon_, ContractiveChannel channel_)
    : base(std::move(base_)), epsilon(epsilon_), channel(std::move(channel_)) {
    require_unit_interval(epsilon, "PerturbedPuf: epsilon");
    if (channel.kind == ContractiveChannel::Kind::replace_with_pure &&
        (!channel.target || channel.target->dim() != base.dim())) {
        throw std::invalid_argument("PerturbedPuf: replacement state has the wrong dimension");
    }
}

DensityMatrix perturbed_eval(const PerturbedPuf &p, const DensityMatrix &rho, RngStream &) {
    if (rho.dim() != p.base.dim()) {
        throw std::invalid_argument("perturbed_eval: dimension mismatch");
    }
    Eigen::MatrixXcd m =
        (1.0 - p.epsilon) * p.base.evaluate(rho).matrix() + p.epsilon * p.channel.apply(rho).matrix();
    return DensityMatrix::trusted(std::move(m));
}

QuantumState perturbed_sample(const PerturbedPuf &p, const StateVector &psi, RngStream &rng) {
    if (psi.dim() != p.base.dim()) {
        throw std::invalid_argument("perturbed_sample: dimension mismatch");
    }
    if (rng.bernoulli(p.epsilon)) {
        return p.channel.apply(DensityMatrix::from_pure(psi));
    }
    return p.base.evaluate(psi);
}

QuantumCrt issue_crt(const UuPuf &puf, size_t count, size_t k2, RngStream &rng) {
    if (count == 0 || k2 == 0) {
        throw std::invalid_argument("issue_crt: count and k2 must be positive");
    }
    QuantumCrt crt;
    for (size_t i = 0; i < count; i++) {
        StateVector challenge = haar_state(puf.dim(), rng);
        StateVector response = puf.evaluate(challenge);
        crt.entries.push_back({challenge, std::vector<StateVector>(k2, response)});
    }
    return crt;
}

double swap_accept_probability(const QuantumState &response, const StateVector &reference) {
    if (state_dim(response) != reference.dim()) {
        throw std::invalid_argument("swap_test: dimension mismatch");
    }
    return 0.5 * (1.0 + fidelity(QuantumState{reference}, response));
}

bool swap_test(const QuantumState &response, const StateVector &reference, RngStream &rng) {
    return rng.bernoulli(swap_accept_probability(response, reference));
}

bool swap_test(const StateVector &psi, const StateVector &phi, RngStream &rng) {
    return swap_test(QuantumState{psi}, phi, rng);
}

TestResult test_responses(std::span<const QuantumState> responses, const StateVector &reference, size_t k2,
                          double tau, RngStream &rng) {
    if (responses.empty() || k2 == 0) {
        throw std::invalid_argument("test_algorithm: k1 and k2 must be positive");
    }
    require_unit_interval(tau, "test_algorithm: tau");
    TestResult r;
    r.k1 = responses.size();
    r.k2 = k2;
    const size_t rounds = std::min(r.k1, k2);
    for (size_t i = 0; i < rounds; i++) {
        if (swap_test(responses[i], reference, rng)) {
            r.accept_count++;
        }
    }
    r.f_hat = std::max(0.0, 2.0 * static_cast<double>(r.accept_count) / static_cast<double>(rounds) - 1.0);
    r.accept = r.f_hat >= tau;
    return r;
}

TestResult test_algorithm(const StateVector &response, const StateVector &reference, size_t k1, size_t k2,
                          double tau, RngStream &rng) {
    if (k1 == 0) {
        throw std::invalid_argument("test_algorithm: k1 and k2 must be positive");
    }
    std::vector<QuantumState> copies(k1, QuantumState{response});
    return test_responses(copies, reference, k2, tau, rng);
}

TestResult uu_authenticate(const Responder &holder, const QuantumCrt &crt, size_t entry, size_t k1, double tau,
                           RngStream &rng) {
    if (entry >= crt.entries.size()) {
        throw std::out_of_range("uu_authenticate: no such CRT entry");
    }
    if (k1 == 0) {
        throw std::invalid_argument("uu_authenticate: k1 must be positive");
    }
    const auto &e = crt.entries[entry];
    std::vector<QuantumState> replies;
    replies.reserve(k1);
    for (size_t i = 0; i < k1; i++) {
        auto reply = holder(e.challenge, rng);
        TestResult failed;
        failed.k1 = k1;
        failed.k2 = e.response_copies.size();
        if (!reply) {
            failed.status = TestStatus::lost;
            return failed;
        }
        if (state_dim(*reply) != e.challenge.dim()) {
            failed.status = TestStatus::dimension_mismatch;
            return failed;
        }
        replies.push_back(std::move(*reply));
    }
    return test_responses(replies, e.response_copies.front(), e.response_copies.size(), tau, rng);
}

Responder honest_holder(UuPuf puf) {
    return [puf = std::move(puf)](const StateVector &challenge, RngStream &) -> std::optional<QuantumState> {
        return QuantumState{puf.evaluate(challenge)};
    };
}

PufChannel as_channel(const UuPuf &puf) {
    return [puf](const DensityMatrix &rho) { return puf.evaluate(rho); };
}

PufChannel as_channel(const PerturbedPuf &p) {
    return [p](const DensityMatrix &rho) {
        RngStream unused(0, 0);
        return perturbed_eval(p, rho, unused);
    };
}

double estimate_robustness(const PufChannel &channel, size_t dim, double delta_r, size_t trials, RngStream &rng) {
    require_unit_interval(delta_r, "estimate_robustness: delta_r");
    if (trials == 0) {
        throw std::invalid_argument("estimate_robustness: trials must be positive");
    }
    size_t kept = 0;
    for (size_t t = 0; t < trials; t++) {
        auto pair = sample_pair(dim, delta_r, 1.0, rng);
        auto out_a = channel(DensityMatrix::from_pure(pair.a));
        auto out_b = channel(DensityMatrix::from_pure(pair.b));
        if (fidelity(out_a, out_b) >= delta_r - kThresholdSlack) {
            kept++;
        }
    }
    return static_cast<double>(kept) / static_cast<double>(trials);
}

double estimate_robustness(const UuPuf &puf, double delta_r, size_t trials, RngStream &rng) {
    return estimate_robustness(as_channel(puf), puf.dim(), delta_r, trials, rng);
}

double estimate_collision_resistance(const PufChannel &channel, size_t dim, double delta_c, size_t trials,
                                     RngStream &rng) {
    require_unit_interval(delta_c, "estimate_collision_resistance: delta_c");
    if (trials == 0) {
        throw std::invalid_argument("estimate_collision_resistance: trials must be positive");
    }
    const double ceiling = 1.0 - delta_c;
    size_t kept = 0;
    for (size_t t = 0; t < trials; t++) {
        auto pair = sample_pair(dim, 0.0, ceiling, rng);
        auto out_a = channel(DensityMatrix::from_pure(pair.a));
        auto out_b = channel(DensityMatrix::from_pure(pair.b));
        if (fidelity(out_a, out_b) <= ceiling + kThresholdSlack) {
            kept++;
        }
    }
    return static_cast<double>(kept) / static_cast<double>(trials);
}

double estimate_collision_resistance(const UuPuf &puf, double delta_c, size_t trials, RngStream &rng) {
    return estimate_collision_resistance(as_channel(puf), puf.dim(), delta_c, trials, rng);
}

double pure_trace_distance(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("pure_trace_distance: dimension mismatch");
    }
    double f = std::norm(a.amplitudes().dot(b.amplitudes()));
    double gap = 1.0 - f;
    if (gap > 1e-6) {
        return std::sqrt(std::max(0.0, gap));
    }
    // Lagrange identity: |a|^2 |b|^2 - |<a|b>|^2 = 1/2 sum_ij |a_i b_j - a_j b_i|^2,
    // which has no cancellation when a and b are nearly parallel.
    const auto &x = a.amplitudes();
    const auto &y = b.amplitudes();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); i++) {
        for (Eigen::Index j = i + 1; j < x.size(); j++) {
            acc += std::norm(x(i) * y(j) - x(j) * y(i));
        }
    }
    return std::sqrt(acc);
}

double estimate_uniqueness(const UuPuf &a, const UuPuf &b, size_t trials, RngStream &rng) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("estimate_uniqueness: dimension mismatch");
    }
    if (trials == 0) {
        throw std::invalid_argument("estimate_uniqueness: trials must be positive");
    }
    double total = 0.0;
    for (size_t t = 0; t < trials; t++) {
        StateVector psi = haar_state(a.dim(), rng);
        total += pure_trace_distance(a.evaluate(psi), b.evaluate(psi));
    }
    return total / static_cast<double>(trials);
}

std::string estimator_reports_to_csv(std::span<const EstimatorReport> rows) {
    std::string out = "lambda,epsilon,delta,trials,rate,seed\n";
    for (const auto &r : rows) {
        out += std::to_string(r.lambda) + "," + format_double(r.epsilon) + "," + format_double(r.delta) + "," +
               std::to_string(r.trials) + "," + format_double(r.rate) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

}  // namespace qtoksim::uupuf
