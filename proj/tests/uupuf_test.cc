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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "oracle.h"
#include "qtoksim/ops.h"
#include "qtoksim/uupuf.h"

using namespace qtoksim;
using namespace qtoksim::uupuf;

namespace {

/// |0> and sqrt(F)|0> + sqrt(1-F)|1> in dimension dim.
std::pair<StateVector, StateVector> pair_with_fidelity(double f, size_t dim = 4) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    b(0) = std::sqrt(f);
    b(1) = std::sqrt(1.0 - f);
    return {StateVector::basis(dim, 0), StateVector(b)};
}

UuPuf identity_puf(size_t lambda) {
    return UuPuf::from_unitary(UnitaryOp::identity(size_t{1} << lambda), "identity");
}

}  // namespace

TEST(UuPufGen, dimensions_and_range) {
    RngStream r(1, 0);
    auto p = qgen_uu(1, r);
    EXPECT_EQ(p.dim(), 2u);
    EXPECT_THROW(qgen_uu(0, r), std::invalid_argument);
    EXPECT_THROW(qgen_uu(13, r), std::invalid_argument);
}

TEST(UuPufGen, reproducible_id_and_unitary) {
    RngStream a(7, 3), b(7, 3);
    auto pa = qgen_uu(3, a), pb = qgen_uu(3, b);
    EXPECT_EQ(pa.id(), pb.id());
    RngStream r(8, 0);
    auto psi = haar_state(8, r);
    EXPECT_EQ(pa.evaluate(psi).amplitudes(), pb.evaluate(psi).amplitudes());
    RngStream c(9, 3);
    EXPECT_NE(qgen_uu(3, c).id(), pa.id());
}

TEST(UuPufGen, independent_devices_have_low_output_fidelity) {
    RngStream r(2, 0);
    double total = 0.0;
    for (int i = 0; i < 100; i++) {
        auto a = qgen_uu(3, r), b = qgen_uu(3, r);
        auto psi = haar_state(8, r);
        total += oracle::pure_fidelity(oracle::from_eigen(a.evaluate(psi).amplitudes()),
                                       oracle::from_eigen(b.evaluate(psi).amplitudes()));
    }
    EXPECT_LT(total / 100, 0.3);
}

TEST(UuPufEval, qeval_examples) {
    RngStream r(3, 0);
    auto rho = DensityMatrix::from_pure(haar_state(4, r));
    EXPECT_TRUE(qeval(identity_puf(2), rho).matrix().isApprox(rho.matrix(), 1e-14));
    auto p = qgen_uu(2, r);
    EXPECT_NEAR(qeval(p, rho).purity(), 1.0, 1e-9);
    EXPECT_THROW(qeval(p, DensityMatrix::maximally_mixed(8)), std::invalid_argument);
}

TEST(UuPufEval, composition_with_inverse_is_identity) {
    RngStream r(4, 0);
    auto u = haar_unitary(8, r);
    auto fwd = UuPuf::from_unitary(u, "u");
    auto inv = UuPuf::from_unitary(UnitaryOp::trusted(u.matrix().adjoint()), "u-dagger");
    auto rho = DensityMatrix::from_pure(haar_state(8, r));
    EXPECT_NEAR((qeval(inv, qeval(fwd, rho)).matrix() - rho.matrix()).norm(), 0.0, 1e-12);
}

// Property: fidelity between outputs equals fidelity between inputs.
TEST(UuPufProperty, unitary_invariance_of_fidelity) {
    RngStream r(5, 0);
    for (int rep = 0; rep < 200; rep++) {
        size_t lambda = 1 + r.below(4);
        auto p = qgen_uu(lambda, r);
        auto a = haar_state(p.dim(), r), b = haar_state(p.dim(), r);
        EXPECT_NEAR(fidelity(p.evaluate(a), p.evaluate(b)), fidelity(a, b), 1e-9);
    }
}

TEST(SwapTest, examples) {
    RngStream r(6, 0);
    auto s = haar_state(4, r);
    for (int i = 0; i < 1000; i++) {
        ASSERT_TRUE(swap_test(s, s, r));
    }
    const int n = 100000;
    auto [a0, b0] = pair_with_fidelity(0.0);
    auto [a5, b5] = pair_with_fidelity(0.5);
    int acc0 = 0, acc5 = 0;
    for (int i = 0; i < n; i++) {
        acc0 += swap_test(a0, b0, r) ? 1 : 0;
        acc5 += swap_test(a5, b5, r) ? 1 : 0;
    }
    EXPECT_NEAR(acc0 / double(n), 0.5, 0.005);
    EXPECT_NEAR(acc5 / double(n), 0.75, 0.005);
    EXPECT_THROW(swap_test(StateVector::basis(2, 0), StateVector::basis(4, 0), r), std::invalid_argument);
}

// Property: the SWAP-test law holds within 4 sigma across the fidelity grid.
TEST(SwapTestProperty, acceptance_law) {
    RngStream r(7, 0);
    const int n = 100000;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        auto [a, b] = pair_with_fidelity(f);
        ASSERT_NEAR(fidelity(a, b), f, 1e-12);
        int acc = 0;
        for (int i = 0; i < n; i++) {
            acc += swap_test(a, b, r) ? 1 : 0;
        }
        double p = (1 + f) / 2;
        EXPECT_NEAR(acc / double(n), p, 4 * oracle::rate_sigma(p, n) + 1e-12) << "F = " << f;
    }
}

TEST(SwapTest, mixed_response_probability) {
    auto ref = StateVector::basis(4, 0);
    EXPECT_NEAR(swap_accept_probability(QuantumState{DensityMatrix::maximally_mixed(4)}, ref), 0.5 + 0.5 / 4, 1e-12);
}

TEST(TestAlgorithm, identical_states_always_accept) {
    RngStream r(8, 0);
    auto s = haar_state(8, r);
    for (size_t k : {1u, 5u, 50u}) {
        auto res = test_algorithm(s, s, k, k + 3, 0.9, r);
        EXPECT_TRUE(res.accept);
        EXPECT_EQ(res.accept_count, k);
        EXPECT_DOUBLE_EQ(res.f_hat, 1.0);
    }
}

TEST(TestAlgorithm, orthogonal_states_match_binomial_tail) {
    // P[Binomial(50, 1/2) >= 48]; f_hat >= 0.9 needs 2c/50 - 1 >= 0.9.
    double tail = oracle::binomial_upper_tail(50, 0.5, 48);
    EXPECT_LT(tail, 1e-10);
    RngStream r(9, 0);
    auto [a, b] = pair_with_fidelity(0.0);
    for (int i = 0; i < 2000; i++) {
        ASSERT_FALSE(test_algorithm(a, b, 50, 50, 0.9, r).accept);
    }
}

TEST(TestAlgorithm, f_hat_formula_and_invariants) {
    RngStream r(10, 0);
    auto [a, b] = pair_with_fidelity(0.4);
    for (int i = 0; i < 200; i++) {
        auto res = test_algorithm(a, b, 30, 20, 0.5, r);
        ASSERT_LE(res.accept_count, 20u);
        double want = std::max(0.0, 2.0 * static_cast<double>(res.accept_count) / 20.0 - 1.0);
        ASSERT_DOUBLE_EQ(res.f_hat, want);
        ASSERT_EQ(res.accept, res.f_hat >= 0.5);
    }
    EXPECT_THROW(test_algorithm(a, b, 0, 1, 0.9, r), std::invalid_argument);
}

TEST(TestAlgorithm, mean_f_hat_at_high_fidelity) {
    RngStream r(11, 0);
    auto [a, b] = pair_with_fidelity(0.98);
    double total = 0.0;
    for (int i = 0; i < 10000; i++) {
        total += test_algorithm(a, b, 100, 100, 0.9, r).f_hat;
    }
    EXPECT_NEAR(total / 10000, 0.98, 0.01);
}

// Property: E[f_hat] is within 2/sqrt(r) + 0.01 of F.
TEST(TestAlgorithmProperty, estimator_consistency) {
    RngStream r(12, 0);
    const size_t rr = 50;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        auto [a, b] = pair_with_fidelity(f);
        double total = 0.0;
        for (int i = 0; i < 2000; i++) {
            total += test_algorithm(a, b, rr, rr, 0.9, r).f_hat;
        }
        EXPECT_NEAR(total / 2000, f, 2.0 / std::sqrt(double(rr)) + 0.01) << "F = " << f;
    }
}

TEST(UuAuthenticate, honest_holder_accepts) {
    RngStream r(13, 0);
    auto p = qgen_uu(3, r);
    auto crt = issue_crt(p, 4, 50, r);
    ASSERT_EQ(crt.entries.size(), 4u);
    EXPECT_EQ(crt.entries[0].response_copies.size(), 50u);
    for (size_t e = 0; e < 4; e++) {
        auto res = uu_authenticate(honest_holder(p), crt, e, 50, 0.9, r);
        EXPECT_TRUE(res.accept);
        EXPECT_EQ(res.status, TestStatus::ok);
    }
    EXPECT_THROW(uu_authenticate(honest_holder(p), crt, 4, 50, 0.9, r), std::out_of_range);
}

TEST(UuAuthenticate, foreign_device_rarely_accepts) {
    RngStream r(14, 0);
    size_t accepts = 0;
    for (int i = 0; i < 1000; i++) {
        auto p = qgen_uu(3, r), q = qgen_uu(3, r);
        auto crt = issue_crt(p, 1, 50, r);
        accepts += uu_authenticate(honest_holder(q), crt, 0, 50, 0.9, r).accept ? 1 : 0;
    }
    EXPECT_LT(accepts, 10u);
}

TEST(UuAuthenticate, mixed_holder_follows_swap_law) {
    RngStream r(15, 0);
    auto p = qgen_uu(2, r);
    auto crt = issue_crt(p, 1, 100, r);
    Responder mixed = [](const StateVector &, RngStream &) -> std::optional<QuantumState> {
        return QuantumState{DensityMatrix::maximally_mixed(4)};
    };
    // Per-test accept probability (1 + 1/D)/2, so E[2c/r - 1] = 1/D.
    double total = 0.0;
    for (int i = 0; i < 4000; i++) {
        auto res = uu_authenticate(mixed, crt, 0, 100, 0.9, r);
        EXPECT_FALSE(res.accept);
        total += 2.0 * static_cast<double>(res.accept_count) / 100.0 - 1.0;
    }
    double sigma = 2.0 * oracle::rate_sigma(0.625, 100) / std::sqrt(4000.0);
    EXPECT_NEAR(total / 4000, 0.25, 4 * sigma);
}

TEST(UuAuthenticate, wrong_dimension_and_loss_flagged) {
    RngStream r(16, 0);
    auto p = qgen_uu(2, r);
    auto crt = issue_crt(p, 1, 10, r);
    Responder wrong = [](const StateVector &, RngStream &) -> std::optional<QuantumState> {
        return QuantumState{StateVector::basis(2, 0)};
    };
    Responder lost = [](const StateVector &, RngStream &) -> std::optional<QuantumState> { return std::nullopt; };
    auto a = uu_authenticate(wrong, crt, 0, 10, 0.9, r);
    EXPECT_FALSE(a.accept);
    EXPECT_EQ(a.status, TestStatus::dimension_mismatch);
    auto b = uu_authenticate(lost, crt, 0, 10, 0.9, r);
    EXPECT_FALSE(b.accept);
    EXPECT_EQ(b.status, TestStatus::lost);
}

TEST(Perturbed, eval_examples) {
    RngStream r(17, 0);
    auto rho = DensityMatrix::from_pure(haar_state(4, r));
    auto p = qgen_uu(2, r);
    auto e0 = perturbed_eval(PerturbedPuf(p, 0.0), rho, r);
    EXPECT_NEAR((e0.matrix() - qeval(p, rho).matrix()).norm(), 0.0, 1e-12);
    auto e1 = perturbed_eval(PerturbedPuf(p, 1.0), rho, r);
    EXPECT_NEAR((e1.matrix() - DensityMatrix::maximally_mixed(4).matrix()).norm(), 0.0, 1e-12);
    auto small = perturbed_eval(PerturbedPuf(identity_puf(1), 0.1), DensityMatrix::from_pure(StateVector::basis(2, 0)), r);
    EXPECT_NEAR(small.population(0), 0.95, 1e-12);
    EXPECT_NEAR(small.population(1), 0.05, 1e-12);
    EXPECT_THROW(PerturbedPuf(p, 1.5), std::invalid_argument);
}

TEST(Perturbed, replace_channel) {
    RngStream r(18, 0);
    auto target = StateVector::basis(2, 1);
    PerturbedPuf p(identity_puf(1), 0.3, ContractiveChannel::replacing_with(target));
    auto out = perturbed_eval(p, DensityMatrix::from_pure(StateVector::basis(2, 0)), r);
    EXPECT_NEAR(out.population(1), 0.3, 1e-12);
}

// Property: the perturbed output is a valid density matrix across epsilon.
TEST(PerturbedProperty, output_is_valid_state) {
    RngStream r(19, 0);
    auto p = qgen_uu(2, r);
    for (int i = 0; i <= 20; i++) {
        double eps = i / 20.0;
        auto out = perturbed_eval(PerturbedPuf(p, eps), DensityMatrix::from_pure(haar_state(4, r)), r);
        EXPECT_NO_THROW(DensityMatrix{out.matrix()});
        EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
    }
}

TEST(Perturbed, trajectory_mode_frequency) {
    RngStream r(20, 0);
    PerturbedPuf p(identity_puf(1), 0.2);
    auto zero = StateVector::basis(2, 0);
    int replaced = 0;
    const int n = 20000;
    for (int i = 0; i < n; i++) {
        auto s = perturbed_sample(p, zero, r);
        replaced += std::holds_alternative<DensityMatrix>(s) ? 1 : 0;
    }
    EXPECT_NEAR(replaced / double(n), 0.2, 4 * oracle::rate_sigma(0.2, n));
}

TEST(Estimators, unitary_rates_are_one) {
    RngStream r(21, 0);
    auto p = qgen_uu(2, r);
    EXPECT_DOUBLE_EQ(estimate_robustness(p, 0.95, 500, r), 1.0);
    EXPECT_DOUBLE_EQ(estimate_collision_resistance(p, 0.5, 500, r), 1.0);
    EXPECT_DOUBLE_EQ(estimate_robustness(as_channel(PerturbedPuf(p, 0.0)), 4, 0.95, 500, r), 1.0);
}

TEST(Estimators, full_depolarization_collides) {
    RngStream r(22, 0);
    auto p = qgen_uu(2, r);
    EXPECT_DOUBLE_EQ(estimate_collision_resistance(as_channel(PerturbedPuf(p, 1.0)), 4, 0.3, 500, r), 0.0);
}

TEST(Estimators, robustness_under_depolarization) {
    // Depolarizing both inputs never lowers their fidelity, so robustness
    // stays at 1; the replacement channel behaves the same way.
    RngStream r(23, 0);
    auto p = qgen_uu(2, r);
    double rate = estimate_robustness(as_channel(PerturbedPuf(p, 0.2)), 4, 0.95, 1000, r);
    RecordProperty("robustness_eps_0.2", std::to_string(rate));
    EXPECT_DOUBLE_EQ(rate, 1.0);
}

TEST(Estimators, argument_checks) {
    RngStream r(24, 0);
    auto p = qgen_uu(1, r);
    EXPECT_THROW(estimate_robustness(p, 1.5, 10, r), std::invalid_argument);
    EXPECT_THROW(estimate_collision_resistance(p, -0.1, 10, r), std::invalid_argument);
    EXPECT_THROW(estimate_robustness(p, 0.5, 0, r), std::invalid_argument);
}

// Property: collision resistance is non-increasing across the epsilon sweep
// when every point reuses the same sample stream.
TEST(EstimatorsProperty, collision_rate_monotone_in_epsilon) {
    RngStream gen(25, 1);
    auto p = qgen_uu(2, gen);
    double prev = 2.0;
    for (int i = 0; i <= 6; i++) {
        double eps = 0.05 * i;
        RngStream r(25, 0);
        double rate = estimate_collision_resistance(as_channel(PerturbedPuf(p, eps)), 4, 0.1, 1000, r);
        EXPECT_LE(rate, prev) << "eps " << eps;
        prev = rate;
    }
}

TEST(Uniqueness, examples) {
    RngStream r(26, 0);
    auto p = qgen_uu(3, r);
    EXPECT_EQ(estimate_uniqueness(p, p, 100, r), 0.0);
    auto u = haar_unitary(8, r);
    auto a = UuPuf::from_unitary(u, "a");
    auto b = UuPuf::from_unitary(UnitaryOp::trusted(u.matrix() * std::polar(1.0, 0.7)), "b");
    EXPECT_NEAR(estimate_uniqueness(a, b, 100, r), 0.0, 1e-7);
    EXPECT_THROW(estimate_uniqueness(p, qgen_uu(2, r), 10, r), std::invalid_argument);
}

TEST(Uniqueness, independent_devices_are_far) {
    RngStream r(27, 0);
    int far = 0;
    for (int i = 0; i < 100; i++) {
        auto a = qgen_uu(3, r), b = qgen_uu(3, r);
        far += estimate_uniqueness(a, b, 1000, r) > 0.5 ? 1 : 0;
    }
    EXPECT_GE(far, 99);
}

TEST(Uniqueness, pure_trace_distance_matches_oracle) {
    RngStream r(28, 0);
    for (int i = 0; i < 50; i++) {
        auto a = haar_state(4, r), b = haar_state(4, r);
        double f = oracle::pure_fidelity(oracle::from_eigen(a.amplitudes()), oracle::from_eigen(b.amplitudes()));
        EXPECT_NEAR(pure_trace_distance(a, b), std::sqrt(1 - f), 1e-12);
        EXPECT_NEAR(pure_trace_distance(a, b),
                    trace_distance(DensityMatrix::from_pure(a), DensityMatrix::from_pure(b)), 1e-9);
    }
}

TEST(Estimators, csv_format) {
    std::vector<EstimatorReport> rows{{2, 0.05, 0.1, 1000, 0.985, 42}};
    EXPECT_EQ(estimator_reports_to_csv(rows), "lambda,epsilon,delta,trials,rate,seed\n2,0.05,0.1,1000,0.985,42\n");
}
