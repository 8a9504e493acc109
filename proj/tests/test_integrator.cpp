#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "spinchain/integrator.hpp"

using namespace spinchain;

namespace {

constexpr double pi = std::numbers::pi;

StateVector random_state(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> g;
    StateVector s{std::vector<complex>(dim), Picture::interaction};
    double norm = 0.0;
    for (auto& a : s.amplitudes) {
        a = {g(rng), g(rng)};
        norm += std::norm(a);
    }
    for (auto& a : s.amplitudes) a /= std::sqrt(norm);
    return s;
}

double max_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

std::vector<Pulse> protocol(const ChainParams& p, double phase2 = 0.0) {
    return {{flip_resonance(p, BasisIndex{0b000}, 0), 0.0, pi / 2},
            {flip_resonance(p, BasisIndex{0b001}, 2), phase2, pi}};
}

}  // namespace

TEST(Integrator, StepIsIdentityWithoutDrive) {
    auto p = reference_params();
    p.rabi = 0.0;
    std::mt19937_64 rng(1);
    const auto d = random_state(rng, 8);
    const auto out = step_rk4(p, {from_two_pi_mhz(105.2), 0.0, 1.0}, 0.4, d, 1e-3);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(out[k], d[k]);
    EXPECT_THROW(step_rk4(p, {1.0, 0.0, 1.0}, 0.0, d, 0.0), std::invalid_argument);
}

TEST(Integrator, Rk4LocalErrorIsFifthOrder) {
    const auto p = reference_params();
    const Pulse pulse{flip_resonance(p, BasisIndex{0b001}, 2), 0.3, pi};
    std::mt19937_64 rng(42);
    const auto d = random_state(rng, 8);
    const double t0 = 1.3;
    // e(h) = |one step of h - two steps of h/2|, local error ~ h^5
    auto err = [&](double h) {
        const auto full = step_rk4(p, pulse, t0, d, h);
        const auto half = step_rk4(p, pulse, t0 + 0.5 * h, step_rk4(p, pulse, t0, d, 0.5 * h), 0.5 * h);
        return max_diff(full, half);
    };
    const double e1 = err(2e-4), e2 = err(1e-4), e3 = err(5e-5);
    EXPECT_NEAR(e1 / e2, 32.0, 6.0);
    EXPECT_NEAR(e2 / e3, 32.0, 6.0);
}

TEST(Integrator, ResonantHalfPiPulseMatchesRabiFormula) {
    const auto p = reference_params();
    const Pulse pulse{flip_resonance(p, BasisIndex{0}, 0), 0.0, pi / 2};
    StepPolicy policy;
    Trajectory traj;
    const auto d = evolve_pulse(p, StateVector::basis(8, BasisIndex{0}), pulse, 0.0, policy, 100, traj);
    EXPECT_NEAR(traj.end_time(), 2.5, 1e-12);
    EXPECT_NEAR(std::norm(d[1]), 0.5, 1e-3);
    EXPECT_NEAR(std::norm(d[0]), 0.5, 1e-3);
    for (const auto& s : traj.samples) {
        const double expected = std::pow(std::sin(0.5 * p.rabi * s.t), 2);
        EXPECT_NEAR(std::norm(s.state[1]), expected, 1e-3) << "t = " << s.t;
    }
}

TEST(Integrator, EffectiveStepAtReferenceParameters) {
    const auto p = reference_params();
    const Pulse second{flip_resonance(p, BasisIndex{1}, 2), 0.0, pi};
    // largest gap w2 + J + J' = 405.2 plus the 404.8 carrier
    EXPECT_NEAR(to_two_pi_mhz(fastest_frequency(p, second)), 810.0, 1e-9);
    const double dt = effective_dt(p, second, StepPolicy{});
    EXPECT_NEAR(dt, 1.0 / (32.0 * 810.0), 1e-15);
    StepPolicy capped;
    capped.max_dt = 1e-5;
    EXPECT_EQ(effective_dt(p, second, capped), 1e-5);
}

TEST(Integrator, StepPlanShortensLastStep) {
    const auto plan = detail::plan_steps(1.0, 0.3);
    EXPECT_EQ(plan.full_steps, 3u);
    EXPECT_NEAR(plan.last_dt, 0.1, 1e-12);
    EXPECT_EQ(plan.count(), 4u);
    const auto exact = detail::plan_steps(1.0, 0.25);
    EXPECT_EQ(exact.count(), 4u);
    EXPECT_EQ(exact.last_dt, 0.0);
}

TEST(Integrator, TwoPulseProtocol) {
    const auto p = reference_params(0.2);
    const auto pulses = protocol(p);
    const auto traj = run_sequence(p, BasisIndex{0}, pulses, StepPolicy{});

    ASSERT_EQ(traj.pulse_boundaries.size(), 3u);
    EXPECT_EQ(traj.pulse_boundaries[0], 0.0);
    EXPECT_NEAR(traj.pulse_boundaries[1], 2.5, 1e-12);
    EXPECT_NEAR(traj.pulse_boundaries[2], 7.5, 1e-12);
    EXPECT_EQ(traj.samples.front().t, 0.0);
    EXPECT_NEAR(traj.end_time(), 7.5, 1e-12);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) EXPECT_GT(traj.samples[i].t, traj.samples[i - 1].t);
    for (const auto& s : traj.samples) EXPECT_LE(s.norm_error, 1e-6);
    EXPECT_LE(traj.max_norm_error, 1e-6);

    const Sample* mid = nullptr;
    for (const auto& s : traj.samples)
        if (std::abs(s.t - 2.5) < 1e-12) mid = &s;
    ASSERT_NE(mid, nullptr);
    EXPECT_NEAR(std::norm(mid->state[0]), 0.5, 0.01);
    EXPECT_NEAR(std::norm(mid->state[1]), 0.5, 0.01);

    const auto& d = traj.final_state();
    EXPECT_NEAR(std::norm(d[0]), 0.5, 0.01);
    EXPECT_NEAR(std::norm(d[5]), 0.5, 0.01);
    double rest = 0.0;
    for (std::size_t k : {1, 2, 3, 4, 6, 7}) rest += std::norm(d[k]);
    EXPECT_LE(rest, 0.02);
}

TEST(Integrator, RunsAreBitIdentical) {
    const auto p = reference_params(0.2);
    const auto pulses = protocol(p);
    StepPolicy policy;
    const auto a = run_sequence(p, BasisIndex{0}, pulses, policy, 1000);
    const auto b = run_sequence(p, BasisIndex{0}, pulses, policy, 1000);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].t, b.samples[i].t);
        EXPECT_EQ(0, std::memcmp(a.samples[i].state.amplitudes.data(), b.samples[i].state.amplitudes.data(),
                                 8 * sizeof(complex)));
    }
}

TEST(Integrator, ZeroAnglePulseLeavesInitialSample) {
    const auto p = reference_params();
    const std::vector<Pulse> pulses{{from_two_pi_mhz(105.2), 0.0, 0.0}};
    const auto traj = run_sequence(p, BasisIndex{3}, pulses, StepPolicy{});
    ASSERT_EQ(traj.samples.size(), 1u);
    EXPECT_EQ(traj.samples[0].t, 0.0);
    EXPECT_EQ(traj.samples[0].state[3], complex(1.0, 0.0));
    EXPECT_EQ(traj.steps, 0u);
}

TEST(Integrator, SamplingStride) {
    const auto p = reference_params();
    const std::vector<Pulse> pulses{{flip_resonance(p, BasisIndex{0}, 0), 0.0, 0.01}};
    const auto every = run_sequence(p, BasisIndex{0}, pulses, StepPolicy{}, 1);
    EXPECT_EQ(every.samples.size(), every.steps + 1);
    const auto sparse = run_sequence(p, BasisIndex{0}, pulses, StepPolicy{}, 7);
    EXPECT_EQ(sparse.samples.size(), 1 + every.steps / 7 + (every.steps % 7 ? 1 : 0));
    EXPECT_EQ(sparse.end_time(), every.end_time());
}

TEST(Integrator, ConvergenceCheckReportsSmallDifference) {
    const auto p = reference_params();
    StepPolicy policy;
    policy.convergence_check = true;
    const std::vector<Pulse> pulses{{flip_resonance(p, BasisIndex{0}, 0), 0.0, pi / 2}};
    const auto traj = run_sequence(p, BasisIndex{0}, pulses, policy);
    ASSERT_TRUE(traj.convergence_error.has_value());
    EXPECT_LT(*traj.convergence_error, 1e-8);
    EXPECT_FALSE(run_sequence(p, BasisIndex{0}, pulses, StepPolicy{}).convergence_error.has_value());
}

TEST(Integrator, CoarseStepTripsNormAssertion) {
    const auto p = reference_params();
    StepPolicy coarse;
    coarse.points_per_period = 2;
    coarse.max_dt = 0.05;
    const auto pulses = protocol(p);
    EXPECT_THROW(run_sequence(p, BasisIndex{0}, pulses, coarse), NumericalError);
    coarse.strict_norm = false;
    const auto traj = run_sequence(p, BasisIndex{0}, pulses, coarse);
    EXPECT_GT(traj.max_norm_error, 1e-6);
}

TEST(Integrator, InputErrors) {
    const auto p = reference_params();
    Trajectory traj;
    StateVector unnormalized{std::vector<complex>(8, complex(1.0, 0.0)), Picture::interaction};
    const Pulse pulse{1.0, 0.0, 1.0};
    EXPECT_THROW(evolve_pulse(p, unnormalized, pulse, 0.0, StepPolicy{}, 1, traj), std::invalid_argument);
    EXPECT_THROW(evolve_pulse(p, StateVector::basis(4, BasisIndex{0}), pulse, 0.0, StepPolicy{}, 1, traj),
                 std::invalid_argument);
    EXPECT_THROW(evolve_pulse(p, StateVector::basis(8, BasisIndex{0}), pulse, 0.0, StepPolicy{}, 0, traj),
                 std::invalid_argument);
    EXPECT_THROW(run_sequence(p, BasisIndex{0}, std::vector<Pulse>{}, StepPolicy{}), std::invalid_argument);
}
