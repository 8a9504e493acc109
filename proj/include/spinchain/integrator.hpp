#pragma once

// Fixed-step RK4 integration of the interaction-picture amplitudes over
// a sequence of rectangular pulses.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain_model.hpp"
#include "drive.hpp"
#include "state.hpp"

namespace spinchain {

/// Raised when the integrated norm drifts past the policy tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepPolicy {
    int points_per_period = 32;
    double max_dt = 1e-3;  // us
    bool convergence_check = false;
    bool strict_norm = true;
    double norm_tolerance = 1e-6;
};

/// Highest single-flip transition frequency plus the carrier.
inline double fastest_frequency(const ChainParams& params, const Pulse& pulse) {
    const auto energies = eigenenergies(params);
    double gap = 0.0;
    for (std::uint32_t x = 0; x < energies.size(); ++x)
        for (std::size_t q = 0; q < params.n_spins; ++q)
            gap = std::max(gap, std::abs(energies[x] - energies[x ^ (1u << q)]));
    return gap + std::abs(pulse.carrier);
}

/// min(max_dt, 2 pi / (points_per_period * omega_fast)).
inline double effective_dt(const ChainParams& params, const Pulse& pulse, const StepPolicy& policy) {
    if (policy.points_per_period <= 0) throw std::invalid_argument("points_per_period must be positive");
    if (!(policy.max_dt > 0.0)) throw std::invalid_argument("max_dt must be positive");
    const double fast = fastest_frequency(params, pulse);
    if (fast <= 0.0) return policy.max_dt;
    return std::min(policy.max_dt, two_pi / (policy.points_per_period * fast));
}

struct Sample {
    double t = 0.0;
    StateVector state;  // interaction picture
    double norm_error = 0.0;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<double> pulse_boundaries;
    double max_norm_error = 0.0;
    std::size_t steps = 0;
    /// Max component difference between the run and a half-step rerun,
    /// present only when the policy requests the check.
    std::optional<double> convergence_error;

    const Sample& final_sample() const { return samples.back(); }
    const StateVector& final_state() const { return samples.back().state; }
    double end_time() const { return samples.back().t; }
};

/// Classical RK4 with preallocated stage buffers.
class Rk4Stepper {
public:
    Rk4Stepper(const ChainParams& params, const Pulse& pulse)
        : drive_(params, pulse), dim_(params.dimension()), buf_(6 * dim_) {}

    void step(double t, std::span<complex> d, double dt) {
        std::span<complex> k1(buf_.data(), dim_), k2(k1.end(), dim_), k3(k2.end(), dim_),
            k4(k3.end(), dim_), tmp(k4.end(), dim_);
        const double half = 0.5 * dt;
        drive_.evaluate(t, d, k1);
        for (std::size_t i = 0; i < dim_; ++i) tmp[i] = d[i] + half * k1[i];
        drive_.evaluate(t + half, tmp, k2);
        for (std::size_t i = 0; i < dim_; ++i) tmp[i] = d[i] + half * k2[i];
        drive_.evaluate(t + half, tmp, k3);
        for (std::size_t i = 0; i < dim_; ++i) tmp[i] = d[i] + dt * k3[i];
        drive_.evaluate(t + dt, tmp, k4);
        const double sixth = dt / 6.0;
        for (std::size_t i = 0; i < dim_; ++i)
            d[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

private:
    DriveOperator drive_;
    std::size_t dim_;
    std::vector<complex> buf_;
};

/// One RK4 step of the interaction-picture equations from t to t + dt.
inline StateVector step_rk4(const ChainParams& params, const Pulse& pulse, double t,
                            const StateVector& d, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
    require_dimension(d, params.dimension(), "step_rk4");
    StateVector out = d;
    Rk4Stepper stepper(params, pulse);
    stepper.step(t, out.amplitudes, dt);
    return out;
}

namespace detail {

struct StepPlan {
    std::size_t full_steps = 0;
    double dt = 0.0;
    double last_dt = 0.0;  // 0 when the duration is an exact multiple

    std::size_t count() const { return full_steps + (last_dt > 0.0 ? 1 : 0); }
};

inline StepPlan plan_steps(double duration, double dt) {
    StepPlan plan;
    plan.dt = dt;
    if (duration <= 0.0) return plan;
    const double ratio = duration / dt;
    auto full = static_cast<std::size_t>(std::floor(ratio));
    double rest = duration - static_cast<double>(full) * dt;
    // absorb a round-off sliver into the last full step
    if (rest < 1e-9 * dt) {
        rest = 0.0;
    } else if (rest > dt * (1.0 - 1e-9)) {
        ++full;
        rest = 0.0;
    }
    plan.full_steps = full;
    plan.last_dt = rest;
    return plan;
}

/// Integrates [t0, t0 + duration] in place without sampling.
inline void integrate_plain(const ChainParams& params, const Pulse& pulse, double t0,
                            double duration, double dt, std::span<complex> d) {
    Rk4Stepper stepper(params, pulse);
    const StepPlan plan = plan_steps(duration, dt);
    for (std::size_t s = 0; s < plan.full_steps; ++s)
        stepper.step(t0 + static_cast<double>(s) * dt, d, dt);
    if (plan.last_dt > 0.0)
        stepper.step(t0 + static_cast<double>(plan.full_steps) * dt, d, plan.last_dt);
}

}  // namespace detail

namespace detail {

inline StateVector evolve_segment(const ChainParams& params, const StateVector& d0,
                                  const Pulse& pulse, double t_start, const StepPolicy& policy,
                                  std::size_t sample_every, Trajectory& traj) {
    require_dimension(d0, params.dimension(), "evolve_pulse");
    if (d0.picture != Picture::interaction)
        throw std::invalid_argument("evolve_pulse expects an interaction-picture state");
    if (sample_every == 0) throw std::invalid_argument("sample_every must be positive");
    if (!(pulse.angle >= 0.0)) throw std::invalid_argument("pulse angle must be non-negative");

    auto check_norm = [&](double norm_error, double t) {
        traj.max_norm_error = std::max(traj.max_norm_error, norm_error);
        if (policy.strict_norm && norm_error > policy.norm_tolerance) {
            char msg[128];
            std::snprintf(msg, sizeof msg, "norm drift %.3e at t = %.6f us exceeds %.1e; step size too coarse",
                          norm_error, t, policy.norm_tolerance);
            throw NumericalError(msg);
        }
    };

    if (traj.samples.empty()) {
        const double err = std::abs(d0.norm_squared() - 1.0);
        traj.samples.push_back({t_start, d0, err});
        traj.pulse_boundaries.push_back(t_start);
    }

    const double duration = pulse.duration(params);
    StateVector d = d0;
    if (duration <= 0.0) return d;

    const double dt = effective_dt(params, pulse, policy);
    const detail::StepPlan plan = detail::plan_steps(duration, dt);
    const std::size_t n_steps = plan.count();
    const double t_end = t_start + duration;

    Rk4Stepper stepper(params, pulse);
    for (std::size_t s = 0; s < n_steps; ++s) {
        const double t = t_start + static_cast<double>(s) * dt;
        const bool last = s + 1 == n_steps;
        stepper.step(t, d.amplitudes, last && plan.last_dt > 0.0 ? plan.last_dt : dt);
        ++traj.steps;
        const double t_after = last ? t_end : t + dt;
        const double err = std::abs(d.norm_squared() - 1.0);
        check_norm(err, t_after);
        if (last || traj.steps % sample_every == 0) traj.samples.push_back({t_after, d, err});
    }
    traj.pulse_boundaries.push_back(t_end);

    if (policy.convergence_check) {
        StateVector fine = d0;
        detail::integrate_plain(params, pulse, t_start, duration, 0.5 * dt, fine.amplitudes);
        double diff = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) diff = std::max(diff, std::abs(fine[i] - d[i]));
        traj.convergence_error = std::max(traj.convergence_error.value_or(0.0), diff);
    }
    return d;
}

}  // namespace detail

/// Integrates one pulse starting at global time t_start and appends
/// samples to `traj` every `sample_every` steps plus the pulse end.
/// An empty trajectory first receives the initial sample.
inline StateVector evolve_pulse(const ChainParams& params, const StateVector& d0,
                                const Pulse& pulse, double t_start, const StepPolicy& policy,
                                std::size_t sample_every, Trajectory& traj) {
    if (std::abs(d0.norm_squared() - 1.0) > 1e-9)
        throw std::invalid_argument("evolve_pulse: initial state is not normalized");
    return detail::evolve_segment(params, d0, pulse, t_start, policy, sample_every, traj);
}

/// Runs the pulses back to back from basis state `initial` at t = 0.
inline Trajectory run_sequence(const ChainParams& params, BasisIndex initial,
                               std::span<const Pulse> pulses, const StepPolicy& policy,
                               std::size_t sample_every = 100) {
    if (pulses.empty()) throw std::invalid_argument("run_sequence: pulse list is empty");
    Trajectory traj;
    StateVector d = StateVector::basis(params.dimension(), initial);
    double t = 0.0;
    // later segments continue from integrated states, whose drift is
    // governed by the policy rather than the entry check
    for (const auto& pulse : pulses) {
        d = detail::evolve_segment(params, d, pulse, t, policy, sample_every, traj);
        t += std::max(0.0, pulse.duration(params));
    }
    return traj;
}

}  // namespace spinchain
