#pragma once

// Transverse RF drive W(t) and the interaction-picture equations of
// motion  dD_m/dt = -i sum_k (W_mk / hbar) D_k exp(i omega_mk t).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "chain_model.hpp"
#include "state.hpp"

namespace spinchain {

/// A rectangular RF pulse. The phase reference is global time: the drive
/// phase at time t is carrier * t + phase.
struct Pulse {
    double carrier = 0.0;  // rad/us
    double phase = 0.0;    // rad
    double angle = 0.0;    // rotation angle theta, rad

    double duration(const ChainParams& params) const { return angle / params.rabi; }
};

/// Matrix element <m|W(t)|k> / hbar of
///   W = -(hbar Omega / 2) sum_q [ z I_q^+ + z* I_q^- ],  z = exp(i(w t + phi)).
/// Since spin-up (bit 0) is the lower level, I^+ maps bit 1 to bit 0:
/// the element whose row has the flipped spin in state 0 carries z.
inline complex w_element(const ChainParams& params, const Pulse& pulse, double t, BasisIndex m,
                         BasisIndex k) {
    detail::check_index(params, m);
    detail::check_index(params, k);
    if (hamming_distance(m, k) != 1) return {0.0, 0.0};
    const auto q = static_cast<std::size_t>(std::countr_zero(m.value ^ k.value));
    const double drive_phase = pulse.carrier * t + pulse.phase;
    const double sign = m.bit(q) == 0 ? 1.0 : -1.0;
    return -0.5 * params.rabi * std::polar(1.0, sign * drive_phase);
}

/// Reference right-hand side assembled element by element from
/// w_element and omega_mk. Used for checking; DriveOperator is the fast
/// path.
inline std::vector<complex> rhs(const ChainParams& params, const Pulse& pulse, double t,
                                const StateVector& d) {
    const std::size_t dim = params.dimension();
    require_dimension(d, dim, "rhs");
    const auto energies = eigenenergies(params);
    std::vector<complex> out(dim);
    const complex minus_i{0.0, -1.0};
    for (std::uint32_t m = 0; m < dim; ++m) {
        complex acc{0.0, 0.0};
        for (std::uint32_t k = 0; k < dim; ++k) {
            const complex w = w_element(params, pulse, t, BasisIndex{m}, BasisIndex{k});
            if (w == complex{0.0, 0.0}) continue;
            acc += w * d[k] * std::polar(1.0, (energies[m] - energies[k]) * t);
        }
        out[m] = minus_i * acc;
    }
    return out;
}

/// Precomputed drive couplings for one (params, pulse) pair. Each
/// unordered single-flip pair (lo, hi), with spin q in state 0 in `lo`,
/// contributes
///   dD_lo += i Omega/2 exp(i(f t + phi)) D_hi,   dD_hi += conj(...) D_lo
/// where f = carrier + omega_{lo,hi}.
class DriveOperator {
public:
    DriveOperator(const ChainParams& params, const Pulse& pulse)
        : dim_(params.dimension()), half_rabi_(0.5 * params.rabi), phase_(pulse.phase) {
        const auto energies = eigenenergies(params);
        for (std::uint32_t lo = 0; lo < dim_; ++lo) {
            for (std::size_t q = 0; q < params.n_spins; ++q) {
                const BasisIndex x{lo};
                if (x.bit(q) != 0) continue;
                const std::uint32_t hi = x.flipped(q).value;
                couplings_.push_back({lo, hi, pulse.carrier + energies[lo] - energies[hi]});
            }
        }
    }

    std::size_t dimension() const { return dim_; }

    /// out = dD/dt at time t. `out` must not alias `d`.
    void evaluate(double t, std::span<const complex> d, std::span<complex> out) const {
        for (auto& o : out) o = complex{0.0, 0.0};
        for (const auto& c : couplings_) {
            const complex rot = std::polar(half_rabi_, c.frequency * t + phase_);
            const complex i_rot{-rot.imag(), rot.real()};               // i * rot
            const complex i_rot_conj{rot.imag(), rot.real()};           // i * conj(rot)
            out[c.lo] += i_rot * d[c.hi];
            out[c.hi] += i_rot_conj * d[c.lo];
        }
    }

private:
    struct Coupling {
        std::uint32_t lo;
        std::uint32_t hi;
        double frequency;
    };

    std::size_t dim_;
    double half_rabi_;
    double phase_;
    std::vector<Coupling> couplings_;
};

/// C_m = D_m exp(-i E_m t).
inline StateVector to_schrodinger(const StateVector& d, double t, const ChainParams& params) {
    if (d.picture != Picture::interaction)
        throw std::invalid_argument("to_schrodinger expects an interaction-picture state");
    require_dimension(d, params.dimension(), "to_schrodinger");
    StateVector c = d;
    c.picture = Picture::schrodinger;
    for (std::uint32_t m = 0; m < c.size(); ++m)
        c[m] *= std::polar(1.0, -eigenenergy(params, BasisIndex{m}) * t);
    return c;
}

/// D_m = C_m exp(+i E_m t).
inline StateVector to_interaction(const StateVector& c, double t, const ChainParams& params) {
    if (c.picture != Picture::schrodinger)
        throw std::invalid_argument("to_interaction expects a Schrodinger-picture state");
    require_dimension(c, params.dimension(), "to_interaction");
    StateVector d = c;
    d.picture = Picture::interaction;
    for (std::uint32_t m = 0; m < d.size(); ++m)
        d[m] *= std::polar(1.0, eigenenergy(params, BasisIndex{m}) * t);
    return d;
}

}  // namespace spinchain
