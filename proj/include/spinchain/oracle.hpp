#pragma once

// Independent propagator used to verify the RK4 integrator.
//
// Works in the Schrodinger picture with the full Hamiltonian built from
// spin operators. On each time slice H is frozen at the slice midpoint
// and exp(-i H dt) is applied through its Taylor series, summed until
// the terms fall below double precision. Nothing here goes through
// eigenenergy(), w_element() or the RK4 code.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain_model.hpp"
#include "drive.hpp"
#include "state.hpp"

namespace spinchain {

namespace oracle_detail {

/// Dense complex matrix, row-major.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<complex> a;

    explicit DenseMatrix(std::size_t dim) : n(dim), a(dim * dim) {}
    complex& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
};

/// I^z eigenvalue of spin q in basis state x: +1/2 for bit 0, -1/2 for bit 1.
inline double spin_z(std::uint32_t x, std::size_t q) { return ((x >> q) & 1u) ? -0.5 : 0.5; }

/// Diagonal of H0 / hbar = -[ sum w_q Iz_q + 2J sum Iz_q Iz_{q+1} + 2J' sum Iz_q Iz_{q+2} ].
inline std::vector<double> static_diagonal(const ChainParams& p) {
    const std::size_t dim = std::size_t{1} << p.n_spins;
    std::vector<double> h(dim);
    for (std::uint32_t x = 0; x < dim; ++x) {
        double acc = 0.0;
        for (std::size_t q = 0; q < p.n_spins; ++q) {
            acc += p.larmor[q] * spin_z(x, q);
            if (q + 1 < p.n_spins) acc += 2.0 * p.j1 * spin_z(x, q) * spin_z(x, q + 1);
            if (q + 2 < p.n_spins) acc += 2.0 * p.j2 * spin_z(x, q) * spin_z(x, q + 2);
        }
        h[x] = -acc;
    }
    return h;
}

/// H(t) / hbar = H0 - (Omega/2) sum_q [ z I_q^+ + z* I_q^- ].
inline void fill_hamiltonian(const ChainParams& p, const std::vector<double>& h0, double carrier,
                             double phase, double t, DenseMatrix& h) {
    std::fill(h.a.begin(), h.a.end(), complex{0.0, 0.0});
    const complex z = std::exp(complex{0.0, carrier * t + phase});
    const double amp = -0.5 * p.rabi;
    for (std::uint32_t x = 0; x < h.n; ++x) {
        h(x, x) = h0[x];
        for (std::size_t q = 0; q < p.n_spins; ++q) {
            const std::uint32_t bit = 1u << q;
            if (x & bit) {
                h(x & ~bit, x) += amp * z;             // I^+ |..1..> = |..0..>
            } else {
                h(x | bit, x) += amp * std::conj(z);   // I^- |..0..> = |..1..>
            }
        }
    }
}

/// v <- exp(-i h dt) v by Taylor series.
inline void apply_exponential(const DenseMatrix& h, double dt, std::vector<complex>& v,
                              std::vector<complex>& term, std::vector<complex>& next) {
    const std::size_t n = h.n;
    term = v;
    for (int order = 1; order < 64; ++order) {
        const complex scale{0.0, -dt / order};
        double size = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            complex acc{0.0, 0.0};
            for (std::size_t c = 0; c < n; ++c) acc += h(r, c) * term[c];
            next[r] = scale * acc;
            size = std::max(size, std::abs(next[r]));
        }
        for (std::size_t r = 0; r < n; ++r) v[r] += next[r];
        std::swap(term, next);
        if (size < 1e-18) return;
    }
    throw std::runtime_error("oracle: Taylor series did not converge; use more slices");
}

}  // namespace oracle_detail

/// Slice count giving at most `max_rotation` radians of carrier (and
/// free-precession) phase per slice.
inline std::size_t oracle_slices(const ChainParams& params, const Pulse& pulse,
                                 double max_rotation = 5e-3) {
    double fastest = std::abs(pulse.carrier);
    for (double e : oracle_detail::static_diagonal(params)) fastest = std::max(fastest, std::abs(e));
    const double duration = pulse.duration(params);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fastest * duration / max_rotation)));
}

/// Propagates interaction-picture amplitudes d0 through `pulse`, starting
/// at global time t_start, with n_slices piecewise-constant slices.
inline StateVector oracle_evolve(const ChainParams& params, const StateVector& d0,
                                 const Pulse& pulse, double t_start, std::size_t n_slices) {
    const std::size_t dim = std::size_t{1} << params.n_spins;
    if (d0.size() != dim) throw std::invalid_argument("oracle_evolve: dimension mismatch");
    if (n_slices == 0) throw std::invalid_argument("oracle_evolve: n_slices must be positive");
    const double duration = pulse.angle / params.rabi;
    const double dt = duration / static_cast<double>(n_slices);
    if (std::abs(pulse.carrier) * dt >= 1e-2)
        throw std::invalid_argument("oracle_evolve: " + std::to_string(n_slices) +
                                    " slices leave more than 0.01 rad of carrier rotation per slice");

    const auto h0 = oracle_detail::static_diagonal(params);
    std::vector<complex> c(dim), term(dim), next(dim);
    for (std::size_t m = 0; m < dim; ++m) c[m] = d0[m] * std::exp(complex{0.0, -h0[m] * t_start});

    double norm0 = 0.0;
    for (const auto& a : c) norm0 += std::norm(a);

    oracle_detail::DenseMatrix h(dim);
    for (std::size_t s = 0; s < n_slices; ++s) {
        const double t_mid = t_start + (static_cast<double>(s) + 0.5) * dt;
        oracle_detail::fill_hamiltonian(params, h0, pulse.carrier, pulse.phase, t_mid, h);
        oracle_detail::apply_exponential(h, dt, c, term, next);
    }
    double norm1 = 0.0;
    for (const auto& a : c) norm1 += std::norm(a);
    if (std::abs(norm1 - norm0) > 1e-9)
        throw std::runtime_error("oracle_evolve: unitarity drift " + std::to_string(norm1 - norm0) +
                                 "; slice count too small");

    const double t_end = t_start + duration;
    StateVector out{std::vector<complex>(dim), Picture::interaction};
    for (std::size_t m = 0; m < dim; ++m) out[m] = c[m] * std::exp(complex{0.0, h0[m] * t_end});
    return out;
}

/// Oracle counterpart of run_sequence: final interaction-picture state.
inline StateVector oracle_sequence(const ChainParams& params, BasisIndex initial,
                                   std::span<const Pulse> pulses, double max_rotation = 5e-3) {
    StateVector d = StateVector::basis(std::size_t{1} << params.n_spins, initial);
    double t = 0.0;
    for (const auto& pulse : pulses) {
        if (pulse.angle <= 0.0) continue;
        d = oracle_evolve(params, d, pulse, t, oracle_slices(params, pulse, max_rotation));
        t += pulse.angle / params.rabi;
    }
    return d;
}

}  // namespace spinchain
