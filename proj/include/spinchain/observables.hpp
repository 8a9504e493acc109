#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chain_model.hpp"
#include "state.hpp"

namespace spinchain {

/// |c_k|^2 for every basis state.
inline std::vector<double> populations(const StateVector& c) {
    std::vector<double> p(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) p[k] = std::norm(c[k]);
    return p;
}

namespace detail {

inline std::size_t spins_of(const StateVector& c) {
    const std::size_t dim = c.size();
    if (dim < 2 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("state dimension is not a power of two");
    return static_cast<std::size_t>(std::countr_zero(dim));
}

inline void check_spin_of(const StateVector& c, std::size_t q) {
    if (q >= spins_of(c))
        throw std::out_of_range("spin index " + std::to_string(q) + " out of range");
}

}  // namespace detail

/// <I_q^z> = 1/2 sum_x (-1)^{bit_q(x)} |c_x|^2. Picture independent.
inline double expect_iz(const StateVector& c, std::size_t q) {
    detail::check_spin_of(c, q);
    double acc = 0.0;
    for (std::uint32_t x = 0; x < c.size(); ++x) {
        const double p = std::norm(c[x]);
        acc += ((x >> q) & 1u) ? -p : p;
    }
    return 0.5 * acc;
}

/// (<I_q^x>, <I_q^y>) = (Re S, Im S) with S = sum_{bit_q(x)=0} conj(c_{x+2^q}) c_x.
/// Meaningful on Schrodinger amplitudes, where the transverse components
/// precess at the transition frequency.
inline std::pair<double, double> expect_ixy(const StateVector& c, std::size_t q) {
    detail::check_spin_of(c, q);
    const std::uint32_t bit = 1u << q;
    complex s{0.0, 0.0};
    for (std::uint32_t x = 0; x < c.size(); ++x) {
        if (x & bit) continue;
        s += std::conj(c[x | bit]) * c[x];
    }
    return {s.real(), s.imag()};
}

struct SpinExpectations {
    std::vector<double> iz;
    std::vector<double> ix;
    std::vector<double> iy;

    /// Squared Bloch-vector length of spin q; at most 1/4 for a pure state.
    double bloch_length_squared(std::size_t q) const {
        return iz[q] * iz[q] + ix[q] * ix[q] + iy[q] * iy[q];
    }
};

inline SpinExpectations spin_expectations(const StateVector& c) {
    const std::size_t n = detail::spins_of(c);
    SpinExpectations e;
    e.iz.resize(n);
    e.ix.resize(n);
    e.iy.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        e.iz[q] = expect_iz(c, q);
        std::tie(e.ix[q], e.iy[q]) = expect_ixy(c, q);
    }
    return e;
}

struct FidelityResult {
    complex value;
    double modulus = 0.0;
};

/// Overlap <expected|numerical>.
inline FidelityResult fidelity(const StateVector& expected, const StateVector& numerical) {
    if (expected.size() != numerical.size())
        throw std::invalid_argument("fidelity: dimension mismatch (" +
                                    std::to_string(expected.size()) + " vs " +
                                    std::to_string(numerical.size()) + ")");
    if (std::abs(expected.norm_squared() - 1.0) > 1e-6 ||
        std::abs(numerical.norm_squared() - 1.0) > 1e-6)
        throw std::invalid_argument("fidelity: states must be normalized");
    complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < expected.size(); ++k) acc += std::conj(expected[k]) * numerical[k];
    return {acc, std::abs(acc)};
}

/// (|00..0> + sign |..101>) / sqrt(2): spins 0 and 2 entangled, the rest
/// in the ground state. Interaction picture.
inline StateVector bell_target(int sign, std::size_t n_spins = 3) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("bell_target: sign must be +1 or -1");
    if (n_spins < 3) throw std::invalid_argument("bell_target needs at least three spins");
    StateVector s{std::vector<complex>(std::size_t{1} << n_spins), Picture::interaction};
    const double amp = 1.0 / std::numbers::sqrt2;
    s[0] = amp;
    s[0b101] = sign * amp;
    return s;
}

}  // namespace spinchain
