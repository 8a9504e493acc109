#pragma once

// Static algebra of an undriven Ising spin chain: parameters, basis
// labels, diagonal eigenenergies and single-flip transition frequencies.
//
// Units: every frequency is angular, in rad/us. Energies are reported
// as E/hbar in the same units.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinchain {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Converts a frequency given in units of 2*pi*MHz to rad/us.
constexpr double from_two_pi_mhz(double value) { return value * two_pi; }
constexpr double to_two_pi_mhz(double rad_per_us) { return rad_per_us / two_pi; }

struct ChainParams {
    std::size_t n_spins = 3;
    std::vector<double> larmor;  // one per spin
    double j1 = 0.0;             // first-neighbour coupling J
    double j2 = 0.0;             // second-neighbour coupling J'
    double rabi = 0.0;           // Rabi frequency Omega

    std::size_t dimension() const { return std::size_t{1} << n_spins; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const {
        if (n_spins < 2) throw std::invalid_argument("n_spins must be at least 2");
        if (n_spins > 20) throw std::invalid_argument("n_spins larger than 20 is not supported");
        if (larmor.size() != n_spins)
            throw std::invalid_argument("expected " + std::to_string(n_spins) +
                                        " Larmor frequencies, got " + std::to_string(larmor.size()));
        for (std::size_t q = 0; q < n_spins; ++q) {
            if (!(larmor[q] > 0.0) || !std::isfinite(larmor[q]))
                throw std::invalid_argument("Larmor frequency of spin " + std::to_string(q) +
                                            " must be positive");
            for (std::size_t p = 0; p < q; ++p)
                if (larmor[p] == larmor[q])
                    throw std::invalid_argument("Larmor frequencies of spins " + std::to_string(p) +
                                                " and " + std::to_string(q) + " coincide");
        }
        if (!(j1 >= 0.0) || !std::isfinite(j1)) throw std::invalid_argument("j1 must be non-negative");
        if (!(j2 >= 0.0) || !std::isfinite(j2)) throw std::invalid_argument("j2 must be non-negative");
        if (!(rabi > 0.0) || !std::isfinite(rabi)) throw std::invalid_argument("rabi must be positive");
    }
};

/// The three-spin parameter set of the reference protocol
/// (omega = 100, 200, 400; J = 5; Omega = 0.1; all in 2*pi*MHz).
inline ChainParams reference_params(double j2_two_pi_mhz = 0.2) {
    ChainParams p;
    p.n_spins = 3;
    p.larmor = {from_two_pi_mhz(100.0), from_two_pi_mhz(200.0), from_two_pi_mhz(400.0)};
    p.j1 = from_two_pi_mhz(5.0);
    p.j2 = from_two_pi_mhz(j2_two_pi_mhz);
    p.rabi = from_two_pi_mhz(0.1);
    return p;
}

/// Computational basis label. Bit q holds the state of spin q
/// (0 = ground), so value 5 is |101>.
struct BasisIndex {
    std::uint32_t value = 0;

    constexpr BasisIndex() = default;
    constexpr explicit BasisIndex(std::uint32_t v) : value(v) {}

    constexpr int bit(std::size_t q) const { return static_cast<int>((value >> q) & 1u); }
    constexpr BasisIndex flipped(std::size_t q) const { return BasisIndex{value ^ (1u << q)}; }

    friend constexpr bool operator==(BasisIndex, BasisIndex) = default;
};

/// Ket label such as "|101>", most significant spin first.
inline std::string ket_label(BasisIndex x, std::size_t n_spins) {
    std::string s = "|";
    for (std::size_t q = n_spins; q-- > 0;) s += static_cast<char>('0' + x.bit(q));
    return s + ">";
}

inline constexpr int hamming_distance(BasisIndex a, BasisIndex b) {
    return std::popcount(a.value ^ b.value);
}

namespace detail {

inline void check_index(const ChainParams& params, BasisIndex x) {
    if (x.value >= params.dimension())
        throw std::out_of_range("basis index " + std::to_string(x.value) + " out of range for " +
                                std::to_string(params.n_spins) + " spins");
}

inline void check_spin(const ChainParams& params, std::size_t q) {
    if (q >= params.n_spins)
        throw std::out_of_range("spin index " + std::to_string(q) + " out of range for " +
                                std::to_string(params.n_spins) + " spins");
}

constexpr double parity_sign(int bits) { return (bits & 1) ? -1.0 : 1.0; }

}  // namespace detail

/// E_x / hbar = -1/2 [ sum_q (-1)^{i_q} w_q + J sum_q (-1)^{i_q+i_{q+1}}
///                     + J' sum_q (-1)^{i_q+i_{q+2}} ]
inline double eigenenergy(const ChainParams& params, BasisIndex x) {
    detail::check_index(params, x);
    const std::size_t n = params.n_spins;
    double larmor_sum = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        larmor_sum += detail::parity_sign(x.bit(q)) * params.larmor[q];
        if (q + 1 < n) first += detail::parity_sign(x.bit(q) + x.bit(q + 1));
        if (q + 2 < n) second += detail::parity_sign(x.bit(q) + x.bit(q + 2));
    }
    return -0.5 * (larmor_sum + params.j1 * first + params.j2 * second);
}

/// All 2^N eigenenergies, indexed by basis value.
inline std::vector<double> eigenenergies(const ChainParams& params) {
    std::vector<double> e(params.dimension());
    for (std::uint32_t x = 0; x < e.size(); ++x) e[x] = eigenenergy(params, BasisIndex{x});
    return e;
}

/// omega_mk = (E_m - E_k) / hbar.
inline double omega_mk(const ChainParams& params, BasisIndex m, BasisIndex k) {
    return eigenenergy(params, m) - eigenenergy(params, k);
}

/// Carrier frequency that resonantly flips spin q while the other spins
/// sit in configuration x. Derived from the eigenvalue gap, never from a
/// closed-form table.
inline double flip_resonance(const ChainParams& params, BasisIndex x, std::size_t q) {
    detail::check_spin(params, q);
    return std::abs(omega_mk(params, x.flipped(q), x));
}

}  // namespace spinchain
