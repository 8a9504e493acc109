#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spinchain/integrator.hpp"
#include "spinchain/oracle.hpp"

using namespace spinchain;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace

TEST(Oracle, StaticDiagonalMatchesEigenenergies) {
    const auto p = reference_params(0.2);
    const auto h0 = oracle_detail::static_diagonal(p);
    for (std::uint32_t x = 0; x < 8; ++x) EXPECT_NEAR(h0[x], eigenenergy(p, BasisIndex{x}), 1e-10);
}

TEST(Oracle, HamiltonianIsHermitian) {
    const auto p = reference_params(0.2);
    oracle_detail::DenseMatrix h(8);
    oracle_detail::fill_hamiltonian(p, oracle_detail::static_diagonal(p), 700.0, 0.4, 2.3, h);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(h(r, c), std::conj(h(c, r)));
}

TEST(Oracle, TwoLevelRabiFlop) {
    auto p = reference_params(0.0);
    p.j1 = 0.0;
    const Pulse pulse{p.larmor[0], 0.0, pi / 2};
    const auto d = oracle_evolve(p, StateVector::basis(8, BasisIndex{0}), pulse, 0.0,
                                 oracle_slices(p, pulse));
    EXPECT_NEAR(std::norm(d[1]), 0.5, 1e-4);
    EXPECT_NEAR(d.norm_squared(), 1.0, 1e-9);
}

TEST(Oracle, AgreesWithRk4OnShortPulse) {
    const auto p = reference_params(0.2);
    const Pulse pulse{flip_resonance(p, BasisIndex{1}, 2), 1.1, pi / 4};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    StateVector d0{std::vector<complex>(8), Picture::interaction};
    for (auto& a : d0.amplitudes) a = {g(rng), g(rng)};
    const double n = std::sqrt(d0.norm_squared());
    for (auto& a : d0.amplitudes) a /= n;

    Trajectory traj;
    const auto rk4 = evolve_pulse(p, d0, pulse, 0.7, StepPolicy{}, 1000000, traj);
    const auto ref = oracle_evolve(p, d0, pulse, 0.7, oracle_slices(p, pulse));
    EXPECT_LT(max_diff(rk4, ref), 1e-5);
}

TEST(Oracle, RejectsTooFewSlices) {
    const auto p = reference_params(0.2);
    const Pulse pulse{flip_resonance(p, BasisIndex{0}, 0), 0.0, pi / 2};
    EXPECT_THROW(oracle_evolve(p, StateVector::basis(8, BasisIndex{0}), pulse, 0.0, 100), std::invalid_argument);
    EXPECT_THROW(oracle_evolve(p, StateVector::basis(8, BasisIndex{0}), pulse, 0.0, 0), std::invalid_argument);
    EXPECT_GE(oracle_slices(p, pulse, 1e-2) * 1e-2, flip_resonance(p, BasisIndex{0}, 0) * 2.5);
}
