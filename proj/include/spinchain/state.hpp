#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain_model.hpp"

namespace spinchain {

using complex = std::complex<double>;

/// Which representation the amplitudes live in. Interaction-picture
/// amplitudes D_m have the free phase exp(-i E_m t) removed; Schrodinger
/// amplitudes C_m carry it.
enum class Picture { interaction, schrodinger };

struct StateVector {
    std::vector<complex> amplitudes;
    Picture picture = Picture::interaction;

    StateVector() = default;
    StateVector(std::vector<complex> amps, Picture pic) : amplitudes(std::move(amps)), picture(pic) {}

    std::size_t size() const { return amplitudes.size(); }
    complex& operator[](std::size_t i) { return amplitudes[i]; }
    const complex& operator[](std::size_t i) const { return amplitudes[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }

    /// |x> with unit amplitude.
    static StateVector basis(std::size_t dimension, BasisIndex x,
                             Picture pic = Picture::interaction) {
        if (x.value >= dimension) throw std::out_of_range("basis index outside state dimension");
        StateVector s{std::vector<complex>(dimension), pic};
        s.amplitudes[x.value] = 1.0;
        return s;
    }
};

inline void require_dimension(const StateVector& s, std::size_t dimension, const char* what) {
    if (s.size() != dimension)
        throw std::invalid_argument(std::string(what) + ": state has dimension " +
                                    std::to_string(s.size()) + ", expected " +
                                    std::to_string(dimension));
}

}  // namespace spinchain
