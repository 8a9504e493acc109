#pragma once

// Scenario drivers behind the command-line tool: resonance tables,
// single protocol runs with time-series output, and the J'/J sweep.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "chain_model.hpp"
#include "config.hpp"
#include "drive.hpp"
#include "integrator.hpp"
#include "observables.hpp"

namespace spinchain {

/// Output directory could not be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// resonances

struct TransitionRow {
    BasisIndex lower;  // spin `spin` in state 0
    BasisIndex upper;
    std::size_t spin = 0;
    double frequency = 0.0;  // rad/us
    int pulse = -1;          // 1-based index of the configured pulse driving it, or -1
};

struct ResonanceTable {
    std::vector<double> energies;  // E/hbar, rad/us, indexed by basis value
    std::vector<TransitionRow> transitions;
};

inline ResonanceTable cmd_resonances(const RunConfig& cfg) {
    const auto& p = cfg.params;
    ResonanceTable table;
    table.energies = eigenenergies(p);
    for (std::size_t q = 0; q < p.n_spins; ++q) {
        for (std::uint32_t x = 0; x < p.dimension(); ++x) {
            const BasisIndex lower{x};
            if (lower.bit(q) != 0) continue;
            TransitionRow row{lower, lower.flipped(q), q, flip_resonance(p, lower, q)};
            for (std::size_t i = 0; i < cfg.pulses.size() && row.pulse < 0; ++i) {
                const auto& spec = cfg.pulses[i];
                const bool symbolic = spec.spin && *spec.spin == q &&
                                      (spec.from == row.lower.value || spec.from == row.upper.value);
                const bool explicit_match =
                    spec.carrier && std::abs(*spec.carrier - row.frequency) <= 1e-12 * row.frequency;
                if (symbolic || explicit_match) row.pulse = static_cast<int>(i) + 1;
            }
            table.transitions.push_back(row);
        }
    }
    return table;
}

inline void print_resonances(std::ostream& os, const RunConfig& cfg, const ResonanceTable& table) {
    const std::size_t n = cfg.params.n_spins;
    char buf[160];
    os << "energy levels (E/hbar, 2*pi*MHz)\n";
    for (std::uint32_t x = 0; x < table.energies.size(); ++x) {
        std::snprintf(buf, sizeof buf, "  %3u %s %14.6f\n", x, ket_label(BasisIndex{x}, n).c_str(),
                      to_two_pi_mhz(table.energies[x]));
        os << buf;
    }
    os << "single-spin transitions (2*pi*MHz)\n";
    for (const auto& r : table.transitions) {
        std::snprintf(buf, sizeof buf, "  %s->%s: %.6g", ket_label(r.lower, n).c_str(),
                      ket_label(r.upper, n).c_str(), to_two_pi_mhz(r.frequency));
        os << buf << "  (spin " << r.spin << ")";
        if (r.pulse > 0) os << "  <- pulse-" << r.pulse << " carrier";
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// file helpers

namespace experiments_detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw OutputError("cannot create output directory '" + dir + "'");
    return dir;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write '" + path.string() + "'");
    return out;
}

inline void write_provenance(std::ostream& os, const RunConfig& cfg) {
    for (const auto& line : describe(cfg)) os << "# " << line << '\n';
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw OutputError("write failed for '" + path.string() + "'");
}

}  // namespace experiments_detail

inline void write_resonances_csv(const RunConfig& cfg, const ResonanceTable& table,
                                 const std::string& dir) {
    using namespace experiments_detail;
    const auto path = prepare_dir(dir) / "resonances.csv";
    auto out = open_out(path);
    write_provenance(out, cfg);
    const std::size_t n = cfg.params.n_spins;
    out << "kind,from,to,spin,value_2pi_mhz,pulse\n";
    for (std::uint32_t x = 0; x < table.energies.size(); ++x)
        out << "level," << ket_label(BasisIndex{x}, n) << ",,," << num(to_two_pi_mhz(table.energies[x]))
            << ",\n";
    for (const auto& r : table.transitions) {
        out << "transition," << ket_label(r.lower, n) << ',' << ket_label(r.upper, n) << ',' << r.spin
            << ',' << num(to_two_pi_mhz(r.frequency)) << ',';
        if (r.pulse > 0) out << r.pulse;
        out << '\n';
    }
    finish(out, path);
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveResult {
    std::vector<Pulse> pulses;
    Trajectory trajectory;
    std::optional<FidelityResult> fidelity;  // vs bell_target(target_sign); needs >= 3 spins
    double wall_seconds = 0.0;
};

inline EvolveResult run_evolve(const RunConfig& cfg) {
    EvolveResult r;
    r.pulses = resolve_pulses(cfg);
    const auto start = std::chrono::steady_clock::now();
    r.trajectory = run_sequence(cfg.params, BasisIndex{cfg.initial}, r.pulses, cfg.policy, cfg.sample_stride);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.params.n_spins >= 3)
        r.fidelity = fidelity(bell_target(cfg.target_sign, cfg.params.n_spins), r.trajectory.final_state());
    return r;
}

/// Writes amplitudes.csv, populations.csv, spin_z.csv, spin_xy.csv and
/// summary.json (all deterministic) plus timing.json.
inline void write_evolve_outputs(const RunConfig& cfg, const EvolveResult& r, const std::string& dir) {
    using namespace experiments_detail;
    const auto base = prepare_dir(dir);
    const auto& params = cfg.params;
    const std::size_t dim = params.dimension();
    const std::size_t n = params.n_spins;
    const auto& samples = r.trajectory.samples;

    {
        const auto path = base / "amplitudes.csv";
        auto out = open_out(path);
        write_provenance(out, cfg);
        out << "t_us";
        for (std::size_t k = 0; k < dim; ++k) out << ",re_d" << k << ",im_d" << k;
        out << '\n';
        for (const auto& s : samples) {
            out << num(s.t);
            for (std::size_t k = 0; k < dim; ++k) out << ',' << num(s.state[k].real()) << ',' << num(s.state[k].imag());
            out << '\n';
        }
        finish(out, path);
    }
    {
        const auto path = base / "populations.csv";
        auto out = open_out(path);
        write_provenance(out, cfg);
        out << "t_us";
        for (std::size_t k = 0; k < dim; ++k) out << ",p" << k;
        out << ",norm_error\n";
        for (const auto& s : samples) {
            out << num(s.t);
            for (double p : populations(s.state)) out << ',' << num(p);
            out << ',' << num(s.norm_error) << '\n';
        }
        finish(out, path);
    }
    {
        const auto zpath = base / "spin_z.csv";
        const auto xypath = base / "spin_xy.csv";
        auto z = open_out(zpath);
        auto xy = open_out(xypath);
        write_provenance(z, cfg);
        write_provenance(xy, cfg);
        z << "t_us";
        xy << "t_us";
        for (std::size_t q = 0; q < n; ++q) {
            z << ",iz" << q << "_hbar";
            xy << ",ix" << q << "_hbar,iy" << q << "_hbar";
        }
        z << '\n';
        xy << '\n';
        for (const auto& s : samples) {
            const auto e = spin_expectations(to_schrodinger(s.state, s.t, params));
            z << num(s.t);
            xy << num(s.t);
            for (std::size_t q = 0; q < n; ++q) {
                z << ',' << num(e.iz[q]);
                xy << ',' << num(e.ix[q]) << ',' << num(e.iy[q]);
            }
            z << '\n';
            xy << '\n';
        }
        finish(z, zpath);
        finish(xy, xypath);
    }
    {
        nlohmann::ordered_json j;
        j["config"] = describe(cfg);
        j["end_time_us"] = r.trajectory.end_time();
        j["pulse_boundaries_us"] = r.trajectory.pulse_boundaries;
        j["steps"] = r.trajectory.steps;
        j["samples"] = samples.size();
        j["max_norm_error"] = r.trajectory.max_norm_error;
        j["convergence_error"] = r.trajectory.convergence_error
                                     ? nlohmann::ordered_json(*r.trajectory.convergence_error)
                                     : nlohmann::ordered_json(nullptr);
        if (r.fidelity) {
            j["fidelity"] = {{"target_sign", cfg.target_sign},
                             {"re", r.fidelity->value.real()},
                             {"im", r.fidelity->value.imag()},
                             {"modulus", r.fidelity->modulus}};
        }
        const auto& final_state = r.trajectory.final_state();
        j["final_populations"] = populations(final_state);
        const auto e = spin_expectations(to_schrodinger(final_state, r.trajectory.end_time(), params));
        j["final_iz"] = e.iz;
        const auto path = base / "summary.json";
        auto out = open_out(path);
        out << j.dump(2) << '\n';
        finish(out, path);
    }
    {
        nlohmann::ordered_json j;
        j["wall_seconds"] = r.wall_seconds;
        j["steps"] = r.trajectory.steps;
        const auto path = base / "timing.json";
        auto out = open_out(path);
        out << j.dump(2) << '\n';
        finish(out, path);
    }
}

inline EvolveResult cmd_evolve(const RunConfig& cfg) {
    auto r = run_evolve(cfg);
    write_evolve_outputs(cfg, r, cfg.out_dir);
    return r;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
    double ratio = 0.0;  // J'/J
    FidelityResult fidelity;
    double max_norm_error = 0.0;
};

/// Final fidelity of the configured protocol with J' = ratio * J.
inline SweepRow sweep_point(const RunConfig& base, double ratio) {
    RunConfig cfg = base;
    cfg.params.j2 = ratio * cfg.params.j1;
    const auto pulses = resolve_pulses(cfg);
    const auto traj = run_sequence(cfg.params, BasisIndex{cfg.initial}, pulses, cfg.policy,
                                   std::numeric_limits<std::size_t>::max());
    return {ratio, fidelity(bell_target(cfg.target_sign, cfg.params.n_spins), traj.final_state()),
            traj.max_norm_error};
}

/// Runs every grid point on up to `jobs` threads. Rows come back in grid
/// order; each row depends only on its ratio.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, unsigned jobs = 1) {
    if (cfg.params.n_spins < 3) throw std::invalid_argument("sweep needs at least three spins");
    const auto grid = cfg.sweep.grid();
    std::vector<SweepRow> rows(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                rows[i] = sweep_point(cfg, grid[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline void write_sweep(const RunConfig& cfg, const std::vector<SweepRow>& rows, const std::string& dir) {
    using namespace experiments_detail;
    const auto path = prepare_dir(dir) / "sweep.csv";
    auto out = open_out(path);
    write_provenance(out, cfg);
    out << "j2_over_j1,j2_2pi_mhz,re_f,im_f,abs_f,max_norm_error\n";
    for (const auto& r : rows) {
        out << num(r.ratio) << ',' << num(r.ratio * to_two_pi_mhz(cfg.params.j1)) << ','
            << num(r.fidelity.value.real()) << ',' << num(r.fidelity.value.imag()) << ','
            << num(r.fidelity.modulus) << ',' << num(r.max_norm_error) << '\n';
    }
    finish(out, path);
}

inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, unsigned jobs = 1) {
    auto rows = run_sweep(cfg, jobs);
    write_sweep(cfg, rows, cfg.out_dir);
    return rows;
}

}  // namespace spinchain
