#pragma once

// Run configuration: a plain "key = value" text format plus
// command-line overrides. Frequencies are written in units of 2*pi*MHz
// and converted to rad/us on ingestion.
//
//   n_spins = 3
//   larmor  = 100, 200, 400
//   j1 = 5
//   j2 = 0.2
//   rabi = 0.1
//   pulse = spin=0 from=|000> angle=pi/2 phase=0
//   pulse = spin=2 from=|001> angle=pi phase=0
//   pulse = carrier=105.2 angle=pi/2        # explicit carrier
//
// The first `pulse` line of a source replaces the default pulse list;
// later lines append.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chain_model.hpp"
#include "drive.hpp"
#include "integrator.hpp"

namespace spinchain {

class ConfigError : public std::runtime_error {
public:
    enum class Kind { io, malformed, unknown_key, non_physical };

    ConfigError(Kind kind, const std::string& message)
        : std::runtime_error(prefix(kind) + message), kind_(kind), detail_(message) {}

    Kind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }

private:
    static std::string prefix(Kind kind) {
        switch (kind) {
            case Kind::io: return "config: cannot read: ";
            case Kind::malformed: return "config: malformed entry: ";
            case Kind::unknown_key: return "config: unknown key: ";
            case Kind::non_physical: return "config: non-physical value: ";
        }
        return "config: ";
    }

    Kind kind_;
    std::string detail_;
};

/// Pulse as written in a config: either a symbolic single-spin flip,
/// resolved through flip_resonance, or an explicit carrier.
struct PulseSpec {
    std::optional<std::size_t> spin;
    std::uint32_t from = 0;
    std::optional<double> carrier;  // rad/us
    double angle = 0.0;             // rad
    double phase = 0.0;             // rad
};

struct SweepSpec {
    double start = 0.0;
    double stop = 0.2;
    double step = 0.005;

    /// Grid of J'/J ratios, endpoints included.
    std::vector<double> grid() const {
        std::vector<double> g;
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        g.reserve(n);
        for (std::size_t i = 0; i < n; ++i) g.push_back(start + static_cast<double>(i) * step);
        return g;
    }
};

struct RunConfig {
    ChainParams params = reference_params(0.2);
    std::uint32_t initial = 0;
    std::vector<PulseSpec> pulses;
    StepPolicy policy;
    std::size_t sample_stride = 100;
    int target_sign = -1;
    SweepSpec sweep;
    std::string out_dir = "out";

    // Norm drift is reported rather than fatal unless strict_norm is set.
    RunConfig() {
        policy.strict_norm = false;
        pulses.push_back({0, 0b000, std::nullopt, std::numbers::pi / 2, 0.0});
        pulses.push_back({2, 0b001, std::nullopt, std::numbers::pi, 0.0});
    }
};

/// Parses "1.5", "pi", "-pi", "0.5pi", "pi/2", "3pi/4" into radians (or
/// plain numbers).
inline std::optional<double> parse_angle(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    auto number = [](std::string_view s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        double v = 0.0;
        const char* first = s.data();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    };
    text = trim(text);
    const auto pi_pos = text.find("pi");
    if (pi_pos == std::string_view::npos) return number(text);

    double factor = 1.0;
    const auto head = text.substr(0, pi_pos);
    if (head == "-") {
        factor = -1.0;
    } else if (!head.empty() && head != "+") {
        auto h = number(head);
        if (!h) return std::nullopt;
        factor = *h;
    }
    auto tail = text.substr(pi_pos + 2);
    double divisor = 1.0;
    if (!tail.empty()) {
        if (tail.front() != '/') return std::nullopt;
        auto d = number(tail.substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        divisor = *d;
    }
    return factor * std::numbers::pi / divisor;
}

namespace config_detail {

inline std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

inline double parse_number(const std::string& key, const std::string& value) {
    auto v = parse_angle(value);
    if (!v || value.find("pi") != std::string::npos)
        throw ConfigError(ConfigError::Kind::malformed, key + " = '" + value + "' is not a number");
    return *v;
}

inline long long parse_integer(const std::string& key, const std::string& value) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(ConfigError::Kind::malformed, key + " = '" + value + "' is not an integer");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(ConfigError::Kind::malformed, key + " = '" + value + "' is not a boolean");
}

/// Accepts a decimal index or a ket such as |001>.
inline std::uint32_t parse_basis(const std::string& key, const std::string& value) {
    if (!value.empty() && value.front() == '|') {
        if (value.size() < 3 || value.back() != '>')
            throw ConfigError(ConfigError::Kind::malformed, key + " = '" + value + "' is not a ket");
        std::uint32_t x = 0;
        for (char c : value.substr(1, value.size() - 2)) {
            if (c != '0' && c != '1')
                throw ConfigError(ConfigError::Kind::malformed, key + " = '" + value + "' is not a ket");
            x = (x << 1) | static_cast<std::uint32_t>(c - '0');
        }
        return x;
    }
    const long long v = parse_integer(key, value);
    if (v < 0) throw ConfigError(ConfigError::Kind::non_physical, key + " must be non-negative");
    return static_cast<std::uint32_t>(v);
}

inline PulseSpec parse_pulse(const std::string& value) {
    PulseSpec spec;
    bool has_from = false;
    bool has_angle = false;
    std::istringstream in(value);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigError::Kind::malformed, "pulse field '" + token + "' lacks '='");
        const std::string field = token.substr(0, eq);
        const std::string arg = token.substr(eq + 1);
        if (field == "spin") {
            const long long q = parse_integer("pulse.spin", arg);
            if (q < 0) throw ConfigError(ConfigError::Kind::non_physical, "pulse.spin must be non-negative");
            spec.spin = static_cast<std::size_t>(q);
        } else if (field == "from") {
            spec.from = parse_basis("pulse.from", arg);
            has_from = true;
        } else if (field == "carrier") {
            spec.carrier = from_two_pi_mhz(parse_number("pulse.carrier", arg));
        } else if (field == "angle" || field == "phase") {
            auto v = parse_angle(arg);
            if (!v)
                throw ConfigError(ConfigError::Kind::malformed,
                                  "pulse." + field + " = '" + arg + "' is not an angle");
            if (field == "angle") {
                spec.angle = *v;
                has_angle = true;
            } else {
                spec.phase = *v;
            }
        } else {
            throw ConfigError(ConfigError::Kind::unknown_key, "pulse." + field);
        }
    }
    if (spec.spin && spec.carrier)
        throw ConfigError(ConfigError::Kind::malformed, "pulse gives both spin= and carrier=");
    if (!spec.spin && !spec.carrier)
        throw ConfigError(ConfigError::Kind::malformed, "pulse needs spin= (with from=) or carrier=");
    if (spec.carrier && has_from)
        throw ConfigError(ConfigError::Kind::malformed, "pulse from= only applies to spin= pulses");
    if (!has_angle) throw ConfigError(ConfigError::Kind::malformed, "pulse needs angle=");
    return spec;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(parse_number(key, trim(item)));
    if (out.empty()) throw ConfigError(ConfigError::Kind::malformed, key + " is empty");
    return out;
}

}  // namespace config_detail

/// Accumulates key/value assignments into a RunConfig.
class ConfigBuilder {
public:
    ConfigBuilder() = default;
    explicit ConfigBuilder(RunConfig base) : cfg_(std::move(base)) {}

    /// Starts a new source (file or command line); the next `pulse`
    /// assignment replaces the existing list instead of appending.
    void begin_source() { pulses_replaced_ = false; }

    void set(const std::string& raw_key, const std::string& raw_value) {
        using namespace config_detail;
        const std::string key = trim(raw_key);
        const std::string value = trim(raw_value);
        if (value.empty()) throw ConfigError(ConfigError::Kind::malformed, key + " has no value");
        auto& p = cfg_.params;
        if (key == "n_spins") {
            const long long n = parse_integer(key, value);
            if (n < 2 || n > 20) throw ConfigError(ConfigError::Kind::non_physical, "n_spins must be in [2, 20]");
            p.n_spins = static_cast<std::size_t>(n);
        } else if (key == "larmor") {
            p.larmor = parse_list(key, value);
            for (auto& w : p.larmor) w = from_two_pi_mhz(w);
        } else if (key == "j1") {
            p.j1 = from_two_pi_mhz(parse_number(key, value));
        } else if (key == "j2") {
            p.j2 = from_two_pi_mhz(parse_number(key, value));
        } else if (key == "rabi") {
            p.rabi = from_two_pi_mhz(parse_number(key, value));
        } else if (key == "initial") {
            cfg_.initial = parse_basis(key, value);
        } else if (key == "pulse") {
            if (!pulses_replaced_) cfg_.pulses.clear();
            pulses_replaced_ = true;
            cfg_.pulses.push_back(parse_pulse(value));
        } else if (key == "points_per_period") {
            cfg_.policy.points_per_period = static_cast<int>(parse_integer(key, value));
        } else if (key == "max_dt") {
            cfg_.policy.max_dt = parse_number(key, value);
        } else if (key == "convergence_check") {
            cfg_.policy.convergence_check = parse_bool(key, value);
        } else if (key == "strict_norm") {
            cfg_.policy.strict_norm = parse_bool(key, value);
        } else if (key == "sample_stride") {
            const long long s = parse_integer(key, value);
            if (s <= 0) throw ConfigError(ConfigError::Kind::non_physical, "sample_stride must be positive");
            cfg_.sample_stride = static_cast<std::size_t>(s);
        } else if (key == "target_sign") {
            const long long s = parse_integer(key, value);
            if (s != 1 && s != -1) throw ConfigError(ConfigError::Kind::non_physical, "target_sign must be +1 or -1");
            cfg_.target_sign = static_cast<int>(s);
        } else if (key == "sweep_start") {
            cfg_.sweep.start = parse_number(key, value);
        } else if (key == "sweep_stop") {
            cfg_.sweep.stop = parse_number(key, value);
        } else if (key == "sweep_step") {
            cfg_.sweep.step = parse_number(key, value);
        } else if (key == "out_dir") {
            cfg_.out_dir = value;
        } else {
            throw ConfigError(ConfigError::Kind::unknown_key, "'" + key + "'");
        }
    }

    /// "key=value" as given to --set.
    void set_assignment(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigError::Kind::malformed, "'" + assignment + "' is not key=value");
        set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }

    void parse_text(std::istream& in, const std::string& source) {
        begin_source();
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = config_detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(ConfigError::Kind::malformed,
                                  source + ":" + std::to_string(line_no) + ": expected key = value");
            try {
                set(line.substr(0, eq), line.substr(eq + 1));
            } catch (const ConfigError& e) {
                throw ConfigError(e.kind(), source + ":" + std::to_string(line_no) + ": " + e.detail());
            }
        }
    }

    /// Checks cross-field invariants and returns the finished config.
    RunConfig finish() const {
        const RunConfig& c = cfg_;
        try {
            c.params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ConfigError::Kind::non_physical, e.what());
        }
        const std::size_t dim = c.params.dimension();
        if (c.initial >= dim)
            throw ConfigError(ConfigError::Kind::non_physical, "initial state outside the basis");
        if (c.pulses.empty()) throw ConfigError(ConfigError::Kind::non_physical, "no pulses given");
        for (const auto& p : c.pulses) {
            if (!(p.angle > 0.0))
                throw ConfigError(ConfigError::Kind::non_physical, "pulse angle must be positive");
            if (p.spin && *p.spin >= c.params.n_spins)
                throw ConfigError(ConfigError::Kind::non_physical, "pulse spin outside the chain");
            if (p.spin && p.from >= dim)
                throw ConfigError(ConfigError::Kind::non_physical, "pulse from= state outside the basis");
            if (p.carrier && !(*p.carrier > 0.0))
                throw ConfigError(ConfigError::Kind::non_physical, "pulse carrier must be positive");
        }
        if (c.policy.points_per_period <= 0)
            throw ConfigError(ConfigError::Kind::non_physical, "points_per_period must be positive");
        if (!(c.policy.max_dt > 0.0))
            throw ConfigError(ConfigError::Kind::non_physical, "max_dt must be positive");
        if (!(c.sweep.step > 0.0))
            throw ConfigError(ConfigError::Kind::non_physical, "sweep_step must be positive");
        if (c.sweep.start < 0.0 || c.sweep.stop < c.sweep.start)
            throw ConfigError(ConfigError::Kind::non_physical, "sweep range must satisfy 0 <= start <= stop");
        return c;
    }

    const RunConfig& current() const { return cfg_; }

private:
    RunConfig cfg_;
    bool pulses_replaced_ = false;
};

/// Reads `path` (empty: defaults only), applies "key=value" overrides in
/// order, then validates.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    ConfigBuilder builder;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError(ConfigError::Kind::io, path);
        builder.parse_text(in, path);
    }
    builder.begin_source();
    for (const auto& o : overrides) builder.set_assignment(o);
    return builder.finish();
}

/// Turns the config's pulse specs into concrete pulses.
inline std::vector<Pulse> resolve_pulses(const RunConfig& cfg) {
    std::vector<Pulse> out;
    out.reserve(cfg.pulses.size());
    for (const auto& spec : cfg.pulses) {
        const double carrier =
            spec.carrier ? *spec.carrier : flip_resonance(cfg.params, BasisIndex{spec.from}, *spec.spin);
        out.push_back({carrier, spec.phase, spec.angle});
    }
    return out;
}

namespace config_detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Shortest representation that parses back to the same double.
inline std::string fmt_exact(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace config_detail

/// Fully resolved configuration as "key = value" lines, frequencies in
/// 2*pi*MHz. Parsing these lines back reproduces the config.
inline std::vector<std::string> describe(const RunConfig& c) {
    using config_detail::fmt;
    using config_detail::fmt_exact;
    std::vector<std::string> lines;
    const auto& p = c.params;
    lines.push_back("n_spins = " + std::to_string(p.n_spins));
    std::string larmor;
    for (std::size_t q = 0; q < p.larmor.size(); ++q)
        larmor += (q ? ", " : "") + fmt(to_two_pi_mhz(p.larmor[q]));
    lines.push_back("larmor = " + larmor);
    lines.push_back("j1 = " + fmt(to_two_pi_mhz(p.j1)));
    lines.push_back("j2 = " + fmt(to_two_pi_mhz(p.j2)));
    lines.push_back("rabi = " + fmt(to_two_pi_mhz(p.rabi)));
    lines.push_back("initial = " + ket_label(BasisIndex{c.initial}, p.n_spins));
    const auto resolved = resolve_pulses(c);
    for (std::size_t i = 0; i < c.pulses.size(); ++i) {
        const auto& s = c.pulses[i];
        std::string line = "pulse = ";
        if (s.spin)
            line += "spin=" + std::to_string(*s.spin) + " from=" + ket_label(BasisIndex{s.from}, p.n_spins);
        else
            line += "carrier=" + fmt(to_two_pi_mhz(*s.carrier));
        line += " angle=" + fmt_exact(s.angle) + " phase=" + fmt_exact(s.phase);
        line += "  # carrier " + fmt(to_two_pi_mhz(resolved[i].carrier));
        lines.push_back(line);
    }
    lines.push_back("points_per_period = " + std::to_string(c.policy.points_per_period));
    lines.push_back("max_dt = " + fmt_exact(c.policy.max_dt));
    lines.push_back(std::string("convergence_check = ") + (c.policy.convergence_check ? "true" : "false"));
    lines.push_back(std::string("strict_norm = ") + (c.policy.strict_norm ? "true" : "false"));
    lines.push_back("sample_stride = " + std::to_string(c.sample_stride));
    lines.push_back("target_sign = " + std::to_string(c.target_sign));
    lines.push_back("sweep_start = " + fmt_exact(c.sweep.start));
    lines.push_back("sweep_stop = " + fmt_exact(c.sweep.stop));
    lines.push_back("sweep_step = " + fmt_exact(c.sweep.step));
    return lines;
}

}  // namespace spinchain
