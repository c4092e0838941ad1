#pragma once

// Scenario configuration: flat `section.key = value` lines, '#' comments.
// Frequencies are normalized to nu = 1 on load, times to units of 1/nu.

#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "floquet.hpp"
#include "io.hpp"
#include "qudit.hpp"
#include "rates.hpp"

namespace phonon_chill {

struct GridConfig {
    double r_min = 1e-2;
    std::optional<double> r_max;  ///< rate grid end; default covers the FP grid
    int points = 60;
    std::optional<double> fp_r_max;
    std::optional<double> fp_dr;
    double dt = 1.0;
    double t_end = 0.0;
};

struct CommandConfig {
    std::string name;             ///< optional; must match the CLI subcommand
    std::string sweep;            ///< n_th | q | gamma
    std::vector<double> values;   ///< sweep values (steady, rates), n_LD grid (toy), r values (validate)
    std::vector<double> n0;       ///< initial mean excitations (transient)
    double toy_n_plus = 0.0;
    double toy_r_c = 0.0;
    bool alpha_ss_correction = false;
    bool effective_tls = false;
    std::optional<double> gamma_eff;
};

struct OutputConfig {
    std::string dir = ".";
    std::string stem;
    OutputFormats formats;
    double snapshot_every = 0.0;
    bool distributions = false;
};

struct SolverConfig {
    FloquetOptions floquet;
    std::optional<double> r_floor;
    LdConvention convention = LdConvention::Lindblad;
    AlphaOptions alpha;
    unsigned threads = 0;
    double validate_tol = 1e-5;
    int oracle_sample_periods = 64;
    int oracle_settle_periods = 0;
    bool oracle_shoot = true;
};

struct ScenarioConfig {
    QuditSpec qudit;
    bool has_qudit = false;
    OscillatorSpec osc;
    double nu_input = 1.0;  ///< nu as written in the file, before normalization
    SolverConfig solver;
    GridConfig grid;
    CommandConfig command;
    OutputConfig output;
    /// Resolved key/value pairs as parsed, in file order (manifest echo).
    std::vector<std::pair<std::string, std::string>> echo;

    RateOptions rate_options() const
    {
        RateOptions opts;
        opts.floquet = solver.floquet;
        opts.r_floor = solver.r_floor;
        opts.convention = solver.convention;
        return opts;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view text, int line, const std::string& key)
{
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw ConfigError("malformed number '" + std::string(text) + "' for " + key, line);
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, std::string_view seps)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find_first_of(seps, pos);
        const auto piece = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!piece.empty()) {
            out.push_back(piece);
        }
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    return out;
}

inline std::vector<double> parse_list(std::string_view text, int line, const std::string& key)
{
    std::vector<double> out;
    for (auto piece : split(text, ", \t")) {
        out.push_back(parse_number(piece, line, key));
    }
    if (out.empty()) {
        throw ConfigError(key + " must not be empty", line);
    }
    return out;
}

/// "1.5", "2i", "0.5-1e-2i"
inline cplx parse_complex(std::string_view text, int line, const std::string& key)
{
    text = trim(text);
    if (text.empty()) {
        throw ConfigError("empty matrix entry in " + key, line);
    }
    if (text.back() != 'i') {
        return {parse_number(text, line, key), 0.0};
    }
    const std::string_view body = text.substr(0, text.size() - 1);
    // split at the last sign that is not part of an exponent and not leading
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            const double re = parse_number(body.substr(0, k), line, key);
            std::string_view im_text = body.substr(k);
            if (im_text == "+" || im_text == "-") {
                return {re, im_text == "+" ? 1.0 : -1.0};
            }
            if (im_text.front() == '+') {
                im_text.remove_prefix(1);
            }
            return {re, parse_number(im_text, line, key)};
        }
    }
    if (body.empty() || body == "+") {
        return {0.0, 1.0};
    }
    if (body == "-") {
        return {0.0, -1.0};
    }
    return {0.0, parse_number(body.front() == '+' ? body.substr(1) : body, line, key)};
}

/// Rows separated by ';', entries by whitespace or ','.
inline CMatrix parse_matrix(std::string_view text, int line, const std::string& key)
{
    const auto rows = split(text, ";");
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) {
        throw ConfigError(key + " must not be empty", line);
    }
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto entries = split(rows[static_cast<std::size_t>(i)], ", \t");
        if (static_cast<Eigen::Index>(entries.size()) != n) {
            throw ConfigError(key + " must be square (row " + std::to_string(i + 1) + " has "
                                  + std::to_string(entries.size()) + " entries, expected " + std::to_string(n) + ")",
                              line);
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = parse_complex(entries[static_cast<std::size_t>(j)], line, key);
        }
    }
    return m;
}

inline bool parse_bool(std::string_view text, int line, const std::string& key)
{
    text = trim(text);
    if (text == "true" || text == "on" || text == "yes" || text == "1") {
        return true;
    }
    if (text == "false" || text == "off" || text == "no" || text == "0") {
        return false;
    }
    throw ConfigError("expected true/false for " + key + ", got '" + std::string(text) + "'", line);
}

inline LdConvention parse_convention(std::string_view text, int line = 0)
{
    text = trim(text);
    if (text == "lindblad") {
        return LdConvention::Lindblad;
    }
    if (text == "text") {
        return LdConvention::Text;
    }
    throw ConfigError("ld convention must be 'lindblad' or 'text', got '" + std::string(text) + "'", line);
}

inline OutputFormats parse_formats(std::string_view text, int line = 0)
{
    OutputFormats f{false, false};
    for (auto piece : split(text, ", ")) {
        if (piece == "csv") {
            f.csv = true;
        } else if (piece == "json") {
            f.json = true;
        } else {
            throw ConfigError("unknown output format '" + std::string(piece) + "' (csv, json)", line);
        }
    }
    if (!f.csv && !f.json) {
        throw ConfigError("at least one output format is required", line);
    }
    return f;
}

} // namespace detail

/// Parses and resolves a scenario. Errors carry the offending line.
inline ScenarioConfig parse_config(const std::string& text)
{
    ScenarioConfig cfg;
    std::map<std::string, int> seen;

    // raw values that need cross-key resolution
    std::optional<std::pair<double, int>> gamma, q, lambda, eta, nu, n_th;
    std::optional<int> layout_line;
    std::optional<std::pair<int, int>> levels;
    std::optional<std::pair<CMatrix, int>> hamiltonian, coupling;
    std::vector<std::pair<std::string, int>> jump_specs;

    using Handler = std::function<void(std::string_view, int, const std::string&)>;
    auto number = [](double& target, bool non_negative, bool positive = false) -> Handler {
        return [&target, non_negative, positive](std::string_view v, int line, const std::string& key) {
            const double x = detail::parse_number(v, line, key);
            if (positive && !(x > 0.0)) {
                throw ConfigError(key + " must be positive", line);
            }
            if (non_negative && !(x >= 0.0)) {
                throw ConfigError(key + " must be non-negative", line);
            }
            target = x;
        };
    };
    auto optional_number = [](std::optional<double>& target, bool positive) -> Handler {
        return [&target, positive](std::string_view v, int line, const std::string& key) {
            const double x = detail::parse_number(v, line, key);
            if (positive && !(x > 0.0)) {
                throw ConfigError(key + " must be positive", line);
            }
            target = x;
        };
    };
    auto raw = [](std::optional<std::pair<double, int>>& target, bool positive) -> Handler {
        return [&target, positive](std::string_view v, int line, const std::string& key) {
            const double x = detail::parse_number(v, line, key);
            if (positive ? !(x > 0.0) : !(x >= 0.0)) {
                throw ConfigError(key + (positive ? " must be positive" : " must be non-negative"), line);
            }
            target = {x, line};
        };
    };
    auto integer = [](int& target, int min) -> Handler {
        return [&target, min](std::string_view v, int line, const std::string& key) {
            const double x = detail::parse_number(v, line, key);
            if (x != std::floor(x) || x < min || x > 1e6) {
                throw ConfigError(key + " must be an integer >= " + std::to_string(min), line);
            }
            target = static_cast<int>(x);
        };
    };
    auto flag = [](bool& target) -> Handler {
        return [&target](std::string_view v, int line, const std::string& key) {
            target = detail::parse_bool(v, line, key);
        };
    };

    QuditSpec& qs = cfg.qudit;
    std::map<std::string, Handler> keys{
        {"qudit.layout",
         [&](std::string_view v, int line, const std::string&) {
             v = detail::trim(v);
             if (v == "two_level" || v == "tls") {
                 qs.layout = Layout::TwoLevel;
                 qs.levels = 2;
             } else if (v == "ladder") {
                 qs.layout = Layout::Ladder;
                 qs.levels = 3;
             } else if (v == "lambda") {
                 qs.layout = Layout::Lambda;
                 qs.levels = 3;
             } else if (v == "generic") {
                 qs.layout = Layout::Generic;
             } else {
                 throw ConfigError("unknown layout '" + std::string(v) + "' (two_level, ladder, lambda, generic)",
                                   line);
             }
             layout_line = line;
         }},
        {"qudit.levels",
         [&](std::string_view v, int line, const std::string& key) {
             int d = 0;
             integer(d, 2)(v, line, key);
             levels = {d, line};
         }},
        {"qudit.delta1", number(qs.delta1, false)},
        {"qudit.delta2", number(qs.delta2, false)},
        {"qudit.omega1", number(qs.omega1, false)},
        {"qudit.omega2", number(qs.omega2, false)},
        {"qudit.gamma1", number(qs.gamma1, true)},
        {"qudit.gamma2", number(qs.gamma2, true)},
        {"qudit.hamiltonian",
         [&](std::string_view v, int line, const std::string& key) {
             hamiltonian = {detail::parse_matrix(v, line, key), line};
         }},
        {"qudit.coupling",
         [&](std::string_view v, int line, const std::string& key) {
             coupling = {detail::parse_matrix(v, line, key), line};
         }},
        {"qudit.jumps",
         [&](std::string_view v, int line, const std::string&) {
             for (auto piece : detail::split(v, ";")) {
                 jump_specs.emplace_back(std::string(piece), line);
             }
         }},
        {"oscillator.nu", raw(nu, true)},
        {"oscillator.gamma", raw(gamma, false)},
        {"oscillator.q", raw(q, true)},
        {"oscillator.n_th", raw(n_th, false)},
        {"oscillator.lambda", raw(lambda, false)},
        {"oscillator.eta", raw(eta, false)},
        {"solver.max_span", integer(cfg.solver.floquet.max_span, 1)},
        {"solver.initial_span", integer(cfg.solver.floquet.initial_span, 1)},
        {"solver.tol", number(cfg.solver.floquet.tol, true, true)},
        {"solver.r_floor", optional_number(cfg.solver.r_floor, true)},
        {"solver.ld_convention",
         [&](std::string_view v, int line, const std::string&) {
             cfg.solver.convention = detail::parse_convention(v, line);
         }},
        {"solver.alpha_max_iterations", integer(cfg.solver.alpha.max_iterations, 1)},
        {"solver.alpha_tol", number(cfg.solver.alpha.tolerance, true, true)},
        {"solver.threads",
         [&](std::string_view v, int line, const std::string& key) {
             int t = 0;
             integer(t, 0)(v, line, key);
             cfg.solver.threads = static_cast<unsigned>(t);
         }},
        {"solver.validate_tol", number(cfg.solver.validate_tol, true, true)},
        {"solver.oracle_sample_periods", integer(cfg.solver.oracle_sample_periods, 1)},
        {"solver.oracle_settle_periods", integer(cfg.solver.oracle_settle_periods, 0)},
        {"solver.oracle_shoot", flag(cfg.solver.oracle_shoot)},
        {"grid.r_min", number(cfg.grid.r_min, true, true)},
        {"grid.r_max", optional_number(cfg.grid.r_max, true)},
        {"grid.points", integer(cfg.grid.points, 2)},
        {"grid.fp_r_max", optional_number(cfg.grid.fp_r_max, true)},
        {"grid.fp_dr", optional_number(cfg.grid.fp_dr, true)},
        {"grid.dt", number(cfg.grid.dt, true, true)},
        {"grid.t_end", number(cfg.grid.t_end, true)},
        {"command.name",
         [&](std::string_view v, int line, const std::string&) {
             v = detail::trim(v);
             static const std::set<std::string_view> names{"rates", "steady", "transient", "toy", "validate"};
             if (!names.count(v)) {
                 throw ConfigError("unknown command '" + std::string(v) + "'", line);
             }
             cfg.command.name = std::string(v);
         }},
        {"command.sweep",
         [&](std::string_view v, int line, const std::string&) {
             v = detail::trim(v);
             if (v != "n_th" && v != "q" && v != "gamma") {
                 throw ConfigError("sweep axis must be n_th, q or gamma", line);
             }
             cfg.command.sweep = std::string(v);
         }},
        {"command.values",
         [&](std::string_view v, int line, const std::string& key) {
             cfg.command.values = detail::parse_list(v, line, key);
             for (double x : cfg.command.values) {
                 if (!(x >= 0.0)) {
                     throw ConfigError(key + " entries must be non-negative", line);
                 }
             }
         }},
        {"command.n0",
         [&](std::string_view v, int line, const std::string& key) {
             cfg.command.n0 = detail::parse_list(v, line, key);
             for (double x : cfg.command.n0) {
                 if (!(x > 0.0)) {
                     throw ConfigError(key + " entries must be positive", line);
                 }
             }
         }},
        {"command.toy_n_plus", number(cfg.command.toy_n_plus, true, true)},
        {"command.toy_r_c", number(cfg.command.toy_r_c, true, true)},
        {"command.alpha_ss_correction", flag(cfg.command.alpha_ss_correction)},
        {"command.effective_tls", flag(cfg.command.effective_tls)},
        {"command.gamma_eff", optional_number(cfg.command.gamma_eff, true)},
        {"output.dir", [&](std::string_view v, int, const std::string&) { cfg.output.dir = std::string(detail::trim(v)); }},
        {"output.stem", [&](std::string_view v, int, const std::string&) { cfg.output.stem = std::string(detail::trim(v)); }},
        {"output.formats",
         [&](std::string_view v, int line, const std::string&) { cfg.output.formats = detail::parse_formats(v, line); }},
        {"output.snapshot_every", number(cfg.output.snapshot_every, true)},
        {"output.distributions", flag(cfg.output.distributions)},
    };

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find('\n', pos);
        std::string_view line(text.data() + pos, (next == std::string::npos ? text.size() : next) - pos);
        pos = next == std::string::npos ? text.size() + 1 : next + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'section.key = value'", line_no);
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        const auto dot = key.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
            throw ConfigError("key '" + key + "' must have the form section.key", line_no);
        }
        const auto it = keys.find(key);
        if (it == keys.end()) {
            static const std::set<std::string> sections{"qudit", "oscillator", "solver", "grid", "command", "output"};
            if (!sections.count(key.substr(0, dot))) {
                throw ConfigError("unknown section '" + key.substr(0, dot) + "'", line_no);
            }
            throw ConfigError("unknown key '" + key + "'", line_no);
        }
        if (value.empty()) {
            throw ConfigError("missing value for " + key, line_no);
        }
        if (const auto prev = seen.find(key); prev != seen.end()) {
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")",
                              line_no);
        }
        seen[key] = line_no;
        it->second(value, line_no, key);
        cfg.echo.emplace_back(key, std::string(value));
    }

    // oscillator
    if (gamma && q) {
        throw ConfigError("give exactly one of oscillator.gamma and oscillator.q", std::max(gamma->second, q->second));
    }
    if (lambda && eta) {
        throw ConfigError("give exactly one of oscillator.lambda and oscillator.eta",
                          std::max(lambda->second, eta->second));
    }
    cfg.nu_input = nu ? nu->first : 1.0;
    const double nu_in = cfg.nu_input;
    cfg.osc.nu = 1.0;
    if (gamma) {
        cfg.osc.gamma = gamma->first / nu_in;
    } else if (q) {
        cfg.osc.gamma = 1.0 / q->first;
    }
    if (lambda) {
        cfg.osc.lambda = lambda->first / nu_in;
    } else if (eta) {
        cfg.osc.lambda = eta->first;
    }
    if (n_th) {
        cfg.osc.n_th = n_th->first;
    }

    // qudit
    cfg.has_qudit = layout_line.has_value();
    if (qs.layout == Layout::Generic && cfg.has_qudit) {
        if (!hamiltonian) {
            throw ConfigError("generic layout requires qudit.hamiltonian", *layout_line);
        }
        if (!coupling) {
            throw ConfigError("generic layout requires qudit.coupling", *layout_line);
        }
        qs.hamiltonian = hamiltonian->first / nu_in;
        qs.coupling = coupling->first;
        qs.levels = static_cast<int>(qs.hamiltonian.rows());
        if (levels && levels->first != qs.levels) {
            throw ConfigError("qudit.levels does not match the Hamiltonian dimension", levels->second);
        }
        for (const auto& [spec, line] : jump_specs) {
            const auto parts = detail::split(spec, " \t");
            if (parts.size() != 3) {
                throw ConfigError("each jump is 'rate m n' (rate * D[|m><n|])", line);
            }
            const double rate = detail::parse_number(parts[0], line, "qudit.jumps");
            const double m = detail::parse_number(parts[1], line, "qudit.jumps");
            const double n = detail::parse_number(parts[2], line, "qudit.jumps");
            if (!(rate >= 0.0)) {
                throw ConfigError("jump rates must be non-negative", line);
            }
            if (m != std::floor(m) || n != std::floor(n) || m < 0 || n < 0 || m >= qs.levels || n >= qs.levels) {
                throw ConfigError("jump level index out of range", line);
            }
            qs.jumps.push_back({rate / nu_in, sigma(qs.levels, static_cast<int>(m), static_cast<int>(n))});
        }
        try {
            build_level_system(qs);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what(), hamiltonian->second);
        }
    } else {
        for (const auto* k : {"qudit.hamiltonian", "qudit.coupling", "qudit.jumps", "qudit.levels"}) {
            if (seen.count(k)) {
                throw ConfigError(std::string(k) + " is only valid with layout = generic", seen.at(k));
            }
        }
    }
    for (double* f : {&qs.delta1, &qs.delta2, &qs.omega1, &qs.omega2, &qs.gamma1, &qs.gamma2}) {
        *f /= nu_in;
    }
    if (cfg.command.gamma_eff) {
        *cfg.command.gamma_eff /= nu_in;
    }

    // times given in the same time unit as 1/nu
    cfg.grid.dt *= nu_in;
    cfg.grid.t_end *= nu_in;
    cfg.output.snapshot_every *= nu_in;
    if (cfg.command.sweep == "gamma") {
        for (double& v : cfg.command.values) {
            v /= nu_in;
        }
    }

    if (cfg.command.sweep.empty() != cfg.command.values.empty() && !cfg.command.sweep.empty()) {
        throw ConfigError("command.sweep requires command.values", seen.at("command.sweep"));
    }
    if (cfg.command.sweep == "q") {
        for (double v : cfg.command.values) {
            if (!(v > 0.0)) {
                throw ConfigError("Q values must be positive", seen.at("command.values"));
            }
        }
    }
    if (cfg.solver.floquet.initial_span > cfg.solver.floquet.max_span) {
        cfg.solver.floquet.initial_span = cfg.solver.floquet.max_span;
    }
    return cfg;
}

/// Command-specific required keys; call once the subcommand is known.
inline void require_for_command(const ScenarioConfig& cfg, const std::string& command)
{
    auto has = [&](const std::string& key) {
        for (const auto& kv : cfg.echo) {
            if (kv.first == key) {
                return true;
            }
        }
        return false;
    };
    if (!cfg.command.name.empty() && cfg.command.name != command) {
        throw ConfigError("config is for command '" + cfg.command.name + "' but '" + command + "' was requested");
    }
    if (command == "toy") {
        for (const auto* k : {"command.toy_n_plus", "command.toy_r_c", "command.values"}) {
            if (!has(k)) {
                throw ConfigError(std::string("missing required key ") + k);
            }
        }
        return;
    }
    if (!cfg.has_qudit) {
        throw ConfigError("missing required key qudit.layout");
    }
    if (!has("oscillator.gamma") && !has("oscillator.q")) {
        throw ConfigError("missing required key: one of oscillator.gamma, oscillator.q");
    }
    if (!has("oscillator.lambda") && !has("oscillator.eta")) {
        throw ConfigError("missing required key: one of oscillator.lambda, oscillator.eta");
    }
    const bool sweeps_nth = cfg.command.sweep == "n_th";
    if (!has("oscillator.n_th") && !sweeps_nth) {
        throw ConfigError("missing required key oscillator.n_th");
    }
    if (command == "steady" && cfg.command.sweep.empty()) {
        throw ConfigError("steady needs command.sweep (n_th, q or gamma) and command.values");
    }
    if (command == "transient") {
        if (cfg.command.n0.empty()) {
            throw ConfigError("transient needs command.n0");
        }
        if (!has("grid.t_end")) {
            throw ConfigError("transient needs grid.t_end");
        }
    }
    if (cfg.command.effective_tls && cfg.qudit.layout != Layout::Ladder) {
        throw ConfigError("command.effective_tls needs a ladder layout");
    }
}

} // namespace phonon_chill
