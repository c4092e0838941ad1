#pragma once

// Lamb-Dicke spectral function and rates, displacement-dependent collective
// cooling/heating rates, rate curves, and the Bessel-suppression estimates.

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "floquet.hpp"
#include "linalg.hpp"
#include "qudit.hpp"

namespace phonon_chill {

/// How the LD rates are read off the spectral function.
enum class LdConvention {
    Lindblad,  ///< Gamma_c = 2 lambda^2 Re(S(nu) - S(-nu)) + gamma, as in the Lindblad coefficients
    Text,      ///< Gamma_c = lambda^2 Re(S(nu) - S(-nu)) + gamma, the shorthand form
};

inline std::string to_string(LdConvention c)
{
    return c == LdConvention::Lindblad ? "lindblad" : "text";
}

/// S(sign * nu) = -v_row (M~ + sign i nu)^-1 v0 with v0 = Tr{s~ dV rho_ss}.
inline cplx ld_spectral(const ReducedBloch& red, int sign, double nu = 1.0)
{
    if (sign != 1 && sign != -1) {
        throw InvalidInput("spectral sign must be +1 or -1");
    }
    const StaticSteadyState ss = solve_static_steady(red);
    const cplx v_mean = red.bloch.v_row * ss.bloch;
    const CVector v0 = red.fluctuation_source(ss.bloch, v_mean);
    const CMatrix a = red.m_tilde + I * (sign * nu) * CMatrix::Identity(red.size(), red.size());
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (!(lu.rcond() > 1e-14)) {
        throw SolverError("LD spectral function is resonant (M~ + i sign nu is singular)");
    }
    const CVector x = -lu.solve(v0);
    return (red.v_row_reduced() * x)(0);
}

struct LDRates {
    cplx s_plus{0.0, 0.0};
    cplx s_minus{0.0, 0.0};
    double cooling = 0.0;   ///< Gamma_c in units of nu
    double heating = 0.0;   ///< gamma N in units of nu
    std::optional<double> n_ld;  ///< empty when cooling <= 0 ("LD-unstable")
    double positivity_violation = 0.0;  ///< magnitude of any Re S < 0

    bool unstable() const { return !n_ld.has_value(); }
};

inline LDRates ld_rates(const ReducedBloch& red, const OscillatorSpec& osc,
                        LdConvention convention = LdConvention::Lindblad)
{
    validate(osc);
    LDRates out;
    if (osc.lambda == 0.0) {
        out.cooling = osc.gamma;
        out.heating = osc.thermal_heating();
    } else {
        out.s_plus = ld_spectral(red, +1, osc.nu);
        out.s_minus = ld_spectral(red, -1, osc.nu);
        const double factor = (convention == LdConvention::Lindblad ? 2.0 : 1.0) * osc.lambda * osc.lambda;
        out.cooling = factor * (out.s_plus - out.s_minus).real() + osc.gamma;
        out.heating = factor * out.s_minus.real() + osc.thermal_heating();
        out.positivity_violation = std::max({0.0, -out.s_plus.real(), -out.s_minus.real()});
    }
    if (out.cooling > 0.0) {
        out.n_ld = out.heating / out.cooling;
    }
    return out;
}

struct RateOptions {
    FloquetOptions floquet;
    /// Below this amplitude the 0/0 forms are replaced by their small-r limit.
    /// Default 1e-3 / eta.
    std::optional<double> r_floor;
    LdConvention convention = LdConvention::Lindblad;

    double floor_for(double eta) const { return r_floor ? *r_floor : 1e-3 / eta; }
};

struct CollectiveRates {
    double r = 0.0;
    double cooling = 0.0;  ///< Gamma_c(r)
    double heating = 0.0;  ///< gamma N(r)
    cplx v_minus1_over_r{0.0, 0.0};
    cplx s0{0.0, 0.0};               ///< S_0(-nu, r)
    cplx s_minus2_over_r2{0.0, 0.0}; ///< S_{-2}(-nu, r) / r^2
    int span = 0;
    bool small_r_limit = false;
};

namespace detail {

struct HarmonicPieces {
    cplx v_minus1;
    cplx s0;
    cplx s_minus2;
    int span;
};

inline HarmonicPieces harmonic_pieces(const ReducedBloch& red, double r, double nu, const FloquetOptions& opts)
{
    const DriveContext ctx(red, r, nu);
    const DynamicSteadyState dss = solve_dynamic_steady(ctx, opts);
    return {dss.v.at_or_zero(-1), dss.spectral_minus.s.at_or_zero(0), dss.spectral_minus.s.at_or_zero(-2),
            std::max(dss.bloch.span, dss.spectral_minus.span)};
}

/// lim_{r->0} V_{-1} / r from the first-order harmonic: (M~ + i nu) s~^(-1) = i lambda r V~ s~^(0).
inline cplx linear_response_v(const ReducedBloch& red, double nu)
{
    const StaticSteadyState ss = solve_static_steady(red);
    const CMatrix a = red.m_tilde + I * nu * CMatrix::Identity(red.size(), red.size());
    const CVector s1 = a.partialPivLu().solve(I * red.lambda * (red.v_tilde * ss.reduced));
    return (red.v_row_reduced() * s1)(0);
}

} // namespace detail

inline CollectiveRates collective_rates(const ReducedBloch& red, const OscillatorSpec& osc, double r,
                                        const RateOptions& opts = {})
{
    validate(osc);
    if (!(r >= 0.0)) {
        throw InvalidInput("motional amplitude r must be non-negative");
    }
    CollectiveRates out;
    out.r = r;
    const double lambda = osc.lambda;
    if (lambda == 0.0) {
        out.cooling = osc.gamma;
        out.heating = osc.thermal_heating();
        return out;
    }
    const double floor = opts.floor_for(osc.eta());
    if (r >= floor) {
        const auto p = detail::harmonic_pieces(red, r, osc.nu, opts.floquet);
        out.v_minus1_over_r = p.v_minus1 / r;
        out.s0 = p.s0;
        out.s_minus2_over_r2 = p.s_minus2 / (r * r);
        out.span = p.span;
    } else {
        out.small_r_limit = true;
        out.v_minus1_over_r = detail::linear_response_v(red, osc.nu);
        const auto here = detail::harmonic_pieces(red, r, osc.nu, opts.floquet);
        const auto p1 = detail::harmonic_pieces(red, floor, osc.nu, opts.floquet);
        const auto p2 = detail::harmonic_pieces(red, 2.0 * floor, osc.nu, opts.floquet);
        const cplx f1 = p1.s_minus2 / (floor * floor);
        const cplx f2 = p2.s_minus2 / (4.0 * floor * floor);
        // S_{-2}/r^2 is even in r: f(r) = f0 + c r^2 + O(r^4)
        out.s_minus2_over_r2 = (4.0 * f1 - f2) / 3.0;
        out.s0 = here.s0;
        out.span = std::max({here.span, p1.span, p2.span});
    }
    const double l2 = lambda * lambda;
    out.cooling = osc.gamma + (2.0 * I * lambda * out.v_minus1_over_r - 2.0 * l2 * out.s_minus2_over_r2).real();
    const cplx s_minus2 = out.s_minus2_over_r2 * (r * r);
    out.heating = osc.thermal_heating() + 2.0 * l2 * (out.s0 - s_minus2).real();
    if (!std::isfinite(out.cooling) || !std::isfinite(out.heating)) {
        std::ostringstream msg;
        msg << "non-finite collective rate at r = " << r;
        throw SolverError(msg.str());
    }
    return out;
}

struct PointFailure {
    double r = 0.0;
    std::string message;
};

/// Sampled Gamma_c(r) and gamma N(r).
struct RateCurve {
    std::vector<double> r;
    std::vector<double> cooling;
    std::vector<double> heating;
    std::vector<PointFailure> failures;
    std::map<std::string, std::string> provenance;
    int max_span = 0;

    std::size_t size() const { return r.size(); }

    /// Same curve with the thermal heating gamma*N_th replaced; the qudit
    /// contribution does not depend on N_th.
    RateCurve with_thermal_heating(double old_heating, double new_heating) const
    {
        RateCurve out = *this;
        for (auto& h : out.heating) {
            h += new_heating - old_heating;
        }
        return out;
    }
};

inline void check_grid(const std::vector<double>& grid)
{
    if (grid.empty()) {
        throw InvalidInput("rate grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw InvalidInput("rate grid values must be finite and non-negative");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InvalidInput("rate grid must be strictly increasing");
        }
    }
}

/// r = 0 followed by `points` log-spaced amplitudes over [r_min, r_max].
inline std::vector<double> log_grid(double r_min, double r_max, int points, bool include_zero = true)
{
    if (!(r_min > 0.0) || !(r_max > r_min) || points < 2) {
        throw InvalidInput("log grid needs 0 < r_min < r_max and at least two points");
    }
    std::vector<double> grid;
    if (include_zero) {
        grid.push_back(0.0);
    }
    const double ratio = std::log(r_max / r_min) / (points - 1);
    for (int i = 0; i < points; ++i) {
        grid.push_back(i == points - 1 ? r_max : r_min * std::exp(ratio * i));
    }
    return grid;
}

inline std::vector<double> default_rate_grid(double eta)
{
    return log_grid(1e-2, 6.0 / eta, 60);
}

/// Evaluates collective_rates on every grid point using up to `threads`
/// workers. Failed points are dropped and recorded; more than 1 % failures
/// rejects the curve.
inline RateCurve rate_curve(const ReducedBloch& red, const OscillatorSpec& osc, const std::vector<double>& grid,
                            const RateOptions& opts = {}, unsigned threads = 0)
{
    check_grid(grid);
    const std::size_t n = grid.size();
    std::vector<std::optional<CollectiveRates>> results(n);
    std::vector<std::string> errors(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = collective_rates(red, osc, grid[i], opts);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        }
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    RateCurve curve;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i]) {
            curve.r.push_back(grid[i]);
            curve.cooling.push_back(results[i]->cooling);
            curve.heating.push_back(results[i]->heating);
            curve.max_span = std::max(curve.max_span, results[i]->span);
        } else {
            curve.failures.push_back({grid[i], errors[i]});
        }
    }
    if (curve.failures.size() * 100 > n) {
        std::ostringstream msg;
        msg << "rate curve rejected: " << curve.failures.size() << " of " << n
            << " points failed; first at r = " << curve.failures.front().r << ": "
            << curve.failures.front().message;
        throw SolverError(msg.str());
    }
    curve.provenance["gamma"] = std::to_string(osc.gamma);
    curve.provenance["n_th"] = std::to_string(osc.n_th);
    curve.provenance["lambda"] = std::to_string(osc.lambda);
    curve.provenance["tol"] = std::to_string(opts.floquet.tol);
    curve.provenance["max_span"] = std::to_string(opts.floquet.max_span);
    return curve;
}

/// Amplitude at which the carrier drives are Bessel-suppressed: 1 / (2 eta).
inline double jump_radius(double eta)
{
    if (!(eta > 0.0)) {
        throw InvalidInput("jump radius needs eta > 0");
    }
    return 1.0 / (2.0 * eta);
}

/// J_n(2 eta r) for n = 0..n_max.
inline std::vector<double> sideband_amplitudes(double eta, double r, int n_max)
{
    if (!(eta > 0.0) || !(r >= 0.0) || n_max < 0) {
        throw InvalidInput("sideband amplitudes need eta > 0, r >= 0, n_max >= 0");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        out.push_back(std::cyl_bessel_j(static_cast<double>(n), 2.0 * eta * r));
    }
    return out;
}

struct MldCriterion {
    double value = 0.0;
    bool satisfied = false;
};

/// eta * sqrt(n_LD) compared against a configurable threshold (strict <).
inline MldCriterion mld_criterion(double eta, double n_ld, double threshold = 0.3)
{
    if (!(eta >= 0.0) || !(n_ld >= 0.0)) {
        throw InvalidInput("mld criterion needs non-negative inputs");
    }
    const double value = eta * std::sqrt(n_ld);
    return {value, value < threshold};
}

} // namespace phonon_chill
