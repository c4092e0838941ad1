#pragma once

// Dynamic (nu-periodic) steady state of the qudit under the harmonic
// displacement drive, and the harmonics of the dynamic spectral vector.
// Both reduce to block-tridiagonal systems in the harmonic index
//
//     A_n x_n + B (x_{n+1} + x_{n-1}) = f_n,   B = -i lambda r V~,
//
// solved by matrix continued fractions: x_n = K_n x_{n-1} + g_n for n > 0,
// x_n = K_n x_{n+1} + g_n for n < 0, built from |n| = span inward.

#include <algorithm>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "harmonics.hpp"
#include "linalg.hpp"
#include "qudit.hpp"

namespace phonon_chill {

/// Harmonic displacement alpha(t) - alpha_ss = r exp(-i nu t) acting on a
/// reduced qudit.
struct DriveContext {
    const ReducedBloch* reduced = nullptr;
    double r = 0.0;
    double nu = 1.0;

    DriveContext(const ReducedBloch& red, double amplitude, double frequency = 1.0)
        : reduced(&red), r(amplitude), nu(frequency)
    {
        if (!(amplitude >= 0.0)) {
            throw InvalidInput("motional amplitude r must be non-negative");
        }
    }

    const ReducedBloch& red() const { return *reduced; }
    CMatrix drive_matrix() const { return -I * (reduced->lambda * r) * reduced->v_tilde; }
};

struct FloquetOptions {
    int initial_span = 8;
    int max_span = 256;
    double tol = 1e-10;
    /// When false, a run that hits max_span returns the truncated result with
    /// converged = false instead of throwing.
    bool throw_on_failure = true;
};

namespace detail {

/// Solve the block-tridiagonal harmonic system on n in [-span, span] with
/// x_n = 0 beyond. `diag(n)` returns A_n, `rhs(n)` returns f_n.
inline BlochHarmonics solve_mcf(int span, const CMatrix& b,
                                const std::function<CMatrix(int)>& diag,
                                const std::function<CVector(int)>& rhs)
{
    const auto dim = b.rows();
    const auto count = static_cast<std::size_t>(span + 1);
    std::vector<CMatrix> k_up(count + 1, CMatrix::Zero(dim, dim));
    std::vector<CVector> g_up(count + 1, CVector::Zero(dim));
    std::vector<CMatrix> k_dn(count + 1, CMatrix::Zero(dim, dim));
    std::vector<CVector> g_dn(count + 1, CVector::Zero(dim));

    auto factor = [&](int n, const CMatrix& d) {
        Eigen::PartialPivLU<CMatrix> lu(d);
        if (!(lu.rcond() > 1e-14)) {
            std::ostringstream msg;
            msg << "harmonic system is resonant at harmonic n = " << n
                << " (inverse condition " << lu.rcond() << ")";
            throw SolverError(msg.str());
        }
        return lu;
    };

    // index j stores harmonic +j (up) or -j (down); j = span + 1 is the zero boundary
    for (int j = span; j >= 1; --j) {
        const auto ju = static_cast<std::size_t>(j);
        {
            const CMatrix d = diag(j) + b * k_up[ju + 1];
            auto lu = factor(j, d);
            k_up[ju] = -lu.solve(b);
            g_up[ju] = lu.solve(rhs(j) - b * g_up[ju + 1]);
        }
        {
            const CMatrix d = diag(-j) + b * k_dn[ju + 1];
            auto lu = factor(-j, d);
            k_dn[ju] = -lu.solve(b);
            g_dn[ju] = lu.solve(rhs(-j) - b * g_dn[ju + 1]);
        }
    }

    BlochHarmonics x(span, 1.0, CVector::Zero(dim));
    {
        const CMatrix d = diag(0) + (span >= 1 ? CMatrix(b * (k_up[1] + k_dn[1])) : CMatrix::Zero(dim, dim));
        const CVector f = rhs(0) - (span >= 1 ? CVector(b * (g_up[1] + g_dn[1])) : CVector::Zero(dim));
        auto lu = factor(0, d);
        x[0] = lu.solve(f);
    }
    for (int j = 1; j <= span; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        x[j] = k_up[ju] * x[j - 1] + g_up[ju];
        x[-j] = k_dn[ju] * x[-(j - 1)] + g_dn[ju];
    }
    return x;
}

inline double change(const CVector& a, const CVector& b)
{
    return relative_difference(a, b);
}

inline BlochHarmonics with_nu(BlochHarmonics s, double nu)
{
    BlochHarmonics out(s.span(), nu, s[0]);
    for (int n = -s.span(); n <= s.span(); ++n) {
        out[n] = s[n];
    }
    return out;
}

/// Run `solve(span)` with doubling spans until the monitored harmonics of the
/// physical solution change by less than tol.
template <typename Solve, typename Monitor>
auto adapt_span(const FloquetOptions& opts, Solve&& solve, Monitor&& monitor,
                std::vector<double>& trace, int& span_out, bool& converged)
{
    int span = std::max(1, std::min(opts.initial_span, opts.max_span));
    auto current = solve(span);
    trace.clear();
    converged = false;
    while (true) {
        if (span >= opts.max_span) {
            break;
        }
        const int next_span = std::min(2 * span, opts.max_span);
        auto next = solve(next_span);
        const double delta = monitor(current, next);
        trace.push_back(delta);
        current = std::move(next);
        span = next_span;
        if (delta < opts.tol) {
            converged = true;
            break;
        }
    }
    span_out = span;
    return current;
}

inline std::string format_trace(const std::vector<double>& trace)
{
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << (i ? ", " : "") << trace[i];
    }
    out << "]";
    return out.str();
}

} // namespace detail

struct BlochHarmonicsResult {
    BlochHarmonics reduced;   ///< s~^(n)
    BlochHarmonics physical;  ///< <sigma>^(n), trace 1 at n = 0
    int span = 0;
    bool converged = false;
    std::vector<double> convergence_trace;  ///< relative change per doubling
};

/// Bloch harmonics at a fixed truncation span (no adaptivity).
inline BlochHarmonicsResult solve_harmonics_fixed(const DriveContext& ctx, int span)
{
    const ReducedBloch& red = ctx.red();
    const int dim = red.size();
    const CMatrix b = ctx.drive_matrix();
    const CMatrix id = CMatrix::Identity(dim, dim);
    auto diag = [&](int n) -> CMatrix { return red.m_tilde - I * (n * ctx.nu) * id; };
    auto rhs = [&](int n) -> CVector { return n == 0 ? CVector(-red.u) : CVector(CVector::Zero(dim)); };

    BlochHarmonicsResult res;
    res.reduced = detail::with_nu(detail::solve_mcf(span, b, diag, rhs), ctx.nu);
    res.physical = BlochHarmonics(span, ctx.nu, CVector::Zero(red.bloch.size()));
    for (int n = -span; n <= span; ++n) {
        res.physical[n] = red.expand(res.reduced[n], n == 0 ? cplx{1.0} : cplx{0.0});
    }
    res.span = span;
    return res;
}

/// Dynamic steady Bloch harmonics with adaptive truncation.
inline BlochHarmonicsResult solve_harmonics(const DriveContext& ctx, const FloquetOptions& opts = {})
{
    std::vector<double> trace;
    int span = 0;
    bool converged = false;
    auto monitor = [](const BlochHarmonicsResult& a, const BlochHarmonicsResult& b) {
        return std::max({detail::change(a.physical[0], b.physical[0]),
                         detail::change(a.physical.at_or_zero(-1), b.physical.at_or_zero(-1)),
                         b.physical.span() > 0 ? edge_norm(b.physical) / std::max(1.0, b.physical[0].norm()) : 0.0});
    };
    auto res = detail::adapt_span(
        opts, [&](int s) { return solve_harmonics_fixed(ctx, s); }, monitor, trace, span, converged);
    // r = 0 needs no harmonics beyond n = 0
    if (ctx.r == 0.0) {
        converged = true;
    }
    res.converged = converged;
    res.convergence_trace = trace;
    if (!converged && opts.throw_on_failure) {
        throw SolverError("Bloch harmonics did not converge at span " + std::to_string(span)
                          + "; relative changes " + detail::format_trace(trace));
    }
    return res;
}

/// V_n = v_row . <sigma>^(n).
inline ScalarHarmonics v_harmonics(const BlochHarmonics& physical, const Eigen::RowVectorXcd& v_row)
{
    return physical.map([&](const CVector& s) -> cplx { return v_row * s; });
}

/// Harmonics of the reduced fluctuation source Tr{s~ (V - <V(t)>) rho(t)}.
inline BlochHarmonics fluctuation_source(const ReducedBloch& red, const BlochHarmonics& physical)
{
    const ScalarHarmonics v = v_harmonics(physical, red.bloch.v_row);
    const BlochHarmonics cross = series_product(physical, v);
    BlochHarmonics out(physical.span(), physical.nu(), CVector::Zero(red.size()));
    for (int n = -physical.span(); n <= physical.span(); ++n) {
        out[n] = red.reduce(red.bloch.product * physical[n] - cross[n]);
    }
    return out;
}

struct SpectralResult {
    ScalarHarmonics s;        ///< S_n(sign nu)
    BlochHarmonics reduced;   ///< reduced spectral vector harmonics
    int span = 0;
    bool converged = false;
    std::vector<double> convergence_trace;
};

inline SpectralResult solve_spectral_fixed(const DriveContext& ctx, const BlochHarmonics& source,
                                           int sign, int span)
{
    const ReducedBloch& red = ctx.red();
    const int dim = red.size();
    const CMatrix b = ctx.drive_matrix();
    const CMatrix id = CMatrix::Identity(dim, dim);
    const double shift = sign * ctx.nu;
    auto diag = [&](int n) -> CMatrix { return red.m_tilde + I * (shift - n * ctx.nu) * id; };
    auto rhs = [&](int n) -> CVector { return -source.at_or_zero(n); };

    SpectralResult res;
    res.reduced = detail::with_nu(detail::solve_mcf(span, b, diag, rhs), ctx.nu);
    res.s = v_harmonics(res.reduced, red.v_row_reduced());
    res.span = span;
    return res;
}

/// Dynamic steady spectral harmonics S_n(sign * nu) given converged Bloch
/// harmonics. The scalar is the V component of the spectral vector, i.e. the
/// same linear functional that gives <V>.
inline SpectralResult solve_spectral_harmonics(const DriveContext& ctx,
                                               const BlochHarmonicsResult& bloch, int sign,
                                               const FloquetOptions& opts = {})
{
    if (sign != 1 && sign != -1) {
        throw InvalidInput("spectral sign must be +1 or -1");
    }
    const BlochHarmonics source = fluctuation_source(ctx.red(), bloch.physical);

    std::vector<double> trace;
    int span = 0;
    bool converged = false;
    auto monitor = [](const SpectralResult& a, const SpectralResult& b) {
        double scale = 0.0;
        for (int n = -2; n <= 0; ++n) {
            scale = std::max(scale, std::abs(b.s.at_or_zero(n)));
        }
        if (scale == 0.0) {
            return 0.0;
        }
        double delta = 0.0;
        for (int n = -2; n <= 0; ++n) {
            delta = std::max(delta, std::abs(a.s.at_or_zero(n) - b.s.at_or_zero(n)) / scale);
        }
        return delta;
    };
    auto res = detail::adapt_span(
        opts, [&](int s) { return solve_spectral_fixed(ctx, source, sign, s); }, monitor, trace, span,
        converged);
    if (ctx.r == 0.0) {
        converged = true;
    }
    res.converged = converged;
    res.convergence_trace = trace;
    if (!converged && opts.throw_on_failure) {
        throw SolverError("spectral harmonics did not converge at span " + std::to_string(span)
                          + "; relative changes " + detail::format_trace(trace));
    }
    return res;
}

/// Everything the collective rates need at one amplitude.
struct DynamicSteadyState {
    BlochHarmonicsResult bloch;
    ScalarHarmonics v;
    SpectralResult spectral_minus;  ///< S_n(-nu)
};

inline DynamicSteadyState solve_dynamic_steady(const DriveContext& ctx, const FloquetOptions& opts = {})
{
    DynamicSteadyState out;
    out.bloch = solve_harmonics(ctx, opts);
    out.v = v_harmonics(out.bloch.physical, ctx.red().bloch.v_row);
    out.spectral_minus = solve_spectral_harmonics(ctx, out.bloch, -1, opts);
    return out;
}

} // namespace phonon_chill
