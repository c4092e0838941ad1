#pragma once

// Time-domain reference solutions: integrate the driven reduced Bloch
// equations (and optionally the spectral-vector equation) to the limit cycle
// and Fourier-project onto exp(i n nu t). Independent of the continued
// fraction path; used by tests and the `validate` command.
//
// Both equations are affine in their own state over one drive period, so the
// periodic orbit can be located by shooting: integrate the monodromy matrix
// Phi and a particular solution p over one period and solve (1 - Phi) x0 = p.
// With `shoot` set the integration starts there and only a short settle is
// needed; otherwise it relaxes from the static steady state.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "error.hpp"
#include "floquet.hpp"
#include "harmonics.hpp"
#include "linalg.hpp"
#include "qudit.hpp"

namespace phonon_chill {

struct OracleOptions {
    /// Start from the shooting solution instead of the static steady state.
    bool shoot = true;
    /// Settling time in drive periods; 0 selects 4 when shooting, else
    /// max(500, 50 / (slowest rate) / period).
    int settle_periods = 0;
    int sample_periods = 64;
    int points_per_period = 64;
    int max_harmonic = 8;
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
};

/// Slowest relaxation rate of the static reduced Liouvillian.
inline double slowest_rate(const ReducedBloch& red)
{
    Eigen::ComplexEigenSolver<CMatrix> es(red.m_tilde);
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        slowest = std::min(slowest, std::abs(es.eigenvalues()(i).real()));
    }
    return slowest;
}

inline int default_settle_periods(const ReducedBloch& red, double nu)
{
    const double rate = slowest_rate(red);
    if (!(rate > 0.0)) {
        throw InvalidInput("oracle requires dissipation: the reduced Liouvillian has a non-decaying mode");
    }
    const double period = 2.0 * std::numbers::pi / nu;
    return std::max(500, static_cast<int>(std::ceil(50.0 / rate / period)));
}

namespace detail {

using OdeState = std::vector<cplx>;

inline int settle_for(const ReducedBloch& red, double nu, const OracleOptions& opts)
{
    if (opts.settle_periods > 0) {
        return opts.settle_periods;
    }
    return opts.shoot ? 4 : default_settle_periods(red, nu);
}

/// Periodic initial condition of x' = A(t) x + b(t) with period 2 pi / nu.
/// `apply(t, x)` returns A(t) x and `source(t)` returns b(t).
template <typename Apply, typename Source>
CVector periodic_start(Apply&& apply, Source&& source, Eigen::Index dim, double nu, const OracleOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    using Stepper = odeint::runge_kutta_dopri5<OdeState, double, OdeState, double>;
    const double period = 2.0 * std::numbers::pi / nu;
    // columns 0..dim-1: monodromy; column dim: particular solution
    const Eigen::Index cols = dim + 1;
    OdeState state(static_cast<std::size_t>(dim * cols), cplx{0.0});
    for (Eigen::Index k = 0; k < dim; ++k) {
        state[static_cast<std::size_t>(k * dim + k)] = 1.0;
    }
    auto system = [&](const OdeState& x, OdeState& dx, double t) {
        const Eigen::Map<const CMatrix> xm(x.data(), dim, cols);
        Eigen::Map<CMatrix> dm(dx.data(), dim, cols);
        for (Eigen::Index k = 0; k < cols; ++k) {
            dm.col(k) = apply(t, CVector(xm.col(k)));
        }
        dm.col(dim) += source(t);
    };
    try {
        odeint::integrate_adaptive(odeint::make_controlled(opts.abs_tol, opts.rel_tol, Stepper()), system, state,
                                   0.0, period, period / 256.0);
    } catch (const std::exception& e) {
        throw SolverError(std::string("oracle shooting failed: ") + e.what());
    }
    const Eigen::Map<const CMatrix> xm(state.data(), dim, cols);
    const CMatrix lhs = CMatrix::Identity(dim, dim) - xm.leftCols(dim);
    Eigen::FullPivLU<CMatrix> lu(lhs);
    if (!lu.isInvertible()) {
        throw SolverError("oracle shooting: monodromy has a unit eigenvalue");
    }
    return lu.solve(CVector(xm.col(dim)));
}

/// Running average of x(t) exp(-i n nu t) over equally spaced samples that
/// cover whole periods; coefficients() returns c_n for n = -h..h.
class FourierProjector {
public:
    FourierProjector(int max_harmonic, double nu, Eigen::Index dim)
        : h_(max_harmonic), nu_(nu), sums_(static_cast<std::size_t>(2 * max_harmonic + 1), CVector::Zero(dim))
    {
    }

    void add(const CVector& x, double t)
    {
        for (int n = -h_; n <= h_; ++n) {
            sums_[static_cast<std::size_t>(n + h_)] += x * std::exp(-I * (n * nu_ * t));
        }
        ++count_;
    }

    std::vector<CVector> coefficients() const
    {
        std::vector<CVector> out = sums_;
        for (auto& c : out) {
            c /= static_cast<double>(count_);
        }
        return out;
    }

private:
    int h_;
    double nu_;
    std::vector<CVector> sums_;
    std::size_t count_ = 0;
};

/// Integrate `system` from t = 0, settle, then project the samples.
template <typename System>
std::vector<CVector> integrate_and_project(System&& system, OdeState state, double nu, int settle,
                                           const OracleOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    using Stepper = odeint::runge_kutta_dopri5<OdeState, double, OdeState, double>;

    const double period = 2.0 * std::numbers::pi / nu;
    const int samples = opts.sample_periods * opts.points_per_period;
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(samples) + 1);
    times.push_back(0.0);
    const double t0 = settle * period;
    for (int k = 0; k < samples; ++k) {
        times.push_back(t0 + period * k / opts.points_per_period);
    }

    FourierProjector projector(opts.max_harmonic, nu, static_cast<Eigen::Index>(state.size()));
    std::size_t seen = 0;
    auto observer = [&](const OdeState& x, double t) {
        if (seen++ == 0) {
            return;
        }
        projector.add(Eigen::Map<const CVector>(x.data(), static_cast<Eigen::Index>(x.size())), t);
    };

    try {
        auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, Stepper());
        odeint::integrate_times(stepper, system, state, times.begin(), times.end(), period / 256.0, observer);
    } catch (const std::exception& e) {
        throw SolverError(std::string("oracle integration failed: ") + e.what());
    }
    return projector.coefficients();
}

} // namespace detail

/// Reduced Bloch harmonics s~^(n), |n| <= max_harmonic, by direct
/// integration starting from the static steady state.
inline BlochHarmonics oracle_harmonics(const DriveContext& ctx, const OracleOptions& opts = {})
{
    const ReducedBloch& red = ctx.red();
    const auto dim = static_cast<Eigen::Index>(red.size());
    const int settle = detail::settle_for(red, ctx.nu, opts);
    const double drive = red.lambda * ctx.r;
    const double nu = ctx.nu;

    auto apply = [&](double t, const CVector& x) -> CVector {
        return red.m_tilde * x - I * (2.0 * drive * std::cos(nu * t)) * (red.v_tilde * x);
    };
    auto system = [&](const detail::OdeState& x, detail::OdeState& dx, double t) {
        const Eigen::Map<const CVector> xv(x.data(), dim);
        Eigen::Map<CVector> dv(dx.data(), dim);
        dv = red.m_tilde * xv - I * (2.0 * drive * std::cos(nu * t)) * (red.v_tilde * xv) + red.u;
    };

    const CVector start = opts.shoot
        ? detail::periodic_start(apply, [&](double) { return CVector(red.u); }, dim, nu, opts)
        : solve_static_steady(red).reduced;
    detail::OdeState state(start.data(), start.data() + dim);
    const auto coeffs = detail::integrate_and_project(system, state, nu, settle, opts);

    BlochHarmonics out(opts.max_harmonic, nu, CVector::Zero(dim));
    for (int n = -opts.max_harmonic; n <= opts.max_harmonic; ++n) {
        out[n] = coeffs[static_cast<std::size_t>(n + opts.max_harmonic)];
    }
    return out;
}

/// Periodic initial spectral vector given the periodic Bloch start `x0`:
/// the Bloch state rides along while the monodromy columns and the
/// particular solution of the spectral equation are integrated.
inline CVector spectral_periodic_start(const ReducedBloch& red, const CVector& x0, double drive, double nu,
                                       cplx rotation, const OracleOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    using Stepper = odeint::runge_kutta_dopri5<detail::OdeState, double, detail::OdeState, double>;
    const auto dim = static_cast<Eigen::Index>(red.size());
    const double period = 2.0 * std::numbers::pi / nu;
    // column 0: Bloch state; 1..dim: monodromy; dim+1: particular solution
    const Eigen::Index cols = dim + 2;
    detail::OdeState state(static_cast<std::size_t>(dim * cols), cplx{0.0});
    std::copy(x0.data(), x0.data() + dim, state.begin());
    for (Eigen::Index k = 0; k < dim; ++k) {
        state[static_cast<std::size_t>((k + 1) * dim + k)] = 1.0;
    }
    auto system = [&](const detail::OdeState& x, detail::OdeState& dx, double t) {
        const Eigen::Map<const CMatrix> xm(x.data(), dim, cols);
        Eigen::Map<CMatrix> dm(dx.data(), dim, cols);
        const cplx coupling = -I * (2.0 * drive * std::cos(nu * t));
        const CVector sv = xm.col(0);
        dm.col(0) = red.m_tilde * sv + coupling * (red.v_tilde * sv) + red.u;
        for (Eigen::Index k = 1; k < cols; ++k) {
            const CVector y = xm.col(k);
            dm.col(k) = red.m_tilde * y + rotation * y + coupling * (red.v_tilde * y);
        }
        const CVector full = red.expand(sv);
        const cplx v_mean = red.bloch.v_row * full;
        dm.col(cols - 1) += red.fluctuation_source(full, v_mean);
    };
    try {
        odeint::integrate_adaptive(odeint::make_controlled(opts.abs_tol, opts.rel_tol, Stepper()), system, state,
                                   0.0, period, period / 256.0);
    } catch (const std::exception& e) {
        throw SolverError(std::string("oracle shooting failed: ") + e.what());
    }
    const Eigen::Map<const CMatrix> xm(state.data(), dim, cols);
    const CMatrix lhs = CMatrix::Identity(dim, dim) - xm.middleCols(1, dim);
    Eigen::FullPivLU<CMatrix> lu(lhs);
    if (!lu.isInvertible()) {
        throw SolverError("oracle shooting: spectral monodromy has a unit eigenvalue");
    }
    return lu.solve(CVector(xm.col(cols - 1)));
}

struct OracleSpectral {
    BlochHarmonics bloch;   ///< reduced Bloch harmonics
    ScalarHarmonics s;      ///< S_n(sign nu)
};

/// Integrates the Bloch equations jointly with the spectral-vector equation,
/// whose source Tr{s~ (V - <V(t)>) rho(t)} is evaluated pointwise in time
/// from the instantaneous state.
inline OracleSpectral oracle_spectral(const DriveContext& ctx, int sign, const OracleOptions& opts = {})
{
    const ReducedBloch& red = ctx.red();
    const auto dim = static_cast<Eigen::Index>(red.size());
    const int settle = detail::settle_for(red, ctx.nu, opts);
    const double drive = red.lambda * ctx.r;
    const double nu = ctx.nu;
    const cplx rotation = I * (sign * nu);

    auto system = [&](const detail::OdeState& x, detail::OdeState& dx, double t) {
        const Eigen::Map<const CVector> sv(x.data(), dim);
        const Eigen::Map<const CVector> spec(x.data() + dim, dim);
        Eigen::Map<CVector> dsv(dx.data(), dim);
        Eigen::Map<CVector> dspec(dx.data() + dim, dim);
        const cplx coupling = -I * (2.0 * drive * std::cos(nu * t));
        dsv = red.m_tilde * sv + coupling * (red.v_tilde * sv) + red.u;
        const CVector full = red.expand(sv);
        const cplx v_mean = red.bloch.v_row * full;
        dspec = red.m_tilde * spec + rotation * spec + coupling * (red.v_tilde * spec)
            + red.fluctuation_source(full, v_mean);
    };

    detail::OdeState state(static_cast<std::size_t>(2 * dim), cplx{0.0});
    if (opts.shoot) {
        // Bloch orbit first; the spectral equation is then affine in its own
        // state with a source fixed by that orbit
        auto bloch_apply = [&](double t, const CVector& x) -> CVector {
            return red.m_tilde * x - I * (2.0 * drive * std::cos(nu * t)) * (red.v_tilde * x);
        };
        const CVector x0 = detail::periodic_start(bloch_apply, [&](double) { return CVector(red.u); }, dim, nu, opts);
        const CVector y0 = spectral_periodic_start(red, x0, drive, nu, rotation, opts);
        std::copy(x0.data(), x0.data() + dim, state.begin());
        std::copy(y0.data(), y0.data() + dim, state.begin() + dim);
    } else {
        const CVector start = solve_static_steady(red).reduced;
        std::copy(start.data(), start.data() + dim, state.begin());
    }
    const auto coeffs = detail::integrate_and_project(system, state, nu, settle, opts);

    OracleSpectral out;
    out.bloch = BlochHarmonics(opts.max_harmonic, nu, CVector::Zero(dim));
    out.s = ScalarHarmonics(opts.max_harmonic, nu, cplx{0.0});
    const Eigen::RowVectorXcd pick = red.v_row_reduced();
    for (int n = -opts.max_harmonic; n <= opts.max_harmonic; ++n) {
        const CVector& c = coeffs[static_cast<std::size_t>(n + opts.max_harmonic)];
        out.bloch[n] = c.head(dim);
        out.s[n] = pick * c.tail(dim);
    }
    return out;
}

/// LD spectral function by integrating the quantum-regression correlation
/// Tr{dV U(t) dV rho_ss} exp(sign i nu t) up to `horizon` (in 1/nu).
inline cplx oracle_ld_spectral(const ReducedBloch& red, int sign, double nu, double horizon,
                               double tol = 1e-12)
{
    namespace odeint = boost::numeric::odeint;
    const auto dim = static_cast<Eigen::Index>(red.size());
    const CVector rho = solve_static_steady(red).bloch;
    const cplx v_mean = red.bloch.v_row * rho;
    const CVector start = red.fluctuation_source(rho, v_mean);
    const Eigen::RowVectorXcd pick = red.v_row_reduced();

    // state: correlation vector followed by the accumulated integral
    detail::OdeState state(static_cast<std::size_t>(dim + 1), cplx{0.0});
    std::copy(start.data(), start.data() + dim, state.begin());
    auto system = [&](const detail::OdeState& x, detail::OdeState& dx, double t) {
        const Eigen::Map<const CVector> cv(x.data(), dim);
        Eigen::Map<CVector> dcv(dx.data(), dim);
        dcv = red.m_tilde * cv;
        dx[static_cast<std::size_t>(dim)] = (pick * cv)(0) * std::exp(I * (sign * nu * t));
    };
    using Stepper = odeint::runge_kutta_dopri5<detail::OdeState, double, detail::OdeState, double>;
    try {
        odeint::integrate_adaptive(odeint::make_controlled(tol, tol, Stepper()), system, state, 0.0,
                                   horizon, 1e-3);
    } catch (const std::exception& e) {
        throw SolverError(std::string("correlation integration failed: ") + e.what());
    }
    return state.back();
}

} // namespace phonon_chill
