#pragma once

// Radial Fokker-Planck equation for the phase-symmetric P function:
// equilibrium by quadrature, moments, implicit finite-volume transients,
// thermal initial states and the two-rate toy model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

// pchip in Boost 1.74 calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "error.hpp"
#include "rates.hpp"

namespace phonon_chill {

/// Uniform cell-centred grid on [0, r_max].
struct RadialGrid {
    double dr = 0.0;
    std::size_t cells = 0;

    RadialGrid() = default;
    RadialGrid(double r_max, double step)
    {
        if (!(step > 0.0) || !(r_max > step) || !std::isfinite(r_max)) {
            throw InvalidInput("radial grid needs 0 < dr < r_max");
        }
        cells = static_cast<std::size_t>(std::ceil(r_max / step - 1e-9));
        dr = r_max / static_cast<double>(cells);
    }

    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dr; }
    double face(std::size_t i) const { return static_cast<double>(i) * dr; }  // left face of cell i
    double r_max() const { return static_cast<double>(cells) * dr; }

    std::vector<double> centers() const
    {
        std::vector<double> out(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            out[i] = center(i);
        }
        return out;
    }
};

struct RadialDistribution {
    RadialGrid grid;
    std::vector<double> p;

    double norm() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += grid.center(i) * p[i];
        }
        return s * grid.dr;
    }

    void normalize()
    {
        const double s = norm();
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw SolverError("distribution cannot be normalized (zero or non-finite weight)");
        }
        for (auto& v : p) {
            v /= s;
        }
    }
};

/// Sum r_i^k P_i dr.
inline double moment(const RadialDistribution& dist, int k)
{
    if (k < 0) {
        throw InvalidInput("moment order must be non-negative");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < dist.p.size(); ++i) {
        s += std::pow(dist.grid.center(i), k) * dist.p[i];
    }
    return s * dist.grid.dr;
}

/// Monotone cubic interpolation of sampled rates, with constant extension
/// below the first sample and no extrapolation past the last one.
class RateInterpolant {
public:
    explicit RateInterpolant(const RateCurve& curve) : r_(curve.r)
    {
        if (curve.size() < 2) {
            throw InvalidInput("rate curve needs at least two samples to interpolate");
        }
        for (std::size_t i = 0; i < curve.size(); ++i) {
            if (!(curve.heating[i] > 0.0)) {
                std::ostringstream msg;
                msg << "unphysical heating: gammaN = " << curve.heating[i] << " <= 0 at r = " << curve.r[i];
                throw InvalidInput(msg.str());
            }
            ratio_.push_back(curve.cooling[i] / curve.heating[i]);
        }
        cooling_ = make(curve.cooling);
        heating_ = make(curve.heating);
        g_ = make(ratio_);
    }

    double r_min() const { return r_.front(); }
    double r_max() const { return r_.back(); }
    const std::vector<double>& samples() const { return r_; }

    double cooling(double r) const { return eval(cooling_, r); }
    double heating(double r) const
    {
        const double h = eval(heating_, r);
        if (!(h > 0.0)) {
            std::ostringstream msg;
            msg << "unphysical heating: interpolated gammaN <= 0 at r = " << r;
            throw InvalidInput(msg.str());
        }
        return h;
    }
    /// Gamma_c / gammaN
    double ratio(double r) const { return eval(g_, r); }

    void require_coverage(double r_max) const
    {
        if (r_max > r_.back() * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "rate curve ends at r = " << r_.back() << " but the grid extends to r = " << r_max;
            throw InvalidInput(msg.str());
        }
    }

private:
    struct Piece {
        std::unique_ptr<boost::math::interpolators::pchip<std::vector<double>>> cubic;
        std::vector<double> y;  // used when there are too few samples for the cubic
    };

    Piece make(const std::vector<double>& y) const
    {
        Piece p;
        if (r_.size() >= 4) {
            std::vector<double> x = r_;
            std::vector<double> yy = y;
            p.cubic = std::make_unique<boost::math::interpolators::pchip<std::vector<double>>>(std::move(x),
                                                                                              std::move(yy));
        } else {
            p.y = y;
        }
        return p;
    }

    double eval(const Piece& p, double r) const
    {
        if (r <= r_.front()) {
            r = r_.front();
        }
        if (r > r_.back()) {
            if (r > r_.back() * (1.0 + 1e-12)) {
                std::ostringstream msg;
                msg << "r = " << r << " lies outside the rate curve (ends at " << r_.back() << ")";
                throw InvalidInput(msg.str());
            }
            r = r_.back();
        }
        if (p.cubic) {
            return (*p.cubic)(r);
        }
        const auto it = std::upper_bound(r_.begin(), r_.end(), r);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - r_.begin()), r_.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = (r - r_[lo]) / (r_[hi] - r_[lo]);
        return p.y[lo] + w * (p.y[hi] - p.y[lo]);
    }

    std::vector<double> r_;
    std::vector<double> ratio_;
    Piece cooling_, heating_, g_;
};

namespace detail {

/// phi(r_i) = int_0^{r_i} 2 r' Gamma_c / gammaN dr' at every cell centre, by
/// trapezoidal quadrature over the cell centres and the curve samples.
inline std::vector<double> equilibrium_exponent(const RateInterpolant& rates, const RateCurve& curve,
                                                const RadialGrid& grid)
{
    std::vector<double> nodes{0.0};
    for (double r : curve.r) {
        if (r > 0.0 && r < grid.r_max()) {
            nodes.push_back(r);
        }
    }
    const std::vector<double> centers = grid.centers();
    nodes.insert(nodes.end(), centers.begin(), centers.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<double> phi(grid.cells);
    double exponent = 0.0;
    double prev_r = 0.0;
    double prev_f = 0.0;
    std::size_t next = 0;
    for (double r : nodes) {
        const double f = 2.0 * r * rates.ratio(r);
        exponent += 0.5 * (f + prev_f) * (r - prev_r);
        prev_r = r;
        prev_f = f;
        if (next < grid.cells && r == centers[next]) {
            if (!std::isfinite(exponent)) {
                std::ostringstream msg;
                msg << "steady-state exponent left the representable range at r = " << r;
                throw SolverError(msg.str());
            }
            phi[next++] = exponent;
        }
    }
    return phi;
}

/// x / (e^x - 1)
inline double bernoulli(double x)
{
    if (std::abs(x) < 1e-10) {
        return 1.0 - 0.5 * x;
    }
    return x / std::expm1(x);
}

} // namespace detail

/// Equilibrium P(r) proportional to exp(-int_0^r 2 r' Gamma_c / gammaN dr') / gammaN(r).
inline RadialDistribution steady_p(const RateCurve& curve, const RadialGrid& grid)
{
    const RateInterpolant rates(curve);
    rates.require_coverage(grid.r_max());
    const std::vector<double> phi = detail::equilibrium_exponent(rates, curve, grid);

    std::vector<double> log_p(grid.cells);
    for (std::size_t i = 0; i < grid.cells; ++i) {
        log_p[i] = -phi[i] - std::log(rates.heating(grid.center(i)));
    }
    const double top = *std::max_element(log_p.begin(), log_p.end());
    RadialDistribution out{grid, std::vector<double>(grid.cells)};
    for (std::size_t i = 0; i < grid.cells; ++i) {
        out.p[i] = std::exp(log_p[i] - top);
    }
    out.normalize();
    return out;
}

/// P proportional to exp(-r^2 / N), the P function of a thermal state with mean occupation N.
inline RadialDistribution thermal_dist(double n, const RadialGrid& grid)
{
    if (!(n > 0.0)) {
        throw InvalidInput("thermal occupation must be positive");
    }
    if (grid.r_max() < 6.0 * std::sqrt(n) * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "grid too short for thermal N = " << n << ": r_max = " << grid.r_max() << " < 6 sqrt(N)";
        throw InvalidInput(msg.str());
    }
    RadialDistribution out{grid, std::vector<double>(grid.cells)};
    for (std::size_t i = 0; i < grid.cells; ++i) {
        const double r = grid.center(i);
        out.p[i] = std::exp(-r * r / n);
    }
    out.normalize();
    return out;
}

struct Snapshot {
    double t = 0.0;
    RadialDistribution dist;
};

struct TransientResult {
    std::vector<double> times;
    std::vector<double> mean_n;
    std::vector<Snapshot> snapshots;
    double t_min = 0.0;
    double n_min = 0.0;
    double max_norm_drift = 0.0;
};

/// Implicit-Euler finite-volume integrator for d(rP)/dt = dF/dr with
/// F = (r^2/2) Gamma_c P + (r/4) d(gammaN P)/dr and zero flux at both ends.
class RadialPropagator {
public:
    RadialPropagator(const RateCurve& curve, const RadialGrid& grid, double dt) : grid_(grid), dt_(dt)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InvalidInput("time step must be positive");
        }
        const RateInterpolant rates(curve);
        rates.require_coverage(grid.r_max());
        const std::size_t n = grid.cells;
        if (n < 3) {
            throw InvalidInput("radial grid needs at least three cells");
        }
        std::vector<double> heat(n);
        for (std::size_t i = 0; i < n; ++i) {
            heat[i] = rates.heating(grid.center(i));
        }
        // Exponentially fitted face flux in h = gammaN P:
        //   F_{i+1/2} = (r/4dr) [B(-dphi) h_{i+1} - B(dphi) h_i] = a_i P_i + b_i P_{i+1}
        // with B(x) = x / (e^x - 1). It reduces to the central drift-diffusion
        // flux for small dphi, has zero flux exactly on the quadrature
        // equilibrium of steady_p, and keeps the implicit matrix an M-matrix.
        const std::vector<double> phi = detail::equilibrium_exponent(rates, curve, grid);
        std::vector<double> a(n - 1), b(n - 1);
        const double dr = grid.dr;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double diff = 0.25 * grid.face(i + 1) / dr;
            const double dphi = phi[i + 1] - phi[i];
            a[i] = -diff * detail::bernoulli(dphi) * heat[i];
            b[i] = diff * detail::bernoulli(-dphi) * heat[i + 1];
        }
        lower_.assign(n, 0.0);
        diag_.assign(n, 0.0);
        upper_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            diag_[i] = grid.center(i) / dt;
            if (i + 1 < n) {
                diag_[i] -= a[i] / dr;
                upper_[i] = -b[i] / dr;
            }
            if (i > 0) {
                diag_[i] += b[i - 1] / dr;
                lower_[i] = a[i - 1] / dr;
            }
        }
        factorize();
    }

    double dt() const { return dt_; }
    const RadialGrid& grid() const { return grid_; }

    void step(std::vector<double>& p) const
    {
        const std::size_t n = grid_.cells;
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = grid_.center(i) * p[i] / dt_;
        }
        // Thomas algorithm with the stored forward sweep
        for (std::size_t i = 1; i < n; ++i) {
            y[i] -= factor_[i] * y[i - 1];
        }
        p[n - 1] = y[n - 1] / pivot_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            p[i] = (y[i] - upper_[i] * p[i + 1]) / pivot_[i];
        }
    }

private:
    void factorize()
    {
        const std::size_t n = grid_.cells;
        pivot_.assign(n, 0.0);
        factor_.assign(n, 0.0);
        pivot_[0] = diag_[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (!(std::abs(pivot_[i - 1]) > 0.0)) {
                throw SolverError("implicit step matrix is singular; reduce dt");
            }
            factor_[i] = lower_[i] / pivot_[i - 1];
            pivot_[i] = diag_[i] - factor_[i] * upper_[i - 1];
        }
        for (double v : pivot_) {
            if (!std::isfinite(v) || v == 0.0) {
                throw SolverError("implicit step matrix is singular; reduce dt");
            }
        }
    }

    RadialGrid grid_;
    double dt_;
    std::vector<double> lower_, diag_, upper_, pivot_, factor_;
};

/// `snapshot_every` is a time interval; 0 disables snapshots. Initial and
/// final states are always included when snapshots are on.
inline TransientResult evolve_p(const RateCurve& curve, const RadialDistribution& init, double dt, double t_end,
                                double snapshot_every = 0.0)
{
    if (!(t_end >= 0.0)) {
        throw InvalidInput("t_end must be non-negative");
    }
    const RadialPropagator prop(curve, init.grid, dt);
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const std::size_t every =
        snapshot_every > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(snapshot_every / dt))) : 0;

    RadialDistribution state = init;
    TransientResult out;
    out.times.reserve(steps + 1);
    out.mean_n.reserve(steps + 1);
    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * dt;
        const double n = moment(state, 3);
        if (!std::isfinite(n)) {
            std::ostringstream msg;
            msg << "mean excitation became non-finite at t = " << t;
            throw SolverError(msg.str());
        }
        out.times.push_back(t);
        out.mean_n.push_back(n);
        if (k == 0 || n < out.n_min) {
            out.n_min = n;
            out.t_min = t;
        }
        out.max_norm_drift = std::max(out.max_norm_drift, std::abs(state.norm() - 1.0));
        if (every > 0 && (k % every == 0 || k == steps)) {
            out.snapshots.push_back({t, state});
        }
    };

    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        prop.step(state.p);
        for (std::size_t i = 0; i < state.p.size(); ++i) {
            if (state.p[i] < -1e-9) {
                std::ostringstream msg;
                msg << "negative P = " << state.p[i] << " at r = " << state.grid.center(i) << ", t = "
                    << static_cast<double>(k) * dt << " (scheme unstable; refine dr or dt)";
                throw SolverError(msg.str());
            }
        }
        record(k);
    }
    return out;
}

/// Indices of cells strictly larger than every other cell within `window` cells.
inline std::vector<std::size_t> find_peaks(const RadialDistribution& dist, std::size_t window = 3)
{
    std::vector<std::size_t> peaks;
    const std::size_t n = dist.p.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(dist.p[i] > 0.0)) {
            continue;
        }
        const std::size_t lo = i >= window ? i - window : 0;
        const std::size_t hi = std::min(n - 1, i + window);
        bool is_peak = true;
        for (std::size_t j = lo; j <= hi && is_peak; ++j) {
            if (j != i && !(dist.p[i] > dist.p[j])) {
                is_peak = false;
            }
        }
        if (is_peak) {
            peaks.push_back(i);
        }
    }
    return peaks;
}

/// Outermost radius where Gamma_c changes sign from negative to positive
/// (the stable lasing amplitude), if any.
inline std::optional<double> lasing_radius(const RateCurve& curve)
{
    std::optional<double> out;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double c0 = curve.cooling[i];
        const double c1 = curve.cooling[i + 1];
        if (c0 < 0.0 && c1 >= 0.0) {
            const double w = c0 / (c0 - c1);
            out = curve.r[i] + w * (curve.r[i + 1] - curve.r[i]);
        }
    }
    return out;
}

/// max(6 sqrt(N_th), 1.5 * lasing radius, 8 / eta)
inline double default_r_max(double n_th, double eta, const RateCurve* curve = nullptr)
{
    double r_max = 6.0 * std::sqrt(std::max(n_th, 0.0));
    if (eta > 0.0) {
        r_max = std::max(r_max, 8.0 / eta);
    }
    if (curve != nullptr) {
        if (const auto rl = lasing_radius(*curve)) {
            r_max = std::max(r_max, 1.5 * *rl);
        }
    }
    if (!(r_max > 0.0)) {
        throw InvalidInput("cannot choose r_max: need N_th > 0 or eta > 0");
    }
    return r_max;
}

/// Cell size resolving the narrowest thermal width sqrt(gammaN / Gamma_c)
/// on the curve and keeping the cell Peclet number r |Gamma_c| dr / gammaN <= 1.
inline double default_dr(const RateCurve& curve, double r_max)
{
    double width = std::numeric_limits<double>::infinity();
    double peclet = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.r[i] > r_max) {
            break;
        }
        if (curve.cooling[i] > 0.0 && curve.heating[i] > 0.0) {
            width = std::min(width, std::sqrt(curve.heating[i] / curve.cooling[i]));
        }
        const double drift = curve.r[i] * std::abs(curve.cooling[i]);
        if (drift > 0.0 && curve.heating[i] > 0.0) {
            peclet = std::min(peclet, curve.heating[i] / drift);
        }
    }
    double dr = std::min({0.05, width / 20.0, peclet});
    dr = std::max(dr, r_max / 200000.0);
    return dr;
}

/// Mean excitation of the two-rate toy model with Gamma_c stepping from
/// gammaN / n_LD to gammaN / n_plus at r_c. This is the exact quadrature of
/// the equilibrium formula; see toy_nf_printed for the alternative form.
inline double toy_nf(double n_ld, double n_plus, double r_c)
{
    if (!(n_ld > 0.0) || !(n_plus > 0.0) || !(r_c > 0.0)) {
        throw InvalidInput("toy model needs n_LD, n_plus, r_c > 0");
    }
    const double x = r_c * r_c / n_ld;
    if (x > 700.0) {
        return n_ld;
    }
    const double e = std::exp(-x);
    const double rc2 = r_c * r_c;
    const double num = n_ld * n_ld + e * (n_plus * (n_plus + rc2) - n_ld * (n_ld + rc2));
    const double den = n_ld + e * (n_plus - n_ld);
    return num / den;
}

/// Same numerator over the denominator n_LD + exp(-r_c^2/n_LD) n_plus.
inline double toy_nf_printed(double n_ld, double n_plus, double r_c)
{
    if (!(n_ld > 0.0) || !(n_plus > 0.0) || !(r_c > 0.0)) {
        throw InvalidInput("toy model needs n_LD, n_plus, r_c > 0");
    }
    const double x = r_c * r_c / n_ld;
    if (x > 700.0) {
        return n_ld;
    }
    const double e = std::exp(-x);
    const double rc2 = r_c * r_c;
    return (n_ld * n_ld + e * (n_plus * (n_plus + rc2) - n_ld * (n_ld + rc2))) / (n_ld + e * n_plus);
}

/// Step-rate curve of the toy model with constant heating `heating`:
/// Gamma_c = heating / n_LD below r_c and heating / n_plus above.
inline RateCurve toy_step_curve(double n_ld, double n_plus, double r_c, double heating, double r_max)
{
    if (!(r_max > r_c) || !(heating > 0.0)) {
        throw InvalidInput("toy step curve needs r_max > r_c and positive heating");
    }
    const double eps = 1e-9 * r_c;
    RateCurve c;
    const double inner = heating / n_ld;
    const double outer = heating / n_plus;
    for (double r : {0.0, 0.5 * r_c, r_c - eps}) {
        c.r.push_back(r);
        c.cooling.push_back(inner);
    }
    for (double r : {r_c + eps, 0.5 * (r_c + r_max), r_max}) {
        c.r.push_back(r);
        c.cooling.push_back(outer);
    }
    c.heating.assign(c.r.size(), heating);
    c.provenance["model"] = "toy step";
    return c;
}

struct ToyPoint {
    double n_ld = 0.0;
    double n_f = 0.0;
};

inline std::vector<ToyPoint> toy_transition_scan(double n_plus, double r_c, const std::vector<double>& n_ld_grid)
{
    if (n_ld_grid.empty()) {
        throw InvalidInput("toy scan grid is empty");
    }
    std::vector<ToyPoint> out;
    out.reserve(n_ld_grid.size());
    for (double n : n_ld_grid) {
        out.push_back({n, toy_nf(n, n_plus, r_c)});
    }
    return out;
}

} // namespace phonon_chill
