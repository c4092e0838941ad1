// Acceptance runner: one PASS/FAIL line per criterion, then a summary.
// Exits 0 once every criterion has been evaluated, whatever the verdicts;
// a crash or unexpected exception exits 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "phonon_chill/fokker_planck.hpp"
#include "phonon_chill/scenarios.hpp"

using namespace phonon_chill;

namespace {

struct Verdict {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        passed = passed && ok;
        append((ok ? "" : "[miss] ") + what);
    }
    void info(const std::string& what) { append("(" + what + ")"); }

private:
    void append(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RateOptions wide_options()
{
    RateOptions opts;
    opts.floquet.max_span = 1024;
    return opts;
}

/// Grid sizing as the steady command does it: default r_max clipped to the curve, default dr.
RadialDistribution equilibrium(const RateCurve& curve, double n_th, double eta)
{
    const double r_max = std::min(default_r_max(n_th, eta, &curve), curve.r.back());
    return steady_p(curve, RadialGrid(r_max, default_dr(curve, r_max)));
}

/// N_th where n_f / N_th first crosses 1/2, interpolated in log N_th.
double transition(const std::vector<double>& n_th, const std::vector<double>& n_f)
{
    for (std::size_t i = 0; i + 1 < n_th.size(); ++i) {
        const double a = n_f[i] / n_th[i] - 0.5;
        const double b = n_f[i + 1] / n_th[i + 1] - 0.5;
        if (a < 0.0 && b >= 0.0) {
            const double w = a / (a - b);
            return std::exp(std::log(n_th[i]) + w * (std::log(n_th[i + 1]) - std::log(n_th[i])));
        }
    }
    return std::nan("");
}

std::vector<double> stationarity;   // relative one-step change for every steady_p output checked
double worst_norm_drift = 0.0;      // over every evolve_p run

void check_stationary(const RateCurve& curve, const RadialDistribution& p, double dt)
{
    RadialDistribution q = p;
    RadialPropagator(curve, p.grid, dt).step(q.p);
    stationarity.push_back(std::abs(moment(q, 3) / moment(p, 3) - 1.0));
}

Verdict thermal_control()
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    for (double n : {4.0, 50.0, 300.0}) {
        const OscillatorSpec osc = fixtures::oscillator(0.0, 1e-3, n);
        const ReducedBloch red = prepare_reduced(fixtures::lambda_eit(), osc);
        const double r_max = 6.0 * std::sqrt(n);
        const RateCurve curve = rate_curve(red, osc, log_grid(1e-2, r_max, 20));
        const RadialDistribution p = steady_p(curve, RadialGrid(r_max, default_dr(curve, r_max)));
        const double n_f = moment(p, 3);
        v.require(std::abs(n_f / n - 1.0) < 5e-3, fmt("N_th = %g: n_f = %.6g", n, n_f));
        check_stationary(curve, p, 1.0);
    }
    const double t = seconds_since(t0);
    v.require(t < 1.0, fmt("%.3f s", t));
    return v;
}

Verdict oracle_equivalence()
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::pair<std::string, ReducedBloch>> sets{
        {"ladder", prepare_reduced(fixtures::ladder_g2(), fixtures::ladder_osc())},
        {"lambda", prepare_reduced(fixtures::lambda_eit(), fixtures::oscillator(0.1, 4e-4, 300.0))},
    };
    for (const auto& [name, red] : sets) {
        for (double r : {1.0, 5.0, 20.0}) {
            const double d = cf_oracle_discrepancy(red, r, FloquetOptions{}, OracleOptions{});
            v.require(d < 1e-5, name + fmt(" r = %g: %.2e", r, d));
        }
    }
    const double t = seconds_since(t0);
    v.require(t < 60.0, fmt("%.1f s", t));
    return v;
}

Verdict ld_consistency()
{
    struct Set {
        std::string name;
        QuditSpec q;
        OscillatorSpec osc;
    };
    QuditSpec lambda_b = fixtures::lambda_eit();
    lambda_b.delta1 = lambda_b.delta2 = -20.0;
    lambda_b.omega1 = lambda_b.omega2 = 2.0;
    lambda_b.gamma1 = lambda_b.gamma2 = 5.0;
    const std::vector<Set> sets{
        {"ladder g2 eta 1e-2", fixtures::ladder_g2(), fixtures::oscillator(0.01, 5e-5, 100.0)},
        {"ladder g2 eta 1e-3", fixtures::ladder_g2(), fixtures::oscillator(0.001, 5e-5, 100.0)},
        {"ladder g20 eta 1e-2", fixtures::ladder_g20(), fixtures::oscillator(0.01, 5e-5, 100.0)},
        {"ladder g5 eta 1e-2", fixtures::ladder(5.0, 1.0), fixtures::oscillator(0.01, 1e-4, 50.0)},
        {"tls A eta 1e-2", fixtures::tls(0.8, 0.6, 0.2), fixtures::oscillator(0.01, 1e-4, 20.0)},
        {"tls B eta 5e-3", fixtures::tls(-1.0, 0.3, 0.5), fixtures::oscillator(0.005, 1e-4, 20.0)},
        {"tls C eta 1e-2", fixtures::tls(-0.5, 0.1, 1.0), fixtures::oscillator(0.01, 1e-5, 10.0)},
        {"lambda eta 1e-2", fixtures::lambda_eit(), fixtures::oscillator(0.01, 4e-4, 300.0)},
        {"lambda eta 2e-3", fixtures::lambda_eit(), fixtures::oscillator(0.002, 4e-4, 300.0)},
        {"lambda B eta 1e-2", lambda_b, fixtures::oscillator(0.01, 1e-4, 100.0)},
    };
    Verdict v;
    double worst = 0.0;
    std::string worst_name;
    for (const auto& s : sets) {
        const ReducedBloch red = prepare_reduced(s.q, s.osc);
        const LDRates ld = ld_rates(red, s.osc);
        const CollectiveRates cr = collective_rates(red, s.osc, 0.0);
        const double d = std::max(std::abs(cr.cooling / ld.cooling - 1.0), std::abs(cr.heating / ld.heating - 1.0));
        if (d > worst) {
            worst = d;
            worst_name = s.name;
        }
    }
    v.require(worst < 1e-3, fmt("10 sets, worst relative difference %.2e", worst) + " (" + worst_name + ")");

    const OscillatorSpec strong = fixtures::ladder_osc();
    const ReducedBloch red = prepare_reduced(fixtures::ladder_g2(), strong);
    const CollectiveRates cr = collective_rates(red, strong, 0.0);
    v.info(fmt("at eta = 0.1 the Ladder r -> 0 cooling differs from LD by %.2e, the O(eta^2) term",
               std::abs(cr.cooling / ld_rates(red, strong).cooling - 1.0)));
    return v;
}

Verdict ladder_suppression()
{
    Verdict v;
    const OscillatorSpec osc = fixtures::ladder_osc();
    const RateOptions opts = wide_options();
    const ReducedBloch g2 = prepare_reduced(fixtures::ladder_g2(), osc);
    const ReducedBloch g20 = prepare_reduced(fixtures::ladder_g20(), osc);
    const ReducedBloch tls = prepare_reduced(effective_tls(fixtures::ladder_g2()), osc);

    const double c0 = collective_rates(g2, osc, 0.01, opts).cooling;
    const double c30 = collective_rates(g2, osc, 30.0, opts).cooling;
    v.require(c30 / c0 < 1e-2, fmt("Gamma_c(30) / Gamma_c(0.01) = %.3e", c30 / c0));
    v.require(c30 > osc.gamma / 3.0 && c30 < 3.0 * osc.gamma, fmt("Gamma_c(30) / gamma = %.3f", c30 / osc.gamma));

    const double t10 = collective_rates(tls, osc, 10.0, opts).cooling;
    const double d2 = std::abs(collective_rates(g2, osc, 10.0, opts).cooling - t10);
    const double d20 = std::abs(collective_rates(g20, osc, 10.0, opts).cooling - t10);
    v.require(d20 < d2, fmt("|Gamma_c - TLS| at r = 10: g20 %.3e, g2 %.3e", d20, d2));

    const RateCurve curve = rate_curve(g20, osc, log_grid(1e-2, 50.0, 120), opts);
    double lo = curve.cooling[0], r_lo = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.cooling[i] < lo) {
            lo = curve.cooling[i];
            r_lo = curve.r[i];
        }
    }
    v.info(fmt("Gamma1 = 20 variant: min Gamma_c = %.3e at r = %.1f", lo, r_lo));
    return v;
}

RateCurve lambda_curve(double gamma, double n_th, double r_end, int points = 120)
{
    const OscillatorSpec osc = fixtures::oscillator(0.1, gamma, n_th);
    const ReducedBloch red = prepare_reduced(fixtures::lambda_eit(), osc);
    return rate_curve(red, osc, log_grid(1e-2, r_end, points), wide_options());
}

Verdict lasing_window()
{
    Verdict v;
    auto min_of = [](const RateCurve& c) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < c.size(); ++i) {
            if (c.cooling[i] < c.cooling[k]) {
                k = i;
            }
        }
        return std::make_pair(c.cooling[k], c.r[k]);
    };
    const auto [lo_low, r_low] = min_of(lambda_curve(2e-5, 300.0, 150.0));
    v.require(lo_low < 0.0, fmt("gamma = 2e-5: min Gamma_c = %.3e at r = %.1f", lo_low, r_low));
    const auto [lo_high, r_high] = min_of(lambda_curve(4e-4, 300.0, 150.0));
    v.require(lo_high > 0.0, fmt("gamma = 4e-4: min Gamma_c = %.3e at r = %.1f", lo_high, r_high));
    return v;
}

Verdict bistability()
{
    Verdict v;
    for (const auto& [gamma, want] : std::vector<std::pair<double, std::size_t>>{{2.55e-4, 2}, {4e-4, 1}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const RateCurve curve = lambda_curve(gamma, 300.0, 150.0);
        const RadialDistribution p = equilibrium(curve, 300.0, 0.1);
        const auto peaks = find_peaks(p, 3);
        const double t = seconds_since(t0);
        std::string radii;
        for (auto i : peaks) {
            radii += fmt(radii.empty() ? "%.1f" : ", %.1f", p.grid.center(i));
        }
        v.require(peaks.size() == want,
                  fmt("gamma = %g: %g peak(s) at r = ", gamma, static_cast<double>(peaks.size())) + radii +
                      fmt(", n_f = %.4g", moment(p, 3)));
        v.require(t < 300.0, fmt("%.1f s", t));
        check_stationary(curve, p, 2.0);
    }
    return v;
}

Verdict transients()
{
    Verdict v;
    const double heating = 2e-2;
    {
        const double gamma = 4e-4, n_th = heating / gamma;
        const RateCurve curve = lambda_curve(gamma, n_th, 200.0);
        const double r_max = std::max(default_r_max(n_th, 0.1, &curve), 6.0 * std::sqrt(50.0));
        const RadialGrid grid(r_max, default_dr(curve, r_max));
        for (double n0 : {50.0, 25.0}) {
            const TransientResult res = evolve_p(curve, thermal_dist(n0, grid), 2.0, 2e4);
            worst_norm_drift = std::max(worst_norm_drift, res.max_norm_drift);
            const double n_end = res.mean_n.back();
            v.require(std::abs(n_end / 2.2 - 1.0) < 0.15, fmt("gamma = 4e-4, n0 = %g: <n>(2e4) = %.4g", n0, n_end));
        }
    }
    {
        const double gamma = 1e-4, n_th = heating / gamma;
        const RateCurve curve = lambda_curve(gamma, n_th, 200.0);
        const double r_max = std::max(default_r_max(n_th, 0.1, &curve), 6.0 * std::sqrt(50.0));
        const RadialGrid grid(r_max, default_dr(curve, r_max));
        for (const auto& [n0, target] : std::vector<std::pair<double, double>>{{50.0, 4.4}, {25.0, 3.6}}) {
            const TransientResult res = evolve_p(curve, thermal_dist(n0, grid), 2.0, 4e4);
            worst_norm_drift = std::max(worst_norm_drift, res.max_norm_drift);
            const bool interior = res.t_min > 0.0 && res.t_min < res.times.back();
            v.require(interior && std::abs(res.n_min / target - 1.0) < 0.2,
                      fmt("gamma = 1e-4, n0 = %g: min <n> = %.4g at t = %.0f, final %.4g", n0, res.n_min, res.t_min,
                          res.mean_n.back()));
        }
    }
    return v;
}

Verdict toy_model()
{
    Verdict v;
    double worst = 0.0;
    int points = 0;
    for (const auto& [n_plus, r_c] : std::vector<std::pair<double, double>>{{100, 3}, {500, 5}, {1000, 5}, {2000, 10}}) {
        for (double n_ld : {0.5, 2.0, 10.0, 40.0, 200.0}) {
            const double r_max = r_c + 6.0 * std::sqrt(std::max(n_plus, n_ld));
            const double dr = 1e-3 * std::min(std::sqrt(n_ld), r_c);
            const RadialDistribution p =
                steady_p(toy_step_curve(n_ld, n_plus, r_c, 1e-2, r_max), RadialGrid(r_max, dr));
            worst = std::max(worst, std::abs(moment(p, 3) / toy_nf(n_ld, n_plus, r_c) - 1.0));
            ++points;
        }
    }
    v.require(worst < 1e-6, fmt("%g lattice points, worst relative difference %.2e", points, worst));

    const double n_plus = 1000.0, r_c = 5.0;
    const auto deep = toy_transition_scan(n_plus, r_c, {r_c * r_c / 100.0});
    const auto hot = toy_transition_scan(n_plus, r_c, {10.0 * r_c * r_c});
    v.require(std::abs(deep[0].n_f / deep[0].n_ld - 1.0) < 1e-2,
              fmt("n_LD = r_c^2/100: n_f / n_LD = %.6f", deep[0].n_f / deep[0].n_ld));
    v.require(hot[0].n_f / n_plus > 0.9, fmt("n_LD = 10 r_c^2: n_f / n_plus = %.4f", hot[0].n_f / n_plus));
    return v;
}

Verdict conservation()
{
    Verdict v;
    v.require(worst_norm_drift < 1e-6, fmt("transient runs: max |sum r P dr - 1| = %.2e", worst_norm_drift));
    const double worst =
        stationarity.empty() ? std::nan("") : *std::max_element(stationarity.begin(), stationarity.end());
    v.require(worst < 1e-6,
              fmt("one step on %g steady states: max relative change of <n> = %.2e",
                  static_cast<double>(stationarity.size()), worst));
    return v;
}

Verdict ladder_transition()
{
    Verdict v;
    const std::vector<double> n_th{10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
    const OscillatorSpec base = fixtures::ladder_osc(100.0);
    const double eta = base.eta();
    const double r_end = default_r_max(n_th.back(), eta);
    const std::vector<std::pair<std::string, QuditSpec>> variants{
        {"g2", fixtures::ladder_g2()},
        {"g20", fixtures::ladder_g20()},
        {"tls", effective_tls(fixtures::ladder_g2())},
    };
    std::vector<double> where;
    for (const auto& [name, q] : variants) {
        const ReducedBloch red = prepare_reduced(q, base);
        const RateCurve curve = rate_curve(red, base, log_grid(1e-2, r_end, 120), wide_options());
        std::vector<double> n_f;
        double worst_ld = 0.0;
        for (double n : n_th) {
            OscillatorSpec osc = base;
            osc.n_th = n;
            const RateCurve c = curve.with_thermal_heating(base.thermal_heating(), osc.thermal_heating());
            n_f.push_back(moment(equilibrium(c, n, eta), 3));
            const LDRates ld = ld_rates(red, osc);
            if (ld.n_ld && eta * std::sqrt(*ld.n_ld) < 0.3) {
                worst_ld = std::max(worst_ld, n_f.back() / *ld.n_ld);
            }
        }
        if (name != "tls") {
            v.require(worst_ld < 1.1, name + fmt(": max n_f / n_LD in the LD regime = %.3f", worst_ld));
        }
        v.require(n_f.back() / n_th.back() > 0.5, name + fmt(": n_f / N_th at N_th = 1e4 is %.3f", n_f.back() / n_th.back()));
        where.push_back(transition(n_th, n_f));
        v.info(name + fmt(": n_f / N_th = 1/2 at N_th = %.0f", where.back()));
    }
    const auto [lo, hi] = std::minmax_element(where.begin(), where.end());
    const bool found = std::all_of(where.begin(), where.end(), [](double w) { return std::isfinite(w); });
    v.require(found && *hi / *lo < 2.0, fmt("transition spread factor %.3f", *hi / *lo));
    return v;
}

} // namespace

int main()
{
    const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
        {1, thermal_control},   {2, oracle_equivalence}, {3, ld_consistency}, {4, ladder_suppression},
        {5, lasing_window},     {6, bistability},        {7, transients},     {8, toy_model},
        {9, conservation},      {10, ladder_transition},
    };
    int passed = 0;
    for (const auto& [id, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        passed += v.passed ? 1 : 0;
        std::printf("criterion %d: %s  %s  [%.1f s]\n", id, v.passed ? "PASS" : "FAIL", v.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%zu criteria pass\n", passed, criteria.size());
    return 0;
}
