#pragma once

// Parameter sets shared by the unit tests and the acceptance runner.

#include <cmath>

#include "phonon_chill/qudit.hpp"

namespace fixtures {

using phonon_chill::Layout;
using phonon_chill::OscillatorSpec;
using phonon_chill::QuditSpec;

inline QuditSpec ladder(double gamma1, double omega2)
{
    QuditSpec q;
    q.layout = Layout::Ladder;
    q.delta1 = 0.8;
    q.delta2 = 0.0;
    q.omega1 = 0.6;
    q.omega2 = omega2;
    q.gamma1 = gamma1;
    q.gamma2 = 0.0;
    return q;
}

/// Gamma1 = 2, Omega2 = sqrt(0.4)
inline QuditSpec ladder_g2() { return ladder(2.0, std::sqrt(0.4)); }

/// Gamma1 = 20, Omega2 = 2
inline QuditSpec ladder_g20() { return ladder(20.0, 2.0); }

inline QuditSpec tls(double delta, double omega, double gamma)
{
    QuditSpec q;
    q.layout = Layout::TwoLevel;
    q.levels = 2;
    q.delta1 = delta;
    q.omega1 = omega;
    q.gamma1 = gamma;
    return q;
}

inline QuditSpec lambda_eit()
{
    QuditSpec q;
    q.layout = Layout::Lambda;
    q.delta1 = -50.0;
    q.delta2 = -50.0;
    q.omega1 = 1.0;
    q.omega2 = 1.0;
    q.gamma1 = 10.0;
    q.gamma2 = 10.0;
    return q;
}

inline OscillatorSpec oscillator(double lambda, double gamma, double n_th)
{
    OscillatorSpec o;
    o.lambda = lambda;
    o.gamma = gamma;
    o.n_th = n_th;
    return o;
}

/// Ladder oscillator: eta = 0.1, gamma = 5e-5
inline OscillatorSpec ladder_osc(double n_th = 100.0) { return oscillator(0.1, 5e-5, n_th); }

} // namespace fixtures
