#pragma once

// Level systems, their Bloch-vector (Liouville) representation, removal of
// the conserved trace direction, and static steady states.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace phonon_chill {

enum class Layout { TwoLevel, Ladder, Lambda, Generic };

inline std::string to_string(Layout layout)
{
    switch (layout) {
    case Layout::TwoLevel: return "two_level";
    case Layout::Ladder: return "ladder";
    case Layout::Lambda: return "lambda";
    case Layout::Generic: return "generic";
    }
    return "unknown";
}

/// One dissipator term rate * D[op].
struct Jump {
    double rate = 0.0;
    CMatrix op;
};

/// Physical parameters of the dissipative multi-level system, in units of nu.
///
/// For TwoLevel, Ladder and Lambda the matrices are generated from the scalar
/// parameters (levels are ordered g, e, d). Generic uses `hamiltonian`,
/// `coupling` and `jumps` directly.
struct QuditSpec {
    Layout layout = Layout::Ladder;
    int levels = 3;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;

    CMatrix hamiltonian;
    CMatrix coupling;
    std::vector<Jump> jumps;
};

/// Oscillator mode. Frequencies are stored in units of nu, so nu is 1 after
/// configuration normalization, but the solvers keep it explicit.
struct OscillatorSpec {
    double nu = 1.0;
    double gamma = 0.0;
    double n_th = 0.0;
    double lambda = 0.0;

    double eta() const { return lambda / nu; }
    double thermal_heating() const { return gamma * n_th; }
};

inline void validate(const OscillatorSpec& osc)
{
    if (!(osc.nu > 0.0)) {
        throw InvalidInput("oscillator frequency must be positive");
    }
    if (!(osc.gamma >= 0.0) || !(osc.n_th >= 0.0) || !(osc.lambda >= 0.0)) {
        throw InvalidInput("oscillator gamma, n_th and lambda must be non-negative");
    }
}

struct LevelSystem {
    CMatrix hamiltonian;
    CMatrix coupling;
    std::vector<Jump> jumps;

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

/// |m><n| on a d-level space.
inline CMatrix sigma(int d, int m, int n)
{
    CMatrix s = CMatrix::Zero(d, d);
    s(m, n) = 1.0;
    return s;
}

namespace detail {

inline double hermiticity_defect(const CMatrix& a)
{
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline void check_hermitian(const CMatrix& a, const char* name)
{
    if (a.rows() != a.cols()) {
        throw InvalidInput(std::string(name) + " must be square");
    }
    const double defect = hermiticity_defect(a);
    if (defect > 1e-12) {
        std::ostringstream msg;
        msg << name << " is not Hermitian (max |A - A^dagger| = " << defect << ")";
        throw InvalidInput(msg.str());
    }
}

} // namespace detail

inline LevelSystem build_level_system(const QuditSpec& spec)
{
    for (double rate : {spec.gamma1, spec.gamma2}) {
        if (!(rate >= 0.0)) {
            throw InvalidInput("decay rates must be non-negative");
        }
    }

    LevelSystem sys;
    switch (spec.layout) {
    case Layout::TwoLevel: {
        constexpr int d = 2;
        sys.hamiltonian = spec.delta1 * sigma(d, 1, 1)
            + 0.5 * spec.omega1 * (sigma(d, 1, 0) + sigma(d, 0, 1));
        sys.coupling = sigma(d, 1, 1);
        sys.jumps = {{spec.gamma1, sigma(d, 0, 1)}};
        break;
    }
    case Layout::Ladder: {
        constexpr int d = 3;
        sys.hamiltonian = spec.delta1 * sigma(d, 1, 1) + (spec.delta1 + spec.delta2) * sigma(d, 2, 2)
            + 0.5 * spec.omega1 * (sigma(d, 1, 0) + sigma(d, 0, 1))
            + 0.5 * spec.omega2 * (sigma(d, 1, 2) + sigma(d, 2, 1));
        sys.coupling = sigma(d, 1, 1);
        sys.jumps = {{spec.gamma1, sigma(d, 0, 2)}, {spec.gamma2, sigma(d, 1, 2)}};
        break;
    }
    case Layout::Lambda: {
        constexpr int d = 3;
        sys.hamiltonian = -spec.delta1 * sigma(d, 0, 0) - spec.delta2 * sigma(d, 1, 1)
            + 0.5 * spec.omega1 * (sigma(d, 0, 2) + sigma(d, 2, 0))
            + 0.5 * spec.omega2 * (sigma(d, 1, 2) + sigma(d, 2, 1));
        sys.coupling = -sigma(d, 0, 0) + sigma(d, 1, 1);
        sys.jumps = {{spec.gamma1, sigma(d, 0, 2)}, {spec.gamma2, sigma(d, 1, 2)}};
        break;
    }
    case Layout::Generic: {
        const int d = static_cast<int>(spec.hamiltonian.rows());
        if (d < 2 || d > 8) {
            throw InvalidInput("generic level count must be in [2, 8]");
        }
        if (spec.levels != d) {
            throw InvalidInput("generic level count does not match Hamiltonian dimension");
        }
        detail::check_hermitian(spec.hamiltonian, "Hamiltonian");
        detail::check_hermitian(spec.coupling, "coupling operator V");
        if (spec.coupling.rows() != d) {
            throw InvalidInput("coupling operator V has wrong dimension");
        }
        for (const auto& jump : spec.jumps) {
            if (!(jump.rate >= 0.0)) {
                throw InvalidInput("jump rates must be non-negative");
            }
            if (jump.op.rows() != d || jump.op.cols() != d) {
                throw InvalidInput("jump operator has wrong dimension");
            }
        }
        sys.hamiltonian = spec.hamiltonian;
        sys.coupling = spec.coupling;
        sys.jumps = spec.jumps;
        break;
    }
    }
    return sys;
}

/// Lindblad generator -i[H, rho] + sum_k rate_k D[L_k] rho.
inline CMatrix apply_lindblad(const LevelSystem& sys, const CMatrix& rho)
{
    CMatrix out = -I * (sys.hamiltonian * rho - rho * sys.hamiltonian);
    for (const auto& jump : sys.jumps) {
        if (jump.rate == 0.0) {
            continue;
        }
        const CMatrix& l = jump.op;
        const CMatrix ldl = l.adjoint() * l;
        out += jump.rate * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    return out;
}

/// Ordered basis of elementary operators |m><n|. Adding level k appends
/// |k><k| followed by the pairs |j><k|, |k><j| for j < k; for d = 3 this is
/// (gg, ee, ge, eg, dd, gd, dg, ed, de).
class BlochBasis {
public:
    explicit BlochBasis(int d) : d_(d)
    {
        for (int k = 0; k < d; ++k) {
            ops_.emplace_back(k, k);
            for (int j = 0; j < k; ++j) {
                ops_.emplace_back(j, k);
                ops_.emplace_back(k, j);
            }
        }
    }

    int levels() const { return d_; }
    int size() const { return d_ * d_; }
    std::pair<int, int> op(int i) const { return ops_[static_cast<std::size_t>(i)]; }

    int index(int m, int n) const
    {
        if (m == n) {
            return m * m;
        }
        const int k = std::max(m, n);
        const int j = std::min(m, n);
        return k * k + 1 + 2 * j + (m < n ? 0 : 1);
    }

    CMatrix element(int i) const
    {
        const auto [m, n] = op(i);
        return sigma(d_, m, n);
    }

    /// Density matrix with <sigma_i> = Tr{sigma_i rho} = bloch(i).
    CMatrix density(const CVector& bloch) const
    {
        CMatrix rho = CMatrix::Zero(d_, d_);
        for (int i = 0; i < size(); ++i) {
            const auto [m, n] = op(i);
            rho(n, m) = bloch(i);
        }
        return rho;
    }

    CVector bloch(const CMatrix& rho) const
    {
        CVector v(size());
        for (int i = 0; i < size(); ++i) {
            const auto [m, n] = op(i);
            v(i) = rho(n, m);
        }
        return v;
    }

    /// Trace functional: coefficients of the diagonal elements.
    Eigen::RowVectorXcd trace_row() const
    {
        Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(size());
        for (int k = 0; k < d_; ++k) {
            t(index(k, k)) = 1.0;
        }
        return t;
    }

private:
    int d_;
    std::vector<std::pair<int, int>> ops_;
};

/// Liouvillian and coupling matrices acting on the Bloch vector.
struct BlochSystem {
    BlochBasis basis{2};
    LevelSystem system;
    CMatrix m;        ///< Tr{sigma_i L rho} = sum_j m(i,j) <sigma_j>
    CMatrix vmat;     ///< Tr{[sigma_i, V] rho} = sum_j vmat(i,j) <sigma_j>
    CMatrix product;  ///< Tr{sigma_i V rho} = sum_j product(i,j) <sigma_j>
    Eigen::RowVectorXcd v_row;  ///< <V> = v_row * <sigma>

    int size() const { return basis.size(); }
};

inline BlochSystem build_bloch_matrices(const LevelSystem& sys)
{
    const int d = sys.dim();
    BlochSystem bloch;
    bloch.basis = BlochBasis(d);
    bloch.system = sys;
    const int n = bloch.basis.size();
    bloch.m.resize(n, n);
    bloch.vmat.resize(n, n);
    bloch.product.resize(n, n);
    bloch.v_row.resize(n);

    const CMatrix& v = sys.coupling;
    // rho = sum_j <sigma_j> sigma_j^dagger, so column j is the action on sigma_j^dagger.
    for (int j = 0; j < n; ++j) {
        const CMatrix rho_j = bloch.basis.element(j).adjoint();
        const CMatrix l_rho = apply_lindblad(sys, rho_j);
        for (int i = 0; i < n; ++i) {
            const CMatrix s = bloch.basis.element(i);
            bloch.m(i, j) = (s * l_rho).trace();
            bloch.vmat(i, j) = ((s * v - v * s) * rho_j).trace();
            bloch.product(i, j) = (s * v * rho_j).trace();
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = bloch.basis.op(i);
        bloch.v_row(i) = v(a, b);
    }
    return bloch;
}

/// Trace-reduced Bloch equations d<s~>/dt = m_tilde <s~> + u (plus drive).
struct ReducedBloch {
    BlochSystem bloch;
    CMatrix transform;      ///< T: T <sigma> = (trace, <s~>)
    CMatrix transform_inv;
    CMatrix m_tilde;
    CMatrix v_tilde;
    CVector u;
    cplx alpha_ss{0.0, 0.0};
    double lambda = 0.0;

    int size() const { return static_cast<int>(m_tilde.rows()); }

    /// Physical Bloch vector from reduced coordinates with the given trace.
    CVector expand(const CVector& reduced, cplx trace = 1.0) const
    {
        CVector full(reduced.size() + 1);
        full(0) = trace;
        full.tail(reduced.size()) = reduced;
        return transform_inv * full;
    }

    CVector reduce(const CVector& full) const
    {
        const CVector t = transform * full;
        return t.tail(t.size() - 1);
    }

    /// <V> = v_constant() + v_row_reduced() * s~ for trace-one states.
    Eigen::RowVectorXcd v_row_reduced() const
    {
        const Eigen::RowVectorXcd r = bloch.v_row * transform_inv;
        return r.tail(r.size() - 1);
    }

    cplx v_constant() const { return (bloch.v_row * transform_inv)(0); }

    /// Reduced source Tr{s~ (V - <V>) rho} for a physical Bloch vector.
    CVector fluctuation_source(const CVector& full, cplx v_mean) const
    {
        return reduce(bloch.product * full - v_mean * full);
    }
};

/// Transform whose first row is the trace; row of |k><k| (k >= 1) is
/// sigma_kk - sigma_00 for k = 1 and sigma_{k-1,k-1} - sigma_kk otherwise.
inline CMatrix trace_transform(const BlochBasis& basis)
{
    const int n = basis.size();
    const int d = basis.levels();
    CMatrix t = CMatrix::Identity(n, n);
    t.row(0) = basis.trace_row();
    if (d >= 2) {
        const int i1 = basis.index(1, 1);
        t.row(i1).setZero();
        t(i1, basis.index(0, 0)) = -1.0;
        t(i1, i1) = 1.0;
    }
    for (int k = 2; k < d; ++k) {
        const int ik = basis.index(k, k);
        t.row(ik).setZero();
        t(ik, basis.index(k - 1, k - 1)) = 1.0;
        t(ik, ik) = -1.0;
    }
    return t;
}

inline ReducedBloch reduce_trace(const BlochSystem& bloch, cplx alpha_ss, double lambda)
{
    if (!std::isfinite(alpha_ss.real()) || !std::isfinite(alpha_ss.imag())) {
        throw InvalidInput("alpha_ss must be finite");
    }
    ReducedBloch red;
    red.bloch = bloch;
    red.alpha_ss = alpha_ss;
    red.lambda = lambda;
    red.transform = trace_transform(bloch.basis);
    Eigen::FullPivLU<CMatrix> lu(red.transform);
    if (!lu.isInvertible()) {
        throw SolverError("trace transform is singular");
    }
    red.transform_inv = lu.inverse();

    const int n = bloch.size();
    const CMatrix shifted = bloch.m - I * (2.0 * lambda * alpha_ss.real()) * bloch.vmat;
    const CMatrix m_full = red.transform * shifted * red.transform_inv;
    const CMatrix v_full = red.transform * bloch.vmat * red.transform_inv;
    red.m_tilde = m_full.bottomRightCorner(n - 1, n - 1);
    red.v_tilde = v_full.bottomRightCorner(n - 1, n - 1);
    red.u = (red.transform * bloch.m * red.transform_inv).col(0).tail(n - 1);
    return red;
}

struct StaticSteadyState {
    CVector bloch;          ///< physical Bloch vector (trace 1)
    CVector reduced;        ///< s~
    double inverse_condition = 0.0;
    double residual = 0.0;  ///< ||m_tilde s~ + u||
};

inline constexpr double kSingularThreshold = 1e-13;

inline StaticSteadyState solve_static_steady(const ReducedBloch& red)
{
    StaticSteadyState out;
    out.inverse_condition = inverse_condition(red.m_tilde);
    if (!(out.inverse_condition > kSingularThreshold)) {
        std::ostringstream msg;
        msg << "reduced Liouvillian is singular (inverse condition " << out.inverse_condition
            << "); the steady state is not unique (dark-state degeneracy or missing dissipation)";
        throw SolverError(msg.str());
    }
    Eigen::PartialPivLU<CMatrix> lu(red.m_tilde);
    out.reduced = lu.solve(-red.u);
    // one step of iterative refinement
    const CVector r = red.m_tilde * out.reduced + red.u;
    out.reduced -= lu.solve(r);
    out.residual = (red.m_tilde * out.reduced + red.u).norm();
    out.bloch = red.expand(out.reduced);
    return out;
}

inline cplx expectation_v(const ReducedBloch& red, const CVector& bloch)
{
    return red.bloch.v_row * bloch;
}

struct AlphaOptions {
    int max_iterations = 200;
    double tolerance = 1e-12;
};

struct AlphaResult {
    cplx alpha{0.0, 0.0};
    int iterations = 0;
    double residual = 0.0;  ///< |(i nu + gamma/2) alpha + i lambda <V>_ss(alpha)|
};

/// Self-consistent steady displacement by (damped) fixed-point iteration.
inline AlphaResult solve_alpha_ss(const BlochSystem& bloch, const OscillatorSpec& osc,
                                  const AlphaOptions& opts = {})
{
    validate(osc);
    const cplx denom = I * osc.nu + 0.5 * osc.gamma;
    auto v_of = [&](cplx alpha) {
        const ReducedBloch red = reduce_trace(bloch, alpha, osc.lambda);
        return expectation_v(red, solve_static_steady(red).bloch);
    };
    auto map = [&](cplx alpha) { return -I * osc.lambda * v_of(alpha) / denom; };

    AlphaResult res;
    if (osc.lambda == 0.0) {
        return res;
    }
    cplx alpha{0.0, 0.0};
    double damping = 1.0;
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const cplx next = map(alpha);
        const double step = std::abs(next - alpha);
        if (step > last_step && damping == 1.0) {
            damping = 0.5;
        }
        last_step = step;
        const cplx updated = alpha + damping * (next - alpha);
        res.iterations = it;
        if (step < opts.tolerance * std::max(1.0, std::abs(alpha))) {
            alpha = next;
            res.alpha = alpha;
            res.residual = std::abs(denom * alpha + I * osc.lambda * v_of(alpha));
            return res;
        }
        alpha = updated;
    }
    res.alpha = alpha;
    res.residual = std::abs(denom * alpha + I * osc.lambda * v_of(alpha));
    std::ostringstream msg;
    msg << "alpha_ss fixed point did not converge after " << opts.max_iterations
        << " iterations (last iterate " << alpha << ", residual " << res.residual << ")";
    throw SolverError(msg.str());
}

/// Bloch system plus self-consistent displacement, reduced and ready for the
/// harmonic solvers.
inline ReducedBloch prepare_reduced(const QuditSpec& spec, const OscillatorSpec& osc,
                                    const AlphaOptions& opts = {})
{
    const BlochSystem bloch = build_bloch_matrices(build_level_system(spec));
    const AlphaResult alpha = solve_alpha_ss(bloch, osc, opts);
    return reduce_trace(bloch, alpha.alpha, osc.lambda);
}

/// Effective two-level system obtained by eliminating the fast-decaying |d>
/// of a Ladder system. The decay rate defaults to omega2^2 / gamma1, an
/// inferred mapping; pass `gamma_eff` to override.
inline QuditSpec effective_tls(const QuditSpec& ladder, std::optional<double> gamma_eff = std::nullopt)
{
    QuditSpec tls;
    tls.layout = Layout::TwoLevel;
    tls.levels = 2;
    tls.delta1 = ladder.delta1;
    tls.omega1 = ladder.omega1;
    tls.gamma1 = gamma_eff ? *gamma_eff : ladder.omega2 * ladder.omega2 / ladder.gamma1;
    return tls;
}

} // namespace phonon_chill
