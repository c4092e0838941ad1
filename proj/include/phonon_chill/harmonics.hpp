#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace phonon_chill {

/// Fourier coefficients c_n of a nu-periodic quantity, n in [-span, span].
/// Coefficient type is either a scalar (cplx) or a vector (CVector).
template <typename T>
class HarmonicSeries {
public:
    HarmonicSeries() = default;

    HarmonicSeries(int span, double nu, const T& zero)
        : span_(span), nu_(nu), coeffs_(static_cast<std::size_t>(2 * span + 1), zero)
    {
        if (span < 0) {
            throw InvalidInput("harmonic span must be non-negative");
        }
    }

    int span() const { return span_; }
    double nu() const { return nu_; }

    T& operator[](int n) { return coeffs_.at(static_cast<std::size_t>(n + span_)); }
    const T& operator[](int n) const { return coeffs_.at(static_cast<std::size_t>(n + span_)); }

    bool contains(int n) const { return n >= -span_ && n <= span_; }

    /// c_n, or zero outside the stored span.
    T at_or_zero(int n) const
    {
        if (contains(n)) {
            return (*this)[n];
        }
        T zero = coeffs_.front();
        zero_out(zero);
        return zero;
    }

    /// Sum_n c_n exp(i n nu t).
    T evaluate(double t) const
    {
        T sum = coeffs_.front();
        zero_out(sum);
        for (int n = -span_; n <= span_; ++n) {
            sum += (*this)[n] * std::exp(I * (static_cast<double>(n) * nu_ * t));
        }
        return sum;
    }

    template <typename F>
    auto map(F&& f) const -> HarmonicSeries<decltype(f(std::declval<const T&>()))>
    {
        using U = decltype(f(std::declval<const T&>()));
        HarmonicSeries<U> out(span_, nu_, f(coeffs_.front()));
        for (int n = -span_; n <= span_; ++n) {
            out[n] = f((*this)[n]);
        }
        return out;
    }

private:
    static void zero_out(cplx& v) { v = 0.0; }
    static void zero_out(CVector& v) { v.setZero(); }

    int span_ = 0;
    double nu_ = 1.0;
    std::vector<T> coeffs_{T{}};
};

using BlochHarmonics = HarmonicSeries<CVector>;
using ScalarHarmonics = HarmonicSeries<cplx>;

namespace detail {

inline cplx scale(const cplx& a, const cplx& b) { return a * b; }
inline CVector scale(const CVector& a, const cplx& b) { return a * b; }

} // namespace detail

/// Discrete convolution: coefficients of the product of two periodic series,
/// truncated to the larger of the two spans.
template <typename T>
HarmonicSeries<T> series_product(const HarmonicSeries<T>& a, const ScalarHarmonics& b)
{
    if (std::abs(a.nu() - b.nu()) > 1e-14 * std::max(1.0, std::abs(a.nu()))) {
        throw InvalidInput("series_product: mismatched fundamental frequencies");
    }
    const int span = std::max(a.span(), b.span());
    T zero = a[0];
    zero *= 0.0;
    HarmonicSeries<T> out(span, a.nu(), zero);
    for (int n = -span; n <= span; ++n) {
        T acc = zero;
        for (int k = -b.span(); k <= b.span(); ++k) {
            const int m = n - k;
            if (a.contains(m)) {
                acc += detail::scale(a[m], b[k]);
            }
        }
        out[n] = acc;
    }
    return out;
}

/// Largest coefficient norm at |n| = span, used as a truncation diagnostic.
inline double edge_norm(const BlochHarmonics& s)
{
    return std::max(s[s.span()].norm(), s[-s.span()].norm());
}

inline double edge_norm(const ScalarHarmonics& s)
{
    return std::max(std::abs(s[s.span()]), std::abs(s[-s.span()]));
}

} // namespace phonon_chill
