#ifndef PCS_CHISQ_HPP
#define PCS_CHISQ_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pcs {

namespace detail {

// regularized lower incomplete gamma P(a,x), series expansion (x < a+1)
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// regularized upper incomplete gamma Q(a,x), Lentz continued fraction (x >= a+1)
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double frac = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double mult = d * c;
        frac *= mult;
        if (std::fabs(mult - 1.0) < 1e-16) break;
    }
    return frac * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

}  // namespace detail

// chi-square CDF with `dof` degrees of freedom
inline double chisq_cdf(double x, std::size_t dof) {
    return detail::gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

// Quantile of the chi-square distribution. Wilson-Hilferty starting value,
// then Newton iterations on the CDF, bisection-safeguarded. Accurate to 1e-10.
inline double chisq_quantile(double prob, std::size_t dof) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw std::invalid_argument("chisq_quantile: prob must be in (0,1)");
    }
    if (dof < 1) {
        throw std::invalid_argument("chisq_quantile: dof must be >= 1");
    }
    const double k = static_cast<double>(dof);

    // Wilson-Hilferty: (X/k)^(1/3) approximately normal
    const double z = [prob] {
        // Acklam-style rational approximation of the normal quantile; only a
        // starting value, Newton does the accuracy work
        const double p = prob;
        if (p < 0.02425 || p > 1.0 - 0.02425) {
            const double q = std::sqrt(-2.0 * std::log(p < 0.5 ? p : 1.0 - p));
            const double v =
                (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q -
                    2.400758277161838e+00) * q - 2.549732539343734e+00) * q +
                  4.374664141464968e+00) * q + 2.938163982698783e+00) /
                ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q +
                   2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0);
            return p < 0.5 ? -v : v;
        }
        const double q = p - 0.5;
        const double r = q * q;
        return (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r -
                   2.759285104469687e+02) * r + 1.383577518672690e+02) * r -
                 3.066479806614716e+01) * r + 2.506628277459239e+00) * q /
               (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r -
                   1.556989798598866e+02) * r + 6.680131188771972e+01) * r -
                 1.328068155288572e+01) * r + 1.0);
    }();
    const double wh = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = k * wh * wh * wh;
    if (!(x > 0.0)) x = 0.5 * k;

    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = chisq_cdf(x, dof) - prob;
        if (f > 0.0) hi = x; else lo = x;
        if (std::fabs(f) < 1e-15) break;
        // chi-square density at x
        const double logpdf = (0.5 * k - 1.0) * std::log(x) - 0.5 * x -
                              std::lgamma(0.5 * k) - 0.5 * k * std::numbers::ln2;
        const double pdf = std::exp(logpdf);
        double next = x - f / pdf;
        if (!(next > lo && (next < hi))) {
            next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) < 1e-12 * (1.0 + x)) { x = next; break; }
        x = next;
    }
    return x;
}

}  // namespace pcs

#endif
