#include "cpslab/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cpslab {

namespace {

// Lower series representation, valid/fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 10000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("gamma_p: series did not converge");
}

// Continued fraction for the upper function Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw std::runtime_error("gamma_p: continued fraction did not converge");
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("gamma_p: a must be positive");
    if (x < 0.0) throw std::invalid_argument("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, double k) {
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * k, 0.5 * x);
}

namespace {

double quantile_by_bisection(double prob, double k, double lambda, bool noncentral) {
    if (prob <= 0.0 || prob >= 1.0)
        throw std::invalid_argument("quantile: prob must be in (0,1)");
    auto cdf = [&](double x) {
        return noncentral ? noncentral_chi2_cdf(x, k, lambda) : chi2_cdf(x, k);
    };
    double lo = 0.0, hi = k + lambda + 10.0;
    while (cdf(hi) < prob) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("quantile: bracket search failed");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double chi2_quantile(double prob, double k) {
    return quantile_by_bisection(prob, k, 0.0, false);
}

double noncentral_chi2_cdf(double x, double k, double lambda) {
    if (x <= 0.0) return 0.0;
    if (lambda <= 0.0) return chi2_cdf(x, k);
    // Poisson(lambda/2)-weighted mixture of central chi-squared CDFs; start at
    // the modal Poisson index and expand both ways until the weight tail is
    // negligible.
    const double half = 0.5 * lambda;
    const long j0 = std::max(0L, static_cast<long>(half));
    auto logw = [&](long j) { return -half + j * std::log(half) - std::lgamma(j + 1.0); };
    double sum = 0.0, wsum = 0.0;
    for (long j = j0; j >= 0; --j) {
        const double w = std::exp(logw(j));
        sum += w * chi2_cdf(x, k + 2.0 * j);
        wsum += w;
        if (w < 1e-14 * std::max(wsum, 1e-300)) break;
    }
    for (long j = j0 + 1; j < j0 + 100000; ++j) {
        const double w = std::exp(logw(j));
        sum += w * chi2_cdf(x, k + 2.0 * j);
        wsum += w;
        if (w < 1e-14 * wsum && j > static_cast<long>(half)) break;
    }
    return std::min(1.0, sum);
}

double noncentral_chi2_quantile(double prob, double k, double lambda) {
    return quantile_by_bisection(prob, k, lambda, true);
}

}  // namespace cpslab
