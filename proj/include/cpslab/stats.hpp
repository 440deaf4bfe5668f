#pragma once

#include <cstddef>

namespace cpslab {

// Regularized lower incomplete gamma P(a, x) via series / continued fraction.
double gamma_p(double a, double x);

// Central chi-squared distribution with k degrees of freedom.
double chi2_cdf(double x, double k);
double chi2_quantile(double prob, double k);

// Non-central chi-squared with k dof and non-centrality lambda, evaluated as
// a Poisson-weighted series of central terms (tail truncated below 1e-12 rel.).
double noncentral_chi2_cdf(double x, double k, double lambda);
double noncentral_chi2_quantile(double prob, double k, double lambda);

}  // namespace cpslab
