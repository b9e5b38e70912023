#pragma once

// Slow reference implementations used only by the tests. Each one computes
// its quantity by a different route than the library so agreement is
// evidence, not tautology.

#include "rct/measure.hpp"
#include "rct/metric.hpp"

namespace rct::oracle {

/// 1-D Wasserstein-1 via the quantile-function integral: merge the
/// cumulative-probability breakpoints of both measures and sum
/// |q_mu - q_nu| * dp over the segments.
double w1_1d_quantile(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Exact Wasserstein-1 between a 1-D empirical measure and the continuous
/// Uniform[a, b]: integral of |F_emp - F_unif| with sign-crossing splits.
double w1_vs_uniform(const EmpiricalMeasure& mu, double a, double b);

/// Exact Wasserstein-1 by brute force over transport bases: enumerate every
/// (m + n - 1)-edge spanning tree of the bipartite support graph, solve the
/// flows by leaf peeling, and take the cheapest nonnegative solution.
/// Only sensible for tiny supports (m * n <= ~16).
double w1_bruteforce(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     const Metric& metric);

/// Spectral radius via the dense eigensolver.
double spectral_radius_dense(const Mat& a);

} // namespace rct::oracle
