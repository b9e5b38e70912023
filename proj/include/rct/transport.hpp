#pragma once

#include "rct/measure.hpp"
#include "rct/metric.hpp"

#include <cstdint>
#include <functional>

namespace rct {

/// Coupling between two finitely supported measures. `plan(i, j)` is the
/// mass moved from atom i of the first measure to atom j of the second;
/// row sums reproduce the first measure's weights and column sums the
/// second's (within 1e-9). `exact` marks optimal plans; entropic plans
/// carry an upper-bound cost and exact = false.
struct TransportPlan {
    Mat plan;
    double cost = 0.0;
    bool exact = true;
};

/// Sorted-support evaluation of the order-1 distance between 1-D measures
/// (area between the two CDFs). O(n log n), ties broken by stable order.
double w1_exact_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

inline constexpr Index kDefaultPairCap = 512 * 512;

/// Optimal coupling by a dense transportation network simplex.
/// Deterministic: identical inputs give an identical plan. The support-pair
/// product |mu| * |nu| must stay within pair_cap.
TransportPlan w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                       const Metric& metric = Metric::euclidean(),
                       Index pair_cap = kDefaultPairCap);

struct EntropicResult {
    TransportPlan plan; // exact = false
    int iterations = 0;
    bool converged = true;
};

/// Log-domain Sinkhorn with epsilon scaling; the returned plan is rounded
/// to the exact marginals, so its cost upper-bounds the true distance.
EntropicResult w1_entropic(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const Metric& metric, double epsilon, int max_iters = 20000);

/// Kantorovich dual objective of a caller-supplied test function, a lower
/// bound on the distance. The 1-Lipschitz property is checked on every
/// support-point pair (slack 1e-9) and violations name the offending pair.
double dual_lower_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                        const std::function<double(const Vec&)>& f,
                        const Metric& metric = Metric::euclidean());

/// Exact distance with a support budget: measures larger than max_support
/// atoms are first compressed by systematic resampling (both sides share
/// one derived seed, which couples the subsamples and suppresses resampling
/// noise in differences).
double w1_auto(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
               const Metric& metric = Metric::euclidean(), Index max_support = 512,
               std::uint64_t seed = 0);

} // namespace rct
