#pragma once

#include "rct/measure.hpp"
#include "rct/system.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace rct {

/// Pushforward of a finitely supported measure through a point map;
/// exactly coinciding images are merged and the output is in canonical
/// (lexicographic) atom order.
EmpiricalMeasure frobenius_perron(const std::function<Vec(const Vec&)>& f,
                                  const EmpiricalMeasure& mu);

/// Transfer operator of the driven system for a finite input distribution:
/// atoms g(u_i, x_j) with weights theta_i * mu_j, coinciding images merged.
/// On finite supports this equals the pushforward of the product measure
/// theta (x) mu under (u, x) -> g(u, x).
EmpiricalMeasure foias_exact(const DrivenSystem& g, const EmpiricalMeasure& theta,
                             const EmpiricalMeasure& mu, Index product_cap = 1000000);

/// Monte Carlo image: n_particles pairs (u_k, x_k) drawn independently from
/// theta and mu, pushed through g, kept as equal-weight atoms (no merging).
EmpiricalMeasure foias_mc(const DrivenSystem& g, const DistributionSpec& theta,
                          const EmpiricalMeasure& mu, Index n_particles, std::uint64_t seed);

/// Support reduction to at most n atoms; see systematic_resample for the
/// no-op rule and determinism guarantees.
EmpiricalMeasure compress(const EmpiricalMeasure& mu, Index n, std::uint64_t seed);

/// The transfer operator is well defined when expectations of distances
/// cannot diverge: a capped working metric, a bounded state space, or a
/// caller-asserted Lipschitz bound each suffice. Returns a warning string
/// when none of the three holds.
std::optional<std::string> foias_wellposedness_warning(const DrivenSystem& g,
                                                       std::optional<double> metric_cap,
                                                       std::optional<double> asserted_lipschitz);

} // namespace rct
