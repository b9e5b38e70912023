#pragma once

#include "rct/measure.hpp"
#include "rct/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace rct {

enum class ContractionMethod { ExactFiniteTheta, MonteCarlo, AnalyticCertificate };

std::string to_string(ContractionMethod m);

/// Estimated or certified factor c with E_u[d(g(u,x), g(u,y))] <= c d(x,y).
/// Sampling methods give a one-sided LOWER estimate of the supremum over
/// state pairs; analytic certificates are upper bounds.
struct ContractionReport {
    double c_hat = 0.0;
    double ci_halfwidth = 0.0; // 3 standard errors of the worst pair's input mean; 0 when exact
    Index n_pairs = 0;
    Index n_inputs = 0;
    std::optional<std::pair<Vec, Vec>> worst_pair;
    ContractionMethod method = ContractionMethod::ExactFiniteTheta;

    /// Key-value text block, one "key: value" line each, fixed order.
    std::string to_text() const;
};

/// Supremum over sampled state pairs (the pair (lo, hi) of the box corners
/// is always included) of the theta-average contraction ratio, with the
/// average taken exactly over the finite input atoms. Pairs closer than
/// 1e-8 * box diameter are redrawn to keep ratios well conditioned.
ContractionReport estimate_contraction(const DrivenSystem& g, const EmpiricalMeasure& theta,
                                       const Box& pair_box, Index n_pairs, std::uint64_t seed,
                                       const Metric& state_metric = Metric::euclidean());

/// Same with the input average estimated from n_inputs Monte Carlo draws
/// (one common input set shared across pairs).
ContractionReport estimate_contraction(const DrivenSystem& g, const DistributionSpec& theta,
                                       const Box& pair_box, Index n_pairs, Index n_inputs,
                                       std::uint64_t seed,
                                       const Metric& state_metric = Metric::euclidean());

/// E_u[ sigma_max(coeff(u)) ], the linear-update contraction certificate.
ContractionReport varma_certificate(const VarmaParams& params, const DistributionSpec& theta,
                                    Index n_samples, std::uint64_t seed);

/// alpha + beta, exact, for the scalar volatility recursion driven by
/// standardized (unit second moment) innovations. Refuses when >= 1.
ContractionReport garch_certificate(const GarchParams& params);

} // namespace rct
