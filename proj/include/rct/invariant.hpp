#pragma once

#include "rct/contraction.hpp"
#include "rct/foias.hpp"
#include "rct/transport.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace rct {

struct SolveConfig {
    Index n_particles = 4096;
    double tol = 1e-6;
    int max_iter = 200;
    std::uint64_t seed = 0;
    enum class Mode { ExactProduct, MonteCarlo } mode = Mode::ExactProduct;
    /// Continuous input specs are discretized to this many atoms in
    /// ExactProduct mode.
    Index theta_atoms = 64;
    /// Start measure: uniform atoms in the state bounds, or a Dirac at
    /// init_point (origin when the state space is unbounded).
    Index init_atoms = 256;
    std::optional<Vec> init_point;
    /// Distances between iterates larger than this support are computed
    /// after coupled compression (see w1_auto).
    Index w1_max_support = 512;
    /// When false, a non-contractive estimate only flags the report instead
    /// of refusing; callers that rely on the fixed-point argument keep the
    /// default.
    bool refuse_non_contractive = true;
    Index product_cap = 1000000;
};

struct SolveReport {
    explicit SolveReport(EmpiricalMeasure fp) : fixed_point(std::move(fp)) {}

    EmpiricalMeasure fixed_point;
    int iterations = 0;
    std::vector<double> gaps; // consecutive-iterate distances
    double c_used = 0.0;
    double posterior_bound = 0.0; // gaps.back() / (1 - c_used)
    double noise_floor = 0.0;
    bool converged = false;
    std::string mode;
    std::optional<std::string> warning;
};

/// Iterates the transfer operator to its fixed point. The contraction
/// factor is taken from `certificate` or estimated when absent; c >= 1
/// refuses (the fixed-point argument needs a contraction). Stops when the
/// consecutive gap falls under max(tol * (1 - c), 3 * noise floor).
SolveReport solve_invariant(const DrivenSystem& g, const DistributionSpec& theta,
                            const SolveConfig& config,
                            std::optional<ContractionReport> certificate = std::nullopt);

struct SweepRow {
    double param = 0.0;
    double input_gap = 0.0;
    double state_gap = 0.0;
    double ratio = 0.0;
    bool converged = false;
};

struct SweepConfig {
    double eps = 0.01;
    Index n_atoms = 3500;
    std::uint64_t seed = 0;
    /// Scalar observable used for the state gap of multivariate systems
    /// (coordinate index); 1-D systems compare states directly.
    Index observable = 0;
    /// FixedPoint runs the certified solver; Trajectory estimates the
    /// stationary state law from a washed-out rollout of n_atoms observed
    /// states, which also covers systems without a contraction certificate.
    enum class Estimator { FixedPoint, Trajectory } estimator = Estimator::FixedPoint;
    Index washout = 200;
    /// Compare full state laws instead of the scalar observable.
    bool full_state_w1 = false;
    SolveConfig solver{};
};

/// For each grid parameter p: discretize theta_p and theta_{p+eps} with the
/// SAME derived seed (common random numbers), estimate both stationary
/// state measures with paired seeds, and record
///   input_gap  = exact 1-D distance between the input discretizations,
///   state_gap  = distance between the observable marginals,
///   ratio      = state_gap / input_gap.
std::vector<SweepRow> continuity_sweep(const DrivenSystem& g,
                                       const std::function<DistributionSpec(double)>& family,
                                       const std::vector<double>& grid,
                                       const SweepConfig& config);

/// Largest finite ratio of a sweep; requires at least one positive input gap.
double lipschitz_of_s_g(const std::vector<SweepRow>& rows);

/// CSV with header "param,input_gap,state_gap,ratio,converged".
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

} // namespace rct
