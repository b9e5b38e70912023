#pragma once

#include "rct/metric.hpp"
#include "rct/rng.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace rct {

/// Finitely supported probability measure: one support point per row,
/// strictly positive weights summing to one.
///
/// Construction validates shapes, rejects negative weights, drops weights
/// below the floor (1e-15) and requires the remaining sum to be within 1e-9
/// of one before renormalizing; stored weights then sum to one within 1e-12.
class EmpiricalMeasure {
public:
    static constexpr double kWeightFloor = 1e-15;
    static constexpr double kSumSlack = 1e-9;

    EmpiricalMeasure(Mat support, Vec weights);

    static EmpiricalMeasure dirac(const Vec& point);
    static EmpiricalMeasure equal_weights(Mat support);

    const Mat& support() const { return support_; }
    const Vec& weights() const { return weights_; }
    Index size() const { return support_.rows(); }
    Index dim() const { return support_.cols(); }

    Vec atom(Index i) const { return support_.row(i).transpose(); }

    /// Sums weights of exactly coinciding support points; output atoms are in
    /// lexicographic coordinate order, which is the canonical order used by
    /// every deterministic pipeline here.
    EmpiricalMeasure merged() const;

    /// Left-continuous generalized inverse CDF, 1-D measures only.
    double quantile(double p) const;

    bool operator==(const EmpiricalMeasure& other) const;

private:
    Mat support_;
    Vec weights_;
};

/// Resamples to exactly n equal-weight atoms with systematic (low-variance)
/// resampling. No-op when the measure already has at most n equally weighted
/// atoms. Deterministic in (mu, n, seed).
EmpiricalMeasure systematic_resample(const EmpiricalMeasure& mu, Index n, std::uint64_t seed);

/// Product measure on concatenated coordinates; |theta| * |mu| atoms.
EmpiricalMeasure product_measure(const EmpiricalMeasure& theta, const EmpiricalMeasure& mu,
                                 Index product_cap = 1000000);

// --- Distribution specifications ------------------------------------------

struct DiracSpec {
    Vec point;
};

struct FiniteAtomsSpec {
    Mat points;
    Vec weights;
};

/// Independent coordinates, each Uniform(lo, hi).
struct UniformSpec {
    double lo = 0.0;
    double hi = 1.0;
    Index dim = 1;
};

/// Independent coordinates, each Exponential(rate).
struct ExponentialSpec {
    double rate = 1.0;
    Index dim = 1;
};

/// Independent coordinates, each Normal(mean, stddev).
struct GaussianSpec {
    double mean = 0.0;
    double stddev = 1.0;
    Index dim = 1;
};

/// Mean zero, unit variance normal coordinates.
struct StandardizedGaussianSpec {
    Index dim = 1;
};

using DistributionSpec = std::variant<DiracSpec, FiniteAtomsSpec, UniformSpec, ExponentialSpec,
                                      GaussianSpec, StandardizedGaussianSpec>;

Index spec_dim(const DistributionSpec& spec);
void validate_spec(const DistributionSpec& spec);
bool spec_is_finite(const DistributionSpec& spec);

/// One draw from the specification.
Vec draw(const DistributionSpec& spec, Rng& rng);

/// Finite specs pass through exactly (atom count may differ from n);
/// continuous specs become n equal-weight iid draws. Uniform, exponential
/// and affine Gaussian families are sampled by inverse CDF / affine maps of
/// shared uniforms, so equal seeds couple nearby family members atom by atom.
EmpiricalMeasure discretize(const DistributionSpec& spec, Index n, std::uint64_t seed);

// --- Stationary input processes -------------------------------------------

struct IidDependence {};

/// Markov chain over the atoms of a FiniteAtomsSpec marginal whose weights
/// must be the stationary vector of `transition`.
struct FiniteMarkovDependence {
    Mat transition;
};

struct ProcessSpec {
    DistributionSpec marginal;
    std::variant<IidDependence, FiniteMarkovDependence> dependence = IidDependence{};
};

void validate_process(const ProcessSpec& process);

/// Path of `length` stationary draws, one row per step.
Mat sample_path(const ProcessSpec& process, Index length, std::uint64_t seed);

// --- Flat-table serialization ----------------------------------------------

/// Header "x0,...,x{d-1},weight", one CSV row per atom, 17 significant
/// digits (round-trip exact), '\n' line ends.
std::string to_table(const EmpiricalMeasure& mu);
EmpiricalMeasure measure_from_table(const std::string& text);

} // namespace rct
