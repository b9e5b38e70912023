#pragma once

#include "rct/metric.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace rct {

struct Box {
    Vec lo;
    Vec hi;
};

/// Driven dynamical system x' = g(u, x) with fixed input and state
/// dimensions; `apply` must be a pure function. `state_bounds` is set when
/// the state space is a known compact box.
class DrivenSystem {
public:
    using ApplyFn = std::function<Vec(const Vec&, const Vec&)>;

    DrivenSystem(std::string name, ApplyFn apply, Index input_dim, Index state_dim,
                 std::optional<Box> state_bounds = std::nullopt);

    Vec apply(const Vec& u, const Vec& x) const;

    const std::string& name() const { return name_; }
    Index input_dim() const { return input_dim_; }
    Index state_dim() const { return state_dim_; }
    const std::optional<Box>& state_bounds() const { return state_bounds_; }

private:
    std::string name_;
    ApplyFn apply_;
    Index input_dim_;
    Index state_dim_;
    std::optional<Box> state_bounds_;
};

/// Echo state network x' = tanh(C u + alpha A x). make_esn_params rescales
/// A so the spectral radius of alpha * A equals `spectral_radius` (power
/// iteration, relative tolerance 1e-10); alpha stays 1 with the radius
/// folded into A.
struct EsnParams {
    Mat reservoir;      // A, already rescaled
    Mat input_weights;  // C
    double leak_scale = 1.0;
};

EsnParams make_esn_params(Index n_neurons, Index input_dim, std::uint64_t seed,
                          double spectral_radius, double input_scale = 1.0);
DrivenSystem make_esn(const EsnParams& params);
DrivenSystem make_esn(Index n_neurons, Index input_dim, std::uint64_t seed,
                      double spectral_radius, double input_scale = 1.0);

/// Spectral radius by block power iteration (orthogonal iteration with a
/// small block, so complex dominant pairs converge too).
double spectral_radius_power(const Mat& a, double rel_tol = 1e-10, long max_iters = 10000);

/// g(u, x) = u * x on [0, 1] x [0, 1].
DrivenSystem make_product_system();

/// g(u, x) = a x + u on the real line, |a| < 1 not required here.
DrivenSystem make_linear_scalar(double a);

/// Linear state update with input-dependent coefficient matrix and offset:
/// x' = coeff(u) x + offset(u).
struct VarmaParams {
    std::function<Mat(const Vec&)> coeff;
    std::function<Vec(const Vec&)> offset;
    Index input_dim = 1;
    Index state_dim = 1;
};

DrivenSystem make_varma(const VarmaParams& params);

/// Scalar volatility recursion h' = omega + (alpha u^2 + beta) h obtained
/// from the usual return equation r = sqrt(h) u by substituting r^2 = h u^2
/// into the volatility update.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

DrivenSystem make_garch_vol(const GarchParams& params);

/// Two-parameter process: composes g along u_path rows m..n-1 starting
/// from x; returns x unchanged when n == m.
Vec semigroup_apply(const DrivenSystem& g, const Mat& u_path, const Vec& x, Index m, Index n);

struct ReachableCloud {
    Mat states;      // one row per initial condition
    double diameter; // max pairwise Euclidean distance
};

/// Images of an initial grid under the j-step transition ending at time n,
/// i.e. the time-n states reachable from the grid at time n - j.
ReachableCloud reachable_cloud(const DrivenSystem& g, const Mat& u_path, Index n, Index j,
                               const Mat& init_grid);

/// Same, with `n_init` initial states drawn uniformly from the state bounds.
ReachableCloud reachable_cloud(const DrivenSystem& g, const Mat& u_path, Index n, Index j,
                               Index n_init, std::uint64_t seed);

/// Rolls the system along the whole input path and drops the first
/// `washout` states; row k is the state after washout + k + 1 inputs.
Mat washout_trajectory(const DrivenSystem& g, const Mat& u_path, const Vec& x0, Index washout);

} // namespace rct
