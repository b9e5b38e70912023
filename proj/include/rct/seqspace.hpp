#pragma once

#include "rct/contraction.hpp"
#include "rct/foias.hpp"
#include "rct/measure.hpp"
#include "rct/system.hpp"

#include <cstdint>
#include <vector>

namespace rct {

/// Truncated left-infinite window of T elements; row t is the element at
/// time offset -(T - t), so the last row is the newest coordinate (-1).
struct WindowSeq {
    Mat values;

    Index horizon() const { return values.rows(); }
    Index elem_dim() const { return values.cols(); }
};

/// Flattened layout used for measures over windows: rows concatenated
/// oldest to newest.
Vec flatten_window(const WindowSeq& w);
WindowSeq unflatten_window(const Vec& flat, Index horizon, Index elem_dim);

/// Measure over flattened windows plus the shape needed to read them back.
struct WindowMeasure {
    EmpiricalMeasure measure;
    Index horizon = 0;
    Index elem_dim = 0;
    Index stride = 0; // spacing of the source windows, 0 when not from a path
};

/// Module default metric on flattened windows: weighted sup of capped
/// Euclidean element distances, geometric weights with ratio 1/2.
Metric window_metric(Index horizon, Index elem_dim, double ratio = 0.5, double cap = 1.0);

/// Component-wise image: element -i of the result is g(u_{-i}, x_{-i}).
/// On solution paths this advances the window by one step.
WindowSeq extend_apply(const DrivenSystem& g, const WindowSeq& u_window,
                       const WindowSeq& x_window);

/// All length-T sliding windows of a path (one per end index).
std::vector<WindowSeq> time_fold(const Mat& path, Index horizon);

struct SolutionCheck {
    bool pointwise = false; // x_{k+1} = g(u_k, x_k) along the paths
    bool windowed = false;  // extend_apply maps each folded window to the next

    bool consistent() const { return pointwise == windowed; }
    explicit operator bool() const { return pointwise && windowed; }
};

/// Both characterizations of "x solves g on u", which must agree.
SolutionCheck solution_equivalence_check(const DrivenSystem& g, const Mat& u_path,
                                         const Mat& x_path, Index horizon, double tol = 1e-12);

/// Equal-weight measure over windows of a washed-out trajectory driven by
/// the stationary process; windows start every `stride` steps (default 1:
/// sliding windows, so consecutive windows overlap in all but one element).
/// Requires a contraction certificate with c_hat < 1 (fixed-point premise);
/// washout 0 picks ceil(log(1e-6)/log(c_hat)) automatically.
WindowMeasure stationary_window_measure(const DrivenSystem& g, const ProcessSpec& process,
                                        Index horizon, Index n_windows,
                                        const ContractionReport& certificate,
                                        std::uint64_t seed, Index washout = 0,
                                        Index stride = 1);

/// Window transfer operator, Monte Carlo: each particle resamples a window
/// from M, draws one fresh input, drops the oldest element and appends
/// g(input, newest element). The law of solution windows is invariant under
/// this map. Independent input processes only; a Markov dependence would
/// need the conditional input law given a past the window does not carry,
/// so it raises ContractViolation.
WindowMeasure foias_seq_apply(const DrivenSystem& g, const ProcessSpec& process,
                              const WindowMeasure& m, Index n_particles, std::uint64_t seed);

/// Shift defect of a window measure: distance between the law of
/// coordinates (-T..-2) and the law of coordinates (-T+1..-1) under the
/// (T-1)-window metric. Mass on bitwise-equal atom pairs is cancelled first
/// (exact for a metric cost, since the value depends only on the signed
/// difference of the measures); only the residual is solved, compressed with
/// a shared seed when it exceeds max_support. For stride-1 window measures
/// the two slice laws overlap in all but one window each, so the result is
/// exact and O(cap / n_windows).
double stationarity_gap(const WindowMeasure& m, Index max_support = 1024,
                        std::uint64_t seed = 0);

/// Dual gap between two window laws: the largest mean difference over a
/// fixed family of 1-Lipschitz test functions for the window metric
/// (per-lag anchored distances w_{i-1} * b(x_{-i}, p) and normalized
/// lag-pair distances b(x_{-i}, x_{-j}) / (1/w_{i-1} + 1/w_{j-1})).
/// A lower bound on the window-metric Wasserstein distance with
/// O(1/sqrt(n)) sampling noise, so it stays informative where the primal
/// distance between two large empirical clouds is dominated by the
/// dimension-cursed n^(-1/d) term. Shapes and metric parameters must match.
double window_law_gap_dual(const WindowMeasure& a, const WindowMeasure& b,
                           double ratio = 0.5, double cap = 1.0);

} // namespace rct
