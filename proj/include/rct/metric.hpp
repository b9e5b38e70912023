#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace rct {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Weights w_1 = 1, w_i = ratio^(i-1) for a window of the given horizon,
/// newest coordinate first. Requires ratio in (0, 1) and horizon >= 1.
Vec geometric_weights(double ratio, Index horizon);

/// Distance on points represented as flat coordinate vectors.
///
/// Kinds:
///  - Euclidean: the usual norm, any dimension.
///  - CappedEuclidean: min(Euclidean, cap).
///  - ProductMax: max of component metrics over a concatenated vector.
///  - WeightedSupWindow: windows of `horizon` elements of dimension
///    `elem_dim`, flattened oldest-to-newest; distance is
///    max_i w_i * base(x_{-i}, y_{-i}) where -1 is the newest element and
///    the weights are strictly decreasing with w_1 = 1. tail_weight is the
///    (horizon+1)-th weight, kept so the truncation error of a cut-off
///    window can be bounded.
class Metric {
public:
    enum class Kind { Euclidean, CappedEuclidean, ProductMax, WeightedSupWindow };

    static Metric euclidean();
    static Metric capped_euclidean(double cap);
    static Metric product_max(std::vector<Metric> components, std::vector<Index> dims);
    static Metric weighted_sup_window(Metric base, Vec weights, Index elem_dim,
                                      double tail_weight);
    /// Window metric with geometric weights and tail_weight = ratio^horizon.
    static Metric geometric_window(Metric base, double ratio, Index horizon, Index elem_dim);

    double distance(const Vec& x, const Vec& y) const;
    double operator()(const Vec& x, const Vec& y) const { return distance(x, y); }

    Kind kind() const { return kind_; }

    /// Upper bound on any distance under this metric, when one exists.
    std::optional<double> diameter_bound() const;

    /// Dimension the metric expects, or nullopt when any dimension works.
    std::optional<Index> expected_dim() const;

    // WeightedSupWindow accessors.
    Index horizon() const;
    Index elem_dim() const;
    const Vec& window_weights() const;
    double tail_weight() const;
    const Metric& base() const;

    double cap() const; // CappedEuclidean only

private:
    Metric() = default;

    Kind kind_ = Kind::Euclidean;
    double cap_ = 0.0;
    std::vector<Metric> children_; // ProductMax components, or the window base
    std::vector<Index> dims_;      // ProductMax component dimensions
    Vec weights_;                  // window weights, newest first
    double tail_weight_ = 0.0;
    Index elem_dim_ = 0;
};

/// Worst-case distance contribution of everything older than the window
/// horizon: tail_weight * cap of the base metric. Requires a capped base.
double window_truncation_bound(const Metric& window_metric);

} // namespace rct
