#include "rct/metric.hpp"

#include "rct/errors.hpp"
#include "rct/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rct {

Vec geometric_weights(double ratio, Index horizon) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw DomainError("weight ratio must lie in (0, 1), got " + format_double(ratio));
    }
    if (horizon < 1) {
        throw DomainError("window horizon must be >= 1");
    }
    Vec w(horizon);
    double v = 1.0;
    for (Index i = 0; i < horizon; ++i) {
        w(i) = v;
        v *= ratio;
    }
    return w;
}

Metric Metric::euclidean() {
    Metric m;
    m.kind_ = Kind::Euclidean;
    return m;
}

Metric Metric::capped_euclidean(double cap) {
    if (!(cap > 0.0)) {
        throw DomainError("metric cap must be positive, got " + format_double(cap));
    }
    Metric m;
    m.kind_ = Kind::CappedEuclidean;
    m.cap_ = cap;
    return m;
}

Metric Metric::product_max(std::vector<Metric> components, std::vector<Index> dims) {
    if (components.empty() || components.size() != dims.size()) {
        throw ShapeError("product metric needs matching non-empty component and dim lists");
    }
    for (std::size_t k = 0; k < components.size(); ++k) {
        if (dims[k] < 1) {
            throw DomainError("product metric component dimension must be >= 1");
        }
        auto need = components[k].expected_dim();
        if (need.has_value() && *need != dims[k]) {
            throw ShapeError("product metric component expects dimension " +
                             std::to_string(*need) + ", slot has " + std::to_string(dims[k]));
        }
    }
    Metric m;
    m.kind_ = Kind::ProductMax;
    m.children_ = std::move(components);
    m.dims_ = std::move(dims);
    return m;
}

Metric Metric::weighted_sup_window(Metric base, Vec weights, Index elem_dim,
                                   double tail_weight) {
    if (weights.size() < 1) {
        throw DomainError("window metric needs at least one weight");
    }
    if (weights(0) != 1.0) {
        throw DomainError("window weights must start at 1");
    }
    for (Index i = 0; i + 1 < weights.size(); ++i) {
        if (!(weights(i + 1) > 0.0 && weights(i + 1) < weights(i))) {
            throw DomainError("window weights must be positive and strictly decreasing");
        }
    }
    if (!(tail_weight > 0.0 && tail_weight < weights(weights.size() - 1))) {
        throw DomainError("tail weight must continue the strict decrease");
    }
    if (elem_dim < 1) {
        throw DomainError("window element dimension must be >= 1");
    }
    auto need = base.expected_dim();
    if (need.has_value() && *need != elem_dim) {
        throw ShapeError("window base metric expects dimension " + std::to_string(*need));
    }
    Metric m;
    m.kind_ = Kind::WeightedSupWindow;
    m.children_.push_back(std::move(base));
    m.weights_ = std::move(weights);
    m.tail_weight_ = tail_weight;
    m.elem_dim_ = elem_dim;
    return m;
}

Metric Metric::geometric_window(Metric base, double ratio, Index horizon, Index elem_dim) {
    Vec w = geometric_weights(ratio, horizon);
    return weighted_sup_window(std::move(base), std::move(w), elem_dim,
                               std::pow(ratio, static_cast<double>(horizon)));
}

double Metric::distance(const Vec& x, const Vec& y) const {
    if (x.size() != y.size()) {
        throw ShapeError("points have different dimensions: " + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()));
    }
    auto need = expected_dim();
    if (need.has_value() && *need != x.size()) {
        throw ShapeError("metric expects dimension " + std::to_string(*need) + ", got " +
                         std::to_string(x.size()));
    }
    switch (kind_) {
    case Kind::Euclidean:
        return (x - y).norm();
    case Kind::CappedEuclidean:
        return std::min((x - y).norm(), cap_);
    case Kind::ProductMax: {
        double best = 0.0;
        Index off = 0;
        for (std::size_t k = 0; k < children_.size(); ++k) {
            best = std::max(best, children_[k].distance(x.segment(off, dims_[k]),
                                                        y.segment(off, dims_[k])));
            off += dims_[k];
        }
        return best;
    }
    case Kind::WeightedSupWindow: {
        const Metric& b = children_[0];
        const Index T = weights_.size();
        double best = 0.0;
        for (Index i = 1; i <= T; ++i) {
            Index off = (T - i) * elem_dim_;
            double d = weights_(i - 1) *
                       b.distance(x.segment(off, elem_dim_), y.segment(off, elem_dim_));
            best = std::max(best, d);
        }
        return best;
    }
    }
    return 0.0;
}

std::optional<double> Metric::diameter_bound() const {
    switch (kind_) {
    case Kind::Euclidean:
        return std::nullopt;
    case Kind::CappedEuclidean:
        return cap_;
    case Kind::ProductMax: {
        double worst = 0.0;
        for (const Metric& c : children_) {
            auto b = c.diameter_bound();
            if (!b.has_value()) {
                return std::nullopt;
            }
            worst = std::max(worst, *b);
        }
        return worst;
    }
    case Kind::WeightedSupWindow: {
        auto b = children_[0].diameter_bound();
        if (!b.has_value()) {
            return std::nullopt;
        }
        return *b; // w_1 = 1 dominates
    }
    }
    return std::nullopt;
}

std::optional<Index> Metric::expected_dim() const {
    switch (kind_) {
    case Kind::Euclidean:
    case Kind::CappedEuclidean:
        return std::nullopt;
    case Kind::ProductMax:
        return std::accumulate(dims_.begin(), dims_.end(), Index{0});
    case Kind::WeightedSupWindow:
        return weights_.size() * elem_dim_;
    }
    return std::nullopt;
}

Index Metric::horizon() const {
    if (kind_ != Kind::WeightedSupWindow) {
        throw ContractViolation("horizon() requires a window metric");
    }
    return weights_.size();
}

Index Metric::elem_dim() const {
    if (kind_ != Kind::WeightedSupWindow) {
        throw ContractViolation("elem_dim() requires a window metric");
    }
    return elem_dim_;
}

const Vec& Metric::window_weights() const {
    if (kind_ != Kind::WeightedSupWindow) {
        throw ContractViolation("window_weights() requires a window metric");
    }
    return weights_;
}

double Metric::tail_weight() const {
    if (kind_ != Kind::WeightedSupWindow) {
        throw ContractViolation("tail_weight() requires a window metric");
    }
    return tail_weight_;
}

const Metric& Metric::base() const {
    if (kind_ != Kind::WeightedSupWindow) {
        throw ContractViolation("base() requires a window metric");
    }
    return children_[0];
}

double Metric::cap() const {
    if (kind_ != Kind::CappedEuclidean) {
        throw ContractViolation("cap() requires a capped metric");
    }
    return cap_;
}

double window_truncation_bound(const Metric& window_metric) {
    if (window_metric.kind() != Metric::Kind::WeightedSupWindow) {
        throw ContractViolation("truncation bound requires a window metric");
    }
    auto base_bound = window_metric.base().diameter_bound();
    if (!base_bound.has_value()) {
        throw ContractViolation(
            "truncation bound requires a capped base metric; an uncapped base gives no "
            "control over discarded coordinates");
    }
    return window_metric.tail_weight() * (*base_bound);
}

} // namespace rct
