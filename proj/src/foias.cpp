#include "rct/foias.hpp"

#include "rct/errors.hpp"

#include <string>

namespace rct {

EmpiricalMeasure frobenius_perron(const std::function<Vec(const Vec&)>& f,
                                  const EmpiricalMeasure& mu) {
    if (!f) {
        throw DomainError("pushforward needs a map");
    }
    Vec first = f(mu.atom(0));
    Mat images(mu.size(), first.size());
    images.row(0) = first.transpose();
    for (Index i = 1; i < mu.size(); ++i) {
        Vec y = f(mu.atom(i));
        if (y.size() != first.size()) {
            throw ShapeError("map image dimension changed between atoms");
        }
        images.row(i) = y.transpose();
    }
    return EmpiricalMeasure(std::move(images), mu.weights()).merged();
}

EmpiricalMeasure foias_exact(const DrivenSystem& g, const EmpiricalMeasure& theta,
                             const EmpiricalMeasure& mu, Index product_cap) {
    if (theta.dim() != g.input_dim() || mu.dim() != g.state_dim()) {
        throw ShapeError("theta/mu dimensions do not match the system");
    }
    if (theta.size() > product_cap / std::max<Index>(mu.size(), 1)) {
        throw ResourceError("transfer support " + std::to_string(theta.size()) + " x " +
                            std::to_string(mu.size()) + " exceeds cap " +
                            std::to_string(product_cap) + "; compress the state measure first");
    }
    const Index rows = theta.size() * mu.size();
    Mat images(rows, g.state_dim());
    Vec weights(rows);
    Index r = 0;
    for (Index i = 0; i < theta.size(); ++i) {
        Vec u = theta.atom(i);
        for (Index j = 0; j < mu.size(); ++j) {
            images.row(r) = g.apply(u, mu.atom(j)).transpose();
            weights(r) = theta.weights()(i) * mu.weights()(j);
            ++r;
        }
    }
    return EmpiricalMeasure(std::move(images), std::move(weights)).merged();
}

EmpiricalMeasure foias_mc(const DrivenSystem& g, const DistributionSpec& theta,
                          const EmpiricalMeasure& mu, Index n_particles, std::uint64_t seed) {
    validate_spec(theta);
    if (spec_dim(theta) != g.input_dim() || mu.dim() != g.state_dim()) {
        throw ShapeError("theta/mu dimensions do not match the system");
    }
    if (n_particles < 1) {
        throw DomainError("particle count must be >= 1");
    }
    Rng base(seed);
    Rng inputs = base.stream("mc-inputs");
    Rng states = base.stream("mc-states");
    Mat images(n_particles, g.state_dim());
    for (Index k = 0; k < n_particles; ++k) {
        Vec u = draw(theta, inputs);
        double p = states.next_double();
        double cum = 0.0;
        Index pick = mu.size() - 1;
        for (Index j = 0; j < mu.size(); ++j) {
            cum += mu.weights()(j);
            if (p < cum) {
                pick = j;
                break;
            }
        }
        images.row(k) = g.apply(u, mu.atom(pick)).transpose();
    }
    return EmpiricalMeasure::equal_weights(std::move(images));
}

EmpiricalMeasure compress(const EmpiricalMeasure& mu, Index n, std::uint64_t seed) {
    return systematic_resample(mu, n, seed);
}

std::optional<std::string> foias_wellposedness_warning(const DrivenSystem& g,
                                                       std::optional<double> metric_cap,
                                                       std::optional<double> asserted_lipschitz) {
    if (metric_cap.has_value() && *metric_cap > 0.0) {
        return std::nullopt;
    }
    if (g.state_bounds().has_value()) {
        return std::nullopt;
    }
    if (asserted_lipschitz.has_value() && *asserted_lipschitz >= 0.0) {
        return std::nullopt;
    }
    return "transfer operator on '" + g.name() +
           "': unbounded state space with an uncapped metric and no asserted Lipschitz "
           "bound; expectations of distances may diverge";
}

} // namespace rct
