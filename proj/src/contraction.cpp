#include "rct/contraction.hpp"

#include "rct/errors.hpp"
#include "rct/util.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace rct {
namespace {

double box_diameter(const Box& box) {
    return (box.hi - box.lo).norm();
}

Vec uniform_in_box(const Box& box, Rng& rng) {
    Vec x(box.lo.size());
    for (Index d = 0; d < x.size(); ++d) {
        x(d) = rng.next_uniform(box.lo(d), box.hi(d));
    }
    return x;
}

struct PairSampler {
    const Box& box;
    const Metric& metric;
    double min_sep;
    Rng rng;

    std::pair<Vec, Vec> next() {
        for (int attempt = 0; attempt < 128; ++attempt) {
            Vec x = uniform_in_box(box, rng);
            Vec y = uniform_in_box(box, rng);
            if (metric.distance(x, y) >= min_sep) {
                return {std::move(x), std::move(y)};
            }
        }
        throw DomainError("pair box is degenerate: cannot draw separated state pairs");
    }
};

template <typename MeanRatio>
ContractionReport run_estimate(const DrivenSystem& g, const Box& pair_box, Index n_pairs,
                               std::uint64_t seed, const Metric& metric, MeanRatio&& mean_ratio,
                               ContractionMethod method, Index n_inputs) {
    if (pair_box.lo.size() != g.state_dim() || pair_box.hi.size() != g.state_dim()) {
        throw ShapeError("pair box does not match the state dimension");
    }
    if (n_pairs < 1) {
        throw DomainError("need at least one state pair");
    }
    const double diam = box_diameter(pair_box);
    if (!(diam > 0.0)) {
        throw DomainError("pair box is degenerate: lo == hi");
    }
    PairSampler sampler{pair_box, metric, 1e-8 * diam, Rng(seed).stream("pairs")};

    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(static_cast<std::size_t>(n_pairs) + 1);
    if (metric.distance(pair_box.lo, pair_box.hi) >= sampler.min_sep) {
        pairs.emplace_back(pair_box.lo, pair_box.hi);
    }
    while (pairs.size() < static_cast<std::size_t>(n_pairs) + 1) {
        pairs.push_back(sampler.next());
    }

    ContractionReport report;
    report.method = method;
    report.n_pairs = static_cast<Index>(pairs.size());
    report.n_inputs = n_inputs;
    double worst = -1.0;
    double worst_ci = 0.0;
    for (const auto& [x, y] : pairs) {
        double base = metric.distance(x, y);
        auto [mean, ci] = mean_ratio(x, y, base);
        if (mean > worst) {
            worst = mean;
            worst_ci = ci;
            report.worst_pair = std::make_pair(x, y);
        }
    }
    report.c_hat = worst;
    report.ci_halfwidth = worst_ci;
    return report;
}

} // namespace

std::string to_string(ContractionMethod m) {
    switch (m) {
    case ContractionMethod::ExactFiniteTheta:
        return "exact_finite_theta";
    case ContractionMethod::MonteCarlo:
        return "monte_carlo";
    case ContractionMethod::AnalyticCertificate:
        return "analytic_certificate";
    }
    return "unknown";
}

std::string ContractionReport::to_text() const {
    std::string out;
    out += "c_hat: " + format_double(c_hat) + "\n";
    out += "ci_halfwidth: " + format_double(ci_halfwidth) + "\n";
    out += "n_pairs: " + std::to_string(n_pairs) + "\n";
    out += "n_inputs: " + std::to_string(n_inputs) + "\n";
    out += "method: " + to_string(method) + "\n";
    out += std::string("bound_side: ") +
           (method == ContractionMethod::AnalyticCertificate
                ? "upper (certificate)"
                : "lower (sampled supremum estimate)") +
           "\n";
    if (worst_pair.has_value()) {
        auto fmt = [](const Vec& v) {
            std::string s;
            for (Index i = 0; i < v.size(); ++i) {
                if (i > 0) {
                    s += " ";
                }
                s += format_double(v(i));
            }
            return s;
        };
        out += "worst_pair_x: " + fmt(worst_pair->first) + "\n";
        out += "worst_pair_y: " + fmt(worst_pair->second) + "\n";
    }
    return out;
}

ContractionReport estimate_contraction(const DrivenSystem& g, const EmpiricalMeasure& theta,
                                       const Box& pair_box, Index n_pairs, std::uint64_t seed,
                                       const Metric& state_metric) {
    if (theta.dim() != g.input_dim()) {
        throw ShapeError("theta dimension does not match the system input");
    }
    auto mean_ratio = [&](const Vec& x, const Vec& y, double base) {
        double acc = 0.0;
        for (Index i = 0; i < theta.size(); ++i) {
            Vec u = theta.atom(i);
            acc += theta.weights()(i) * state_metric.distance(g.apply(u, x), g.apply(u, y));
        }
        return std::make_pair(acc / base, 0.0);
    };
    return run_estimate(g, pair_box, n_pairs, seed, state_metric, mean_ratio,
                        ContractionMethod::ExactFiniteTheta, theta.size());
}

ContractionReport estimate_contraction(const DrivenSystem& g, const DistributionSpec& theta,
                                       const Box& pair_box, Index n_pairs, Index n_inputs,
                                       std::uint64_t seed, const Metric& state_metric) {
    validate_spec(theta);
    if (spec_dim(theta) != g.input_dim()) {
        throw ShapeError("theta dimension does not match the system input");
    }
    if (n_inputs < 2) {
        throw DomainError("need at least two input draws for a standard error");
    }
    // One common input set across pairs: cheaper, and the pairwise maxima
    // are better behaved under common randomness.
    Rng inputs_rng = Rng(seed).stream("inputs");
    std::vector<Vec> inputs;
    inputs.reserve(static_cast<std::size_t>(n_inputs));
    for (Index k = 0; k < n_inputs; ++k) {
        inputs.push_back(draw(theta, inputs_rng));
    }
    auto mean_ratio = [&](const Vec& x, const Vec& y, double base) {
        double mean = 0.0, m2 = 0.0;
        Index count = 0;
        for (const Vec& u : inputs) {
            double r = state_metric.distance(g.apply(u, x), g.apply(u, y)) / base;
            ++count;
            double d1 = r - mean;
            mean += d1 / static_cast<double>(count);
            m2 += d1 * (r - mean);
        }
        double var = m2 / static_cast<double>(count - 1);
        double ci = 3.0 * std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
        return std::make_pair(mean, ci);
    };
    return run_estimate(g, pair_box, n_pairs, seed, state_metric, mean_ratio,
                        ContractionMethod::MonteCarlo, n_inputs);
}

ContractionReport varma_certificate(const VarmaParams& params, const DistributionSpec& theta,
                                    Index n_samples, std::uint64_t seed) {
    validate_spec(theta);
    if (spec_dim(theta) != params.input_dim) {
        throw ShapeError("theta dimension does not match the varma input");
    }
    if (n_samples < 1) {
        throw DomainError("need at least one sample");
    }
    Rng rng = Rng(seed).stream("varma-certificate");
    double mean = 0.0, m2 = 0.0;
    for (Index k = 1; k <= n_samples; ++k) {
        Vec u = draw(theta, rng);
        Mat a = params.coeff(u);
        double s = Eigen::JacobiSVD<Mat>(a).singularValues()(0);
        double d1 = s - mean;
        mean += d1 / static_cast<double>(k);
        m2 += d1 * (s - mean);
    }
    ContractionReport report;
    report.c_hat = mean;
    report.ci_halfwidth =
        n_samples > 1
            ? 3.0 * std::sqrt(std::max(m2 / static_cast<double>(n_samples - 1), 0.0) /
                              static_cast<double>(n_samples))
            : 0.0;
    report.n_pairs = 0;
    report.n_inputs = n_samples;
    report.method = ContractionMethod::AnalyticCertificate;
    return report;
}

ContractionReport garch_certificate(const GarchParams& params) {
    if (!(params.omega > 0.0) || params.alpha < 0.0 || params.beta < 0.0) {
        throw DomainError("garch needs omega > 0 and alpha, beta >= 0");
    }
    if (params.alpha + params.beta >= 1.0) {
        throw NonContractionError("alpha + beta = " + format_double(params.alpha + params.beta) +
                                  " >= 1: the volatility recursion is not a mean contraction");
    }
    ContractionReport report;
    report.c_hat = params.alpha + params.beta;
    report.ci_halfwidth = 0.0;
    report.n_pairs = 0;
    report.n_inputs = 0;
    report.method = ContractionMethod::AnalyticCertificate;
    return report;
}

} // namespace rct
