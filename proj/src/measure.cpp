#include "rct/measure.hpp"

#include "rct/errors.hpp"
#include "rct/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace rct {
namespace {

double kahan_sum(const Vec& v) {
    double s = 0.0;
    double c = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        double y = v(i) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

bool row_less(const Mat& m, Index a, Index b) {
    for (Index j = 0; j < m.cols(); ++j) {
        if (m(a, j) < m(b, j)) {
            return true;
        }
        if (m(a, j) > m(b, j)) {
            return false;
        }
    }
    return false;
}

bool row_equal(const Mat& m, Index a, Index b) {
    for (Index j = 0; j < m.cols(); ++j) {
        if (m(a, j) != m(b, j)) {
            return false;
        }
    }
    return true;
}

} // namespace

EmpiricalMeasure::EmpiricalMeasure(Mat support, Vec weights) {
    if (support.rows() == 0 || support.cols() == 0) {
        throw ShapeError("measure needs at least one atom and one coordinate");
    }
    if (weights.size() != support.rows()) {
        throw ShapeError("weight count " + std::to_string(weights.size()) +
                         " does not match atom count " + std::to_string(support.rows()));
    }
    if (!support.allFinite() || !weights.allFinite()) {
        throw DomainError("measure contains non-finite entries");
    }
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights(i) < 0.0) {
            throw DomainError("negative weight at atom " + std::to_string(i));
        }
    }

    Index kept = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights(i) >= kWeightFloor) {
            ++kept;
        }
    }
    if (kept == 0) {
        throw DomainError("all weights fall below the floor");
    }
    support_.resize(kept, support.cols());
    weights_.resize(kept);
    Index out = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights(i) >= kWeightFloor) {
            support_.row(out) = support.row(i);
            weights_(out) = weights(i);
            ++out;
        }
    }

    double s = kahan_sum(weights_);
    if (std::abs(s - 1.0) > kSumSlack) {
        throw DomainError("weights sum to " + format_double(s) + ", expected 1 within " +
                          format_double(kSumSlack));
    }
    // Skip the division when already normalized so that normalization is
    // idempotent bit for bit (and serialization round-trips exactly).
    if (std::abs(s - 1.0) > 1e-13) {
        weights_ /= s;
    }
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vec& point) {
    Mat support(1, point.size());
    support.row(0) = point.transpose();
    Vec w(1);
    w(0) = 1.0;
    return EmpiricalMeasure(std::move(support), std::move(w));
}

EmpiricalMeasure EmpiricalMeasure::equal_weights(Mat support) {
    Vec w = Vec::Constant(support.rows(), 1.0 / static_cast<double>(support.rows()));
    return EmpiricalMeasure(std::move(support), std::move(w));
}

EmpiricalMeasure EmpiricalMeasure::merged() const {
    std::vector<Index> order(static_cast<std::size_t>(size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return row_less(support_, a, b); });

    std::vector<Index> group_rep;
    std::vector<double> group_weight;
    group_rep.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && row_equal(support_, order[k - 1], order[k])) {
            group_weight.back() += weights_(order[k]);
        } else {
            group_rep.push_back(order[k]);
            group_weight.push_back(weights_(order[k]));
        }
    }
    Mat support(static_cast<Index>(group_rep.size()), dim());
    Vec weights(static_cast<Index>(group_rep.size()));
    for (std::size_t k = 0; k < group_rep.size(); ++k) {
        support.row(static_cast<Index>(k)) = support_.row(group_rep[k]);
        weights(static_cast<Index>(k)) = group_weight[k];
    }
    return EmpiricalMeasure(std::move(support), std::move(weights));
}

double EmpiricalMeasure::quantile(double p) const {
    if (dim() != 1) {
        throw ShapeError("quantile requires a 1-D measure");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("quantile level must lie in [0, 1]");
    }
    std::vector<Index> order(static_cast<std::size_t>(size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return support_(a, 0) < support_(b, 0); });
    double cum = 0.0;
    for (Index i : order) {
        cum += weights_(i);
        if (cum >= p) {
            return support_(i, 0);
        }
    }
    return support_(order.back(), 0); // p within rounding of total mass
}

bool EmpiricalMeasure::operator==(const EmpiricalMeasure& other) const {
    return support_.rows() == other.support_.rows() && support_.cols() == other.support_.cols() &&
           support_ == other.support_ && weights_ == other.weights_;
}

EmpiricalMeasure systematic_resample(const EmpiricalMeasure& mu, Index n, std::uint64_t seed) {
    if (n < 1) {
        throw DomainError("resample size must be >= 1");
    }
    if (mu.size() <= n) {
        const double target = 1.0 / static_cast<double>(mu.size());
        bool equal = true;
        for (Index i = 0; i < mu.size(); ++i) {
            if (std::abs(mu.weights()(i) - target) > 1e-9 * target) {
                equal = false;
                break;
            }
        }
        if (equal) {
            return mu;
        }
    }

    Rng rng = Rng(seed).stream("systematic-resample");
    const double u = rng.next_double();
    Mat support(n, mu.dim());
    double cum = mu.weights()(0);
    Index idx = 0;
    for (Index k = 0; k < n; ++k) {
        double pos = (static_cast<double>(k) + u) / static_cast<double>(n);
        while (pos >= cum && idx + 1 < mu.size()) {
            ++idx;
            cum += mu.weights()(idx);
        }
        support.row(k) = mu.support().row(idx);
    }
    return EmpiricalMeasure::equal_weights(std::move(support));
}

EmpiricalMeasure product_measure(const EmpiricalMeasure& theta, const EmpiricalMeasure& mu,
                                 Index product_cap) {
    if (theta.size() > product_cap / std::max<Index>(mu.size(), 1)) {
        throw ResourceError("product support " + std::to_string(theta.size()) + " x " +
                            std::to_string(mu.size()) + " exceeds cap " +
                            std::to_string(product_cap));
    }
    const Index rows = theta.size() * mu.size();
    Mat support(rows, theta.dim() + mu.dim());
    Vec weights(rows);
    Index r = 0;
    for (Index i = 0; i < theta.size(); ++i) {
        for (Index j = 0; j < mu.size(); ++j) {
            support.row(r).head(theta.dim()) = theta.support().row(i);
            support.row(r).tail(mu.dim()) = mu.support().row(j);
            weights(r) = theta.weights()(i) * mu.weights()(j);
            ++r;
        }
    }
    return EmpiricalMeasure(std::move(support), std::move(weights));
}

// --- Distribution specifications ------------------------------------------

Index spec_dim(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& s) -> Index {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DiracSpec>) {
                return s.point.size();
            } else if constexpr (std::is_same_v<T, FiniteAtomsSpec>) {
                return s.points.cols();
            } else {
                return s.dim;
            }
        },
        spec);
}

void validate_spec(const DistributionSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DiracSpec>) {
                if (s.point.size() < 1 || !s.point.allFinite()) {
                    throw DomainError("dirac point must be finite and non-empty");
                }
            } else if constexpr (std::is_same_v<T, FiniteAtomsSpec>) {
                EmpiricalMeasure check(s.points, s.weights); // validates everything
                (void)check;
            } else if constexpr (std::is_same_v<T, UniformSpec>) {
                if (!(s.lo < s.hi)) {
                    throw DomainError("uniform bounds need lo < hi");
                }
                if (s.dim < 1) {
                    throw DomainError("distribution dimension must be >= 1");
                }
            } else if constexpr (std::is_same_v<T, ExponentialSpec>) {
                if (!(s.rate > 0.0)) {
                    throw DomainError("exponential rate must be positive");
                }
                if (s.dim < 1) {
                    throw DomainError("distribution dimension must be >= 1");
                }
            } else if constexpr (std::is_same_v<T, GaussianSpec>) {
                if (!(s.stddev > 0.0)) {
                    throw DomainError("gaussian stddev must be positive");
                }
                if (s.dim < 1) {
                    throw DomainError("distribution dimension must be >= 1");
                }
            } else {
                if (s.dim < 1) {
                    throw DomainError("distribution dimension must be >= 1");
                }
            }
        },
        spec);
}

bool spec_is_finite(const DistributionSpec& spec) {
    return std::holds_alternative<DiracSpec>(spec) || std::holds_alternative<FiniteAtomsSpec>(spec);
}

Vec draw(const DistributionSpec& spec, Rng& rng) {
    return std::visit(
        [&rng](const auto& s) -> Vec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DiracSpec>) {
                return s.point;
            } else if constexpr (std::is_same_v<T, FiniteAtomsSpec>) {
                double p = rng.next_double();
                double cum = 0.0;
                Index pick = s.points.rows() - 1;
                for (Index i = 0; i < s.points.rows(); ++i) {
                    cum += s.weights(i);
                    if (p < cum) {
                        pick = i;
                        break;
                    }
                }
                return s.points.row(pick).transpose();
            } else if constexpr (std::is_same_v<T, UniformSpec>) {
                Vec v(s.dim);
                for (Index j = 0; j < s.dim; ++j) {
                    v(j) = rng.next_uniform(s.lo, s.hi);
                }
                return v;
            } else if constexpr (std::is_same_v<T, ExponentialSpec>) {
                Vec v(s.dim);
                for (Index j = 0; j < s.dim; ++j) {
                    v(j) = rng.next_exponential(s.rate);
                }
                return v;
            } else if constexpr (std::is_same_v<T, GaussianSpec>) {
                Vec v(s.dim);
                for (Index j = 0; j < s.dim; ++j) {
                    v(j) = s.mean + s.stddev * rng.next_normal();
                }
                return v;
            } else {
                Vec v(s.dim);
                for (Index j = 0; j < s.dim; ++j) {
                    v(j) = rng.next_normal();
                }
                return v;
            }
        },
        spec);
}

EmpiricalMeasure discretize(const DistributionSpec& spec, Index n, std::uint64_t seed) {
    validate_spec(spec);
    if (const auto* d = std::get_if<DiracSpec>(&spec)) {
        return EmpiricalMeasure::dirac(d->point);
    }
    if (const auto* f = std::get_if<FiniteAtomsSpec>(&spec)) {
        return EmpiricalMeasure(f->points, f->weights);
    }
    if (n < 1) {
        throw DomainError("discretization size must be >= 1");
    }
    Rng rng = Rng(seed).stream("discretize");
    Mat support(n, spec_dim(spec));
    for (Index i = 0; i < n; ++i) {
        support.row(i) = draw(spec, rng).transpose();
    }
    return EmpiricalMeasure::equal_weights(std::move(support));
}

// --- Stationary input processes -------------------------------------------

void validate_process(const ProcessSpec& process) {
    validate_spec(process.marginal);
    if (const auto* markov = std::get_if<FiniteMarkovDependence>(&process.dependence)) {
        const auto* atoms = std::get_if<FiniteAtomsSpec>(&process.marginal);
        if (atoms == nullptr) {
            throw ContractViolation("markov dependence requires a finite-atom marginal");
        }
        const Mat& P = markov->transition;
        if (P.rows() != P.cols() || P.rows() != atoms->points.rows()) {
            throw ShapeError("transition matrix must be square over the marginal atoms");
        }
        for (Index i = 0; i < P.rows(); ++i) {
            double row = 0.0;
            for (Index j = 0; j < P.cols(); ++j) {
                if (P(i, j) < 0.0) {
                    throw DomainError("transition probabilities must be nonnegative");
                }
                row += P(i, j);
            }
            if (std::abs(row - 1.0) > 1e-10) {
                throw DomainError("transition row " + std::to_string(i) + " sums to " +
                                  format_double(row));
            }
        }
        Vec pi = atoms->weights;
        Vec piP = P.transpose() * pi;
        if ((piP - pi).cwiseAbs().maxCoeff() > 1e-10) {
            throw ContractViolation("marginal weights are not stationary for the transition "
                                    "matrix (max defect " +
                                    format_double((piP - pi).cwiseAbs().maxCoeff()) + ")");
        }
    }
}

Mat sample_path(const ProcessSpec& process, Index length, std::uint64_t seed) {
    validate_process(process);
    if (length < 1) {
        throw DomainError("path length must be >= 1");
    }
    Rng rng = Rng(seed).stream("path");
    Mat path(length, spec_dim(process.marginal));
    if (std::holds_alternative<IidDependence>(process.dependence)) {
        for (Index t = 0; t < length; ++t) {
            path.row(t) = draw(process.marginal, rng).transpose();
        }
        return path;
    }
    const auto& markov = std::get<FiniteMarkovDependence>(process.dependence);
    const auto& atoms = std::get<FiniteAtomsSpec>(process.marginal);
    auto pick_from = [&rng](const Vec& probs) {
        double p = rng.next_double();
        double cum = 0.0;
        Index pick = probs.size() - 1;
        for (Index i = 0; i < probs.size(); ++i) {
            cum += probs(i);
            if (p < cum) {
                pick = i;
                break;
            }
        }
        return pick;
    };
    Index state = pick_from(atoms.weights);
    path.row(0) = atoms.points.row(state);
    for (Index t = 1; t < length; ++t) {
        state = pick_from(markov.transition.row(state).transpose());
        path.row(t) = atoms.points.row(state);
    }
    return path;
}

// --- Flat-table serialization ----------------------------------------------

std::string to_table(const EmpiricalMeasure& mu) {
    std::string out;
    out.reserve(static_cast<std::size_t>(mu.size()) * (static_cast<std::size_t>(mu.dim()) + 1) *
                26);
    for (Index j = 0; j < mu.dim(); ++j) {
        out += "x" + std::to_string(j) + ",";
    }
    out += "weight\n";
    for (Index i = 0; i < mu.size(); ++i) {
        for (Index j = 0; j < mu.dim(); ++j) {
            out += format_double(mu.support()(i, j));
            out += ',';
        }
        out += format_double(mu.weights()(i));
        out += '\n';
    }
    return out;
}

EmpiricalMeasure measure_from_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw DomainError("empty measure table");
    }
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) {
            header.push_back(tok);
        }
    }
    if (header.size() < 2 || header.back() != "weight") {
        throw DomainError("measure table header must list coordinates then 'weight'");
    }
    for (std::size_t j = 0; j + 1 < header.size(); ++j) {
        if (header[j] != "x" + std::to_string(j)) {
            throw DomainError("unexpected coordinate column '" + header[j] + "'");
        }
    }
    const Index d = static_cast<Index>(header.size()) - 1;
    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        Index cols = 0;
        while (std::getline(ls, tok, ',')) {
            values.push_back(parse_double(tok));
            ++cols;
        }
        if (cols != d + 1) {
            throw DomainError("row " + std::to_string(rows + 1) + " has " + std::to_string(cols) +
                              " fields, expected " + std::to_string(d + 1));
        }
        ++rows;
    }
    if (rows == 0) {
        throw DomainError("measure table has no atoms");
    }
    Mat support(rows, d);
    Vec weights(rows);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < d; ++j) {
            support(i, j) = values[static_cast<std::size_t>(i * (d + 1) + j)];
        }
        weights(i) = values[static_cast<std::size_t>(i * (d + 1) + d)];
    }
    return EmpiricalMeasure(std::move(support), std::move(weights));
}

} // namespace rct
