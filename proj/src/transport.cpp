#include "rct/transport.hpp"

#include "rct/errors.hpp"
#include "rct/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rct {
namespace {

void check_same_dim(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != nu.dim()) {
        throw ShapeError("measures live in different dimensions: " + std::to_string(mu.dim()) +
                         " vs " + std::to_string(nu.dim()));
    }
}

Mat cost_matrix(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const Metric& metric) {
    Mat C(mu.size(), nu.size());
    for (Index j = 0; j < nu.size(); ++j) {
        Vec y = nu.atom(j);
        for (Index i = 0; i < mu.size(); ++i) {
            C(i, j) = metric.distance(mu.atom(i), y);
        }
    }
    return C;
}

// Dense transportation simplex. Nodes 0..m-1 are supply atoms, m..m+n-1
// demand atoms; the basis is a spanning tree with m+n-1 edges. Dantzig
// pricing, first-minimum leaving rule, everything index-ordered so the
// result is deterministic.
class TransportSimplex {
public:
    TransportSimplex(const Mat& C, const Vec& a, const Vec& b)
        : C_(C), a_(a), b_(b), m_(static_cast<int>(a.size())), n_(static_cast<int>(b.size())) {}

    Mat solve() {
        northwest_start();
        const double tol = 1e-12 * (1.0 + C_.cwiseAbs().maxCoeff());
        const long max_pivots = 1000L * (m_ + n_) + 10000L;
        Vec u(m_), v(n_);
        for (long pivot = 0;; ++pivot) {
            if (pivot > max_pivots) {
                throw NumericError("transport simplex exceeded the pivot budget");
            }
            compute_duals(u, v);
            int bi = -1, bj = -1;
            double best = -tol;
            for (int j = 0; j < n_; ++j) {
                const double vj = v(j);
                for (int i = 0; i < m_; ++i) {
                    double r = C_(i, j) - u(i) - vj;
                    if (r < best) {
                        best = r;
                        bi = i;
                        bj = j;
                    }
                }
            }
            if (bi < 0) {
                break;
            }
            pivot_in(bi, bj);
        }
        Mat plan = Mat::Zero(m_, n_);
        for (const Edge& e : edges_) {
            plan(e.i, e.j) = std::max(e.flow, 0.0);
        }
        return plan;
    }

private:
    struct Edge {
        int i;
        int j;
        double flow;
    };

    void northwest_start() {
        edges_.reserve(m_ + n_ - 1);
        int i = 0, j = 0;
        double ra = a_(0), rb = b_(0);
        while (true) {
            double t = std::max(std::min(ra, rb), 0.0);
            edges_.push_back({i, j, t});
            ra -= t;
            rb -= t;
            if (i == m_ - 1 && j == n_ - 1) {
                break;
            }
            if ((ra <= rb && i + 1 < m_) || j + 1 == n_) {
                ++i;
                ra = a_(i);
            } else {
                ++j;
                rb = b_(j);
            }
        }
    }

    void build_adjacency() {
        adj_.assign(m_ + n_, {});
        for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
            adj_[edges_[e].i].push_back(e);
            adj_[m_ + edges_[e].j].push_back(e);
        }
    }

    void compute_duals(Vec& u, Vec& v) {
        build_adjacency();
        stack_.clear();
        stack_.push_back(0);
        seen_.assign(m_ + n_, false);
        seen_[0] = true;
        u(0) = 0.0;
        while (!stack_.empty()) {
            int node = stack_.back();
            stack_.pop_back();
            for (int e : adj_[node]) {
                const Edge& ed = edges_[e];
                int other = (node < m_) ? m_ + ed.j : ed.i;
                if (seen_[other]) {
                    continue;
                }
                seen_[other] = true;
                if (other >= m_) {
                    v(other - m_) = C_(ed.i, ed.j) - u(ed.i);
                } else {
                    u(other) = C_(ed.i, ed.j) - v(ed.j);
                }
                stack_.push_back(other);
            }
        }
    }

    // Path from demand node (m_+bj) to supply node bi through the tree;
    // the entering edge closes the cycle and carries +theta.
    void pivot_in(int bi, int bj) {
        parent_edge_.assign(m_ + n_, -1);
        parent_node_.assign(m_ + n_, -1);
        seen_.assign(m_ + n_, false);
        stack_.clear();
        int start = m_ + bj;
        stack_.push_back(start);
        seen_[start] = true;
        while (!stack_.empty()) {
            int node = stack_.back();
            stack_.pop_back();
            if (node == bi) {
                break;
            }
            for (int e : adj_[node]) {
                const Edge& ed = edges_[e];
                int other = (node < m_) ? m_ + ed.j : ed.i;
                if (seen_[other]) {
                    continue;
                }
                seen_[other] = true;
                parent_edge_[other] = e;
                parent_node_[other] = node;
                stack_.push_back(other);
            }
        }

        path_.clear();
        for (int node = bi; node != start; node = parent_node_[node]) {
            path_.push_back(parent_edge_[node]);
        }
        std::reverse(path_.begin(), path_.end());

        // Walking from bj toward bi, even positions lose flow, odd gain.
        double theta = std::numeric_limits<double>::infinity();
        int leaving_pos = -1;
        for (int k = 0; k < static_cast<int>(path_.size()); k += 2) {
            if (edges_[path_[k]].flow < theta) {
                theta = edges_[path_[k]].flow;
                leaving_pos = k;
            }
        }
        for (int k = 0; k < static_cast<int>(path_.size()); ++k) {
            edges_[path_[k]].flow += (k % 2 == 0) ? -theta : theta;
        }
        edges_[path_[leaving_pos]] = {bi, bj, theta};
    }

    const Mat& C_;
    const Vec& a_;
    const Vec& b_;
    int m_;
    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> stack_;
    std::vector<int> parent_edge_;
    std::vector<int> parent_node_;
    std::vector<int> path_;
    std::vector<bool> seen_;
};

double plan_cost(const Mat& C, const Mat& plan) {
    double s = 0.0, c = 0.0;
    for (Index j = 0; j < C.cols(); ++j) {
        for (Index i = 0; i < C.rows(); ++i) {
            if (plan(i, j) != 0.0) {
                double y = plan(i, j) * C(i, j) - c;
                double t = s + y;
                c = (t - s) - y;
                s = t;
            }
        }
    }
    return s;
}

void check_marginals(const Mat& plan, const Vec& a, const Vec& b) {
    double worst = std::max((plan.rowwise().sum() - a).cwiseAbs().maxCoeff(),
                            (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff());
    if (worst > 1e-9) {
        throw NumericError("transport plan marginals off by " + format_double(worst));
    }
}

} // namespace

double w1_exact_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    check_same_dim(mu, nu);
    if (mu.dim() != 1) {
        throw ShapeError("1-D solver called on " + std::to_string(mu.dim()) + "-D measures");
    }
    struct Event {
        double x;
        double delta;
    };
    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(mu.size() + nu.size()));
    for (Index i = 0; i < mu.size(); ++i) {
        events.push_back({mu.support()(i, 0), mu.weights()(i)});
    }
    for (Index j = 0; j < nu.size(); ++j) {
        events.push_back({nu.support()(j, 0), -nu.weights()(j)});
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& p, const Event& q) { return p.x < q.x; });
    double w = 0.0;
    double diff = 0.0;
    for (std::size_t k = 0; k + 1 < events.size(); ++k) {
        diff += events[k].delta;
        w += std::abs(diff) * (events[k + 1].x - events[k].x);
    }
    return w;
}

TransportPlan w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                       const Metric& metric, Index pair_cap) {
    check_same_dim(mu, nu);
    if (mu.size() > pair_cap / std::max<Index>(nu.size(), 1)) {
        throw ResourceError("support pair count " + std::to_string(mu.size()) + " x " +
                            std::to_string(nu.size()) + " exceeds the exact-solver cap " +
                            std::to_string(pair_cap) + "; compress first or use w1_entropic");
    }
    Mat C = cost_matrix(mu, nu, metric);
    TransportSimplex simplex(C, mu.weights(), nu.weights());
    TransportPlan result;
    result.plan = simplex.solve();
    check_marginals(result.plan, mu.weights(), nu.weights());
    result.cost = plan_cost(C, result.plan);
    result.exact = true;
    return result;
}

EntropicResult w1_entropic(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const Metric& metric, double epsilon, int max_iters) {
    check_same_dim(mu, nu);
    if (!(epsilon > 0.0)) {
        throw DomainError("entropic regularization must be positive");
    }
    if (max_iters < 1) {
        throw DomainError("max_iters must be >= 1");
    }
    const Index m = mu.size(), n = nu.size();
    Mat C = cost_matrix(mu, nu, metric);
    const double diam = C.maxCoeff();
    Vec log_a = mu.weights().array().log().matrix();
    Vec log_b = nu.weights().array().log().matrix();
    Vec f = Vec::Zero(m), g = Vec::Zero(n);

    std::vector<double> schedule;
    for (double e = std::max(epsilon, diam / 4.0); e > epsilon * 1.5; e /= 2.0) {
        schedule.push_back(e);
    }
    schedule.push_back(epsilon);

    auto lse_rows = [&](const Vec& gg, double eps, Vec& out) {
        // out_i = LSE_j((gg_j - C_ij) / eps)
        for (Index i = 0; i < m; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (Index j = 0; j < n; ++j) {
                mx = std::max(mx, (gg(j) - C(i, j)));
            }
            double s = 0.0;
            for (Index j = 0; j < n; ++j) {
                s += std::exp(((gg(j) - C(i, j)) - mx) / eps);
            }
            out(i) = mx / eps + std::log(s);
        }
    };
    auto lse_cols = [&](const Vec& ff, double eps, Vec& out) {
        for (Index j = 0; j < n; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (Index i = 0; i < m; ++i) {
                mx = std::max(mx, (ff(i) - C(i, j)));
            }
            double s = 0.0;
            for (Index i = 0; i < m; ++i) {
                s += std::exp(((ff(i) - C(i, j)) - mx) / eps);
            }
            out(j) = mx / eps + std::log(s);
        }
    };

    int iters = 0;
    bool converged = false;
    Vec lse(m), lse2(n);
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        const double eps = schedule[stage];
        const bool final_stage = (stage + 1 == schedule.size());
        const double tol = final_stage ? 1e-9 : 1e-4;
        converged = false;
        double prev_err = std::numeric_limits<double>::infinity();
        int stalls = 0;
        while (iters < max_iters) {
            lse_rows(g, eps, lse);
            f = eps * (log_a - lse);
            lse_cols(f, eps, lse2);
            g = eps * (log_b - lse2);
            ++iters;
            if (iters % 5 == 0 || iters == max_iters) {
                // After the g-update columns are exact; check rows.
                double err = 0.0;
                for (Index i = 0; i < m; ++i) {
                    double row = 0.0;
                    for (Index j = 0; j < n; ++j) {
                        row += std::exp((f(i) + g(j) - C(i, j)) / eps);
                    }
                    err += std::abs(row - mu.weights()(i));
                }
                if (err <= tol) {
                    converged = true;
                    break;
                }
                // At small eps the per-sweep contraction is numerically
                // indistinguishable from 1; once the defect stops shrinking,
                // further sweeps only burn the budget.
                if (err >= prev_err * (1.0 - 1e-3)) {
                    if (++stalls >= 3) {
                        break;
                    }
                } else {
                    stalls = 0;
                }
                prev_err = err;
            }
        }
        if (iters >= max_iters) {
            break;
        }
    }

    Mat P(m, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            P(i, j) = std::exp((f(i) + g(j) - C(i, j)) / epsilon);
        }
    }
    // Round to the exact marginals (scale rows, then columns, then patch the
    // leftover mass with a rank-one correction).
    for (Index i = 0; i < m; ++i) {
        double row = P.row(i).sum();
        if (row > mu.weights()(i) && row > 0.0) {
            P.row(i) *= mu.weights()(i) / row;
        }
    }
    for (Index j = 0; j < n; ++j) {
        double col = P.col(j).sum();
        if (col > nu.weights()(j) && col > 0.0) {
            P.col(j) *= nu.weights()(j) / col;
        }
    }
    Vec err_a = mu.weights() - P.rowwise().sum();
    Vec err_b = nu.weights() - P.colwise().sum().transpose();
    double missing = err_a.cwiseMax(0.0).sum();
    if (missing > 0.0) {
        P += err_a.cwiseMax(0.0) * err_b.cwiseMax(0.0).transpose() / missing;
    }

    EntropicResult result;
    result.plan.plan = P;
    result.plan.cost = plan_cost(C, P);
    result.plan.exact = false;
    result.iterations = iters;
    result.converged = converged;
    check_marginals(P, mu.weights(), nu.weights());
    return result;
}

double dual_lower_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                        const std::function<double(const Vec&)>& f, const Metric& metric) {
    check_same_dim(mu, nu);
    const Index m = mu.size(), n = nu.size();
    std::vector<Vec> points;
    points.reserve(static_cast<std::size_t>(m + n));
    for (Index i = 0; i < m; ++i) {
        points.push_back(mu.atom(i));
    }
    for (Index j = 0; j < n; ++j) {
        points.push_back(nu.atom(j));
    }
    std::vector<double> fv(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        fv[k] = f(points[k]);
        if (!std::isfinite(fv[k])) {
            throw DomainError("test function returned a non-finite value");
        }
    }
    constexpr double slack = 1e-9;
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t q = p + 1; q < points.size(); ++q) {
            double lhs = std::abs(fv[p] - fv[q]);
            double rhs = metric.distance(points[p], points[q]);
            if (lhs > rhs + slack) {
                auto name = [&](std::size_t k) {
                    return k < static_cast<std::size_t>(m)
                               ? "mu atom " + std::to_string(k)
                               : "nu atom " + std::to_string(k - static_cast<std::size_t>(m));
                };
                throw ContractViolation("test function is not 1-Lipschitz: |f(x)-f(y)| = " +
                                        format_double(lhs) + " > d = " + format_double(rhs) +
                                        " for " + name(p) + " and " + name(q));
            }
        }
    }
    double s = 0.0;
    for (Index i = 0; i < m; ++i) {
        s += mu.weights()(i) * fv[static_cast<std::size_t>(i)];
    }
    for (Index j = 0; j < n; ++j) {
        s -= nu.weights()(j) * fv[static_cast<std::size_t>(m + j)];
    }
    return s;
}

double w1_auto(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const Metric& metric,
               Index max_support, std::uint64_t seed) {
    check_same_dim(mu, nu);
    if (mu.dim() == 1 && metric.kind() == Metric::Kind::Euclidean) {
        return w1_exact_1d(mu, nu);
    }
    std::uint64_t shared = Rng(seed).stream("w1-auto-compress").key();
    const EmpiricalMeasure* a = &mu;
    const EmpiricalMeasure* b = &nu;
    EmpiricalMeasure ca = mu, cb = nu;
    if (mu.size() > max_support) {
        ca = systematic_resample(mu, max_support, shared);
        a = &ca;
    }
    if (nu.size() > max_support) {
        cb = systematic_resample(nu, max_support, shared);
        b = &cb;
    }
    return w1_exact(*a, *b, metric, max_support * max_support).cost;
}

} // namespace rct
