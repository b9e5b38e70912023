#include "rct/seqspace.hpp"

#include "rct/errors.hpp"
#include "rct/transport.hpp"
#include "rct/util.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace rct {

Vec flatten_window(const WindowSeq& w) {
    Vec flat(w.values.rows() * w.values.cols());
    for (Index t = 0; t < w.values.rows(); ++t) {
        flat.segment(t * w.values.cols(), w.values.cols()) = w.values.row(t).transpose();
    }
    return flat;
}

WindowSeq unflatten_window(const Vec& flat, Index horizon, Index elem_dim) {
    if (flat.size() != horizon * elem_dim) {
        throw ShapeError("flat window length " + std::to_string(flat.size()) +
                         " does not factor as " + std::to_string(horizon) + " x " +
                         std::to_string(elem_dim));
    }
    WindowSeq w;
    w.values.resize(horizon, elem_dim);
    for (Index t = 0; t < horizon; ++t) {
        w.values.row(t) = flat.segment(t * elem_dim, elem_dim).transpose();
    }
    return w;
}

Metric window_metric(Index horizon, Index elem_dim, double ratio, double cap) {
    return Metric::geometric_window(Metric::capped_euclidean(cap), ratio, horizon, elem_dim);
}

WindowSeq extend_apply(const DrivenSystem& g, const WindowSeq& u_window,
                       const WindowSeq& x_window) {
    if (u_window.horizon() != x_window.horizon()) {
        throw ShapeError("input and state windows have different horizons");
    }
    if (u_window.elem_dim() != g.input_dim() || x_window.elem_dim() != g.state_dim()) {
        throw ShapeError("window element dimensions do not match the system");
    }
    WindowSeq out;
    out.values.resize(x_window.horizon(), x_window.elem_dim());
    for (Index t = 0; t < x_window.horizon(); ++t) {
        out.values.row(t) =
            g.apply(u_window.values.row(t).transpose(), x_window.values.row(t).transpose())
                .transpose();
    }
    return out;
}

std::vector<WindowSeq> time_fold(const Mat& path, Index horizon) {
    if (horizon < 1) {
        throw DomainError("window horizon must be >= 1");
    }
    if (path.rows() < horizon) {
        throw ShapeError("path shorter than the window horizon");
    }
    std::vector<WindowSeq> windows;
    windows.reserve(static_cast<std::size_t>(path.rows() - horizon + 1));
    for (Index end = horizon; end <= path.rows(); ++end) {
        WindowSeq w;
        w.values = path.middleRows(end - horizon, horizon);
        windows.push_back(std::move(w));
    }
    return windows;
}

SolutionCheck solution_equivalence_check(const DrivenSystem& g, const Mat& u_path,
                                         const Mat& x_path, Index horizon, double tol) {
    if (horizon < 1 || x_path.rows() < horizon + 1) {
        throw ShapeError("need at least horizon + 1 states");
    }
    if (u_path.rows() < x_path.rows() - 1) {
        throw ShapeError("input path must cover every transition of the state path");
    }

    SolutionCheck check;
    check.pointwise = true;
    for (Index k = 0; k + 1 < x_path.rows(); ++k) {
        Vec predicted = g.apply(u_path.row(k).transpose(), x_path.row(k).transpose());
        if ((predicted - x_path.row(k + 1).transpose()).cwiseAbs().maxCoeff() > tol) {
            check.pointwise = false;
            break;
        }
    }

    check.windowed = true;
    std::vector<WindowSeq> xw = time_fold(x_path, horizon);
    std::vector<WindowSeq> uw = time_fold(u_path.topRows(x_path.rows() - 1), horizon);
    // Window k of xw ends at state index horizon - 1 + k; the matching input
    // window ends at the same time index, and extend_apply must give the
    // next state window.
    for (std::size_t k = 0; k + 1 < xw.size() && check.windowed; ++k) {
        if (k >= uw.size()) {
            break;
        }
        WindowSeq advanced = extend_apply(g, uw[k], xw[k]);
        if ((advanced.values - xw[k + 1].values).cwiseAbs().maxCoeff() > tol) {
            check.windowed = false;
        }
    }
    return check;
}

WindowMeasure stationary_window_measure(const DrivenSystem& g, const ProcessSpec& process,
                                        Index horizon, Index n_windows,
                                        const ContractionReport& certificate,
                                        std::uint64_t seed, Index washout, Index stride) {
    validate_process(process);
    if (spec_dim(process.marginal) != g.input_dim()) {
        throw ShapeError("process marginal does not match the system input");
    }
    if (horizon < 1 || n_windows < 1) {
        throw DomainError("need horizon >= 1 and n_windows >= 1");
    }
    if (!(certificate.c_hat < 1.0)) {
        throw NonContractionError("window law needs a contraction certificate < 1, got " +
                                  format_double(certificate.c_hat));
    }
    if (stride < 1) {
        stride = 1;
    }
    if (washout == 0) {
        washout = static_cast<Index>(
            std::ceil(std::log(1e-6) / std::log(std::max(certificate.c_hat, 1e-12))));
        washout = std::max<Index>(washout, 1);
    }

    const Index retained = (n_windows - 1) * stride + horizon;
    Mat u_path = sample_path(process, washout + retained, seed);
    Vec x0 = g.state_bounds().has_value()
                 ? ((g.state_bounds()->lo + g.state_bounds()->hi) / 2.0).eval()
                 : Vec::Zero(g.state_dim());
    Mat states = washout_trajectory(g, u_path, x0, washout);

    Mat support(n_windows, horizon * g.state_dim());
    for (Index k = 0; k < n_windows; ++k) {
        WindowSeq w;
        w.values = states.middleRows(k * stride, horizon);
        support.row(k) = flatten_window(w).transpose();
    }
    WindowMeasure m{EmpiricalMeasure::equal_weights(std::move(support)), horizon,
                    g.state_dim(), stride};
    return m;
}

WindowMeasure foias_seq_apply(const DrivenSystem& g, const ProcessSpec& process,
                              const WindowMeasure& m, Index n_particles, std::uint64_t seed) {
    validate_process(process);
    if (!std::holds_alternative<IidDependence>(process.dependence)) {
        throw ContractViolation(
            "the window transfer operator needs an independent input process; a window does "
            "not carry the past inputs a Markov conditional would condition on");
    }
    if (spec_dim(process.marginal) != g.input_dim()) {
        throw ShapeError("process marginal does not match the system input");
    }
    if (m.elem_dim != g.state_dim()) {
        throw ShapeError("window measure element dimension does not match the system state");
    }
    if (n_particles < 1) {
        throw DomainError("particle count must be >= 1");
    }
    Rng base(seed);
    Rng inputs = base.stream("seq-inputs");
    Rng picks = base.stream("seq-states");
    const EmpiricalMeasure& mu = m.measure;
    const Index d = m.elem_dim;
    std::vector<double> cum(static_cast<std::size_t>(mu.size()));
    double acc = 0.0;
    for (Index j = 0; j < mu.size(); ++j) {
        acc += mu.weights()(j);
        cum[static_cast<std::size_t>(j)] = acc;
    }
    Mat support(n_particles, mu.dim());
    for (Index k = 0; k < n_particles; ++k) {
        double p = picks.next_double();
        auto it = std::upper_bound(cum.begin(), cum.end(), p);
        Index pick = std::min<Index>(static_cast<Index>(it - cum.begin()), mu.size() - 1);
        Vec window = mu.atom(pick);
        Vec u = draw(process.marginal, inputs);
        Vec advanced = g.apply(u, window.tail(d));
        Vec out(window.size());
        if (m.horizon > 1) {
            out.head((m.horizon - 1) * d) = window.tail((m.horizon - 1) * d);
        }
        out.tail(d) = advanced;
        support.row(k) = out.transpose();
    }
    return WindowMeasure{EmpiricalMeasure::equal_weights(std::move(support)), m.horizon,
                         m.elem_dim, 0};
}

double stationarity_gap(const WindowMeasure& m, Index max_support, std::uint64_t seed) {
    if (m.horizon < 2) {
        throw DomainError("shift defect needs a horizon >= 2");
    }
    const Index sub = (m.horizon - 1) * m.elem_dim;
    Mat older(m.measure.size(), sub);  // coordinates -T .. -2
    Mat newer(m.measure.size(), sub);  // coordinates -T+1 .. -1
    for (Index i = 0; i < m.measure.size(); ++i) {
        older.row(i) = m.measure.support().row(i).head(sub);
        newer.row(i) = m.measure.support().row(i).tail(sub);
    }
    EmpiricalMeasure law_older =
        EmpiricalMeasure(std::move(older), m.measure.weights()).merged();
    EmpiricalMeasure law_newer =
        EmpiricalMeasure(std::move(newer), m.measure.weights()).merged();

    // The distance depends only on the difference of the two laws, so mass on
    // bitwise-equal atoms cancels exactly and only the residual needs a
    // transport solve. merged() sorts atoms, so shared atoms line up in one
    // lexicographic sweep. For stride-1 window measures the slice laws share
    // all but one window each and the residual is a couple of atoms.
    constexpr double kResidualFloor = 1e-14;
    auto row_cmp = [](const Mat& A, Index r, const Mat& B, Index s) {
        for (Index c = 0; c < A.cols(); ++c) {
            if (A(r, c) < B(s, c)) return -1;
            if (A(r, c) > B(s, c)) return 1;
        }
        return 0;
    };
    std::vector<Index> keep_a, keep_b;
    std::vector<double> res_wa, res_wb;
    Index i = 0;
    Index j = 0;
    while (i < law_older.size() && j < law_newer.size()) {
        int c = row_cmp(law_older.support(), i, law_newer.support(), j);
        if (c < 0) {
            keep_a.push_back(i);
            res_wa.push_back(law_older.weights()(i));
            ++i;
        } else if (c > 0) {
            keep_b.push_back(j);
            res_wb.push_back(law_newer.weights()(j));
            ++j;
        } else {
            double shared = std::min(law_older.weights()(i), law_newer.weights()(j));
            double ra = law_older.weights()(i) - shared;
            double rb = law_newer.weights()(j) - shared;
            if (ra > kResidualFloor) {
                keep_a.push_back(i);
                res_wa.push_back(ra);
            }
            if (rb > kResidualFloor) {
                keep_b.push_back(j);
                res_wb.push_back(rb);
            }
            ++i;
            ++j;
        }
    }
    for (; i < law_older.size(); ++i) {
        keep_a.push_back(i);
        res_wa.push_back(law_older.weights()(i));
    }
    for (; j < law_newer.size(); ++j) {
        keep_b.push_back(j);
        res_wb.push_back(law_newer.weights()(j));
    }

    double mass_a = 0.0;
    for (double w : res_wa) mass_a += w;
    double mass_b = 0.0;
    for (double w : res_wb) mass_b += w;
    // Residual masses agree up to weight-sum slack; if either vanished the
    // laws were equal to within that slack.
    if (mass_a <= 1e-12 || mass_b <= 1e-12) {
        return 0.0;
    }

    auto residual = [sub](const EmpiricalMeasure& law, const std::vector<Index>& keep,
                          const std::vector<double>& rw, double mass) {
        Mat support(static_cast<Index>(keep.size()), sub);
        Vec weights(static_cast<Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            support.row(static_cast<Index>(k)) = law.support().row(keep[k]);
            weights(static_cast<Index>(k)) = rw[k] / mass;
        }
        return EmpiricalMeasure(std::move(support), std::move(weights));
    };
    EmpiricalMeasure res_a = residual(law_older, keep_a, res_wa, mass_a);
    EmpiricalMeasure res_b = residual(law_newer, keep_b, res_wb, mass_b);

    Metric metric = window_metric(m.horizon - 1, m.elem_dim);
    double scale = 0.5 * (mass_a + mass_b);
    return scale * w1_auto(res_a, res_b, metric, max_support,
                           Rng(seed).stream("stationarity-gap").key());
}

double window_law_gap_dual(const WindowMeasure& a, const WindowMeasure& b, double ratio,
                           double cap) {
    if (a.horizon != b.horizon || a.elem_dim != b.elem_dim) {
        throw ShapeError("window laws have different shapes");
    }
    if (a.horizon < 1 || a.measure.size() < 1 || b.measure.size() < 1) {
        throw DomainError("need a horizon >= 1 and nonempty laws");
    }
    if (!(ratio > 0.0 && ratio < 1.0) || !(cap > 0.0)) {
        throw DomainError("need ratio in (0, 1) and cap > 0");
    }
    const Index T = a.horizon;
    const Index d = a.elem_dim;
    const Vec w = geometric_weights(ratio, T);

    // lag 1 = newest element = last d coordinates of a flattened window.
    auto elem = [T, d](const EmpiricalMeasure& mu, Index row, Index lag) -> Vec {
        return mu.support().row(row).segment((T - lag) * d, d).transpose();
    };
    auto bdist = [cap](const Vec& x, const Vec& y) { return std::min(cap, (x - y).norm()); };
    auto lag_mean = [&](const WindowMeasure& m, Index lag) -> Vec {
        Vec mean = Vec::Zero(d);
        for (Index r = 0; r < m.measure.size(); ++r) {
            mean += m.measure.weights()(r) * elem(m.measure, r, lag);
        }
        return mean;
    };
    auto mean_gap = [&](auto&& f) {
        double ea = 0.0;
        for (Index r = 0; r < a.measure.size(); ++r) {
            ea += a.measure.weights()(r) * f(a.measure, r);
        }
        double eb = 0.0;
        for (Index r = 0; r < b.measure.size(); ++r) {
            eb += b.measure.weights()(r) * f(b.measure, r);
        }
        return std::abs(ea - eb);
    };

    double gap = 0.0;
    for (Index lag = 1; lag <= T; ++lag) {
        // w_{lag-1} * b(x_{-lag}, p) is 1-Lipschitz for the window metric;
        // anchors: the origin and the pooled mean of both laws at this lag.
        Vec pooled = 0.5 * (lag_mean(a, lag) + lag_mean(b, lag));
        for (const Vec& anchor : {Vec(Vec::Zero(d)), pooled}) {
            gap = std::max(gap, mean_gap([&](const EmpiricalMeasure& mu, Index r) {
                               return w(lag - 1) * bdist(elem(mu, r, lag), anchor);
                           }));
        }
    }
    for (Index li = 1; li <= T; ++li) {
        for (Index lj = li + 1; lj <= T; ++lj) {
            // b(x_{-li}, x_{-lj}) moves by at most d(X,Y)/w_{li-1} + d(X,Y)/w_{lj-1}.
            double scale = 1.0 / (1.0 / w(li - 1) + 1.0 / w(lj - 1));
            gap = std::max(gap, mean_gap([&](const EmpiricalMeasure& mu, Index r) {
                               return scale * bdist(elem(mu, r, li), elem(mu, r, lj));
                           }));
        }
    }
    return gap;
}

} // namespace rct
