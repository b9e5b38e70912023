#include "rct/system.hpp"

#include "rct/errors.hpp"
#include "rct/rng.hpp"
#include "rct/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rct {

DrivenSystem::DrivenSystem(std::string name, ApplyFn apply, Index input_dim, Index state_dim,
                           std::optional<Box> state_bounds)
    : name_(std::move(name)), apply_(std::move(apply)), input_dim_(input_dim),
      state_dim_(state_dim), state_bounds_(std::move(state_bounds)) {
    if (input_dim_ < 1 || state_dim_ < 1) {
        throw DomainError("system dimensions must be >= 1");
    }
    if (state_bounds_.has_value()) {
        if (state_bounds_->lo.size() != state_dim_ || state_bounds_->hi.size() != state_dim_) {
            throw ShapeError("state bounds do not match the state dimension");
        }
        if (((state_bounds_->hi - state_bounds_->lo).array() < 0.0).any()) {
            throw DomainError("state bounds need lo <= hi");
        }
    }
}

Vec DrivenSystem::apply(const Vec& u, const Vec& x) const {
    if (u.size() != input_dim_) {
        throw ShapeError(name_ + ": input has dimension " + std::to_string(u.size()) +
                         ", expected " + std::to_string(input_dim_));
    }
    if (x.size() != state_dim_) {
        throw ShapeError(name_ + ": state has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(state_dim_));
    }
    Vec out = apply_(u, x);
    if (out.size() != state_dim_) {
        throw ShapeError(name_ + ": map returned dimension " + std::to_string(out.size()));
    }
    return out;
}

double spectral_radius_power(const Mat& a, double rel_tol, long max_iters) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw ShapeError("spectral radius needs a square matrix");
    }
    const Index n = a.rows();
    if (n == 1) {
        return std::abs(a(0, 0));
    }
    const Index block = std::min<Index>(4, n);
    Rng rng = Rng(0x5EEDBA5Eu).stream("power-iteration");
    Mat q(n, block);
    for (Index j = 0; j < block; ++j) {
        for (Index i = 0; i < n; ++i) {
            q(i, j) = rng.next_normal();
        }
    }
    q = Eigen::HouseholderQR<Mat>(q).householderQ() * Mat::Identity(n, block);

    double rho = 0.0;
    int stable = 0;
    for (long it = 0; it < max_iters; ++it) {
        Mat z = a * q;
        Mat h = q.transpose() * z;
        Eigen::EigenSolver<Mat> small(h, /*computeEigenvectors=*/false);
        double next = small.eigenvalues().cwiseAbs().maxCoeff();
        q = Eigen::HouseholderQR<Mat>(z).householderQ() * Mat::Identity(n, block);
        if (std::abs(next - rho) <= rel_tol * std::max(next, 1e-300)) {
            if (++stable >= 5) {
                return next;
            }
        } else {
            stable = 0;
        }
        rho = next;
    }
    throw NumericError("power iteration did not stabilize within " + std::to_string(max_iters) +
                       " iterations");
}

EsnParams make_esn_params(Index n_neurons, Index input_dim, std::uint64_t seed,
                          double spectral_radius, double input_scale) {
    if (n_neurons < 1 || input_dim < 1) {
        throw DomainError("reservoir and input dimensions must be >= 1");
    }
    if (!(spectral_radius > 0.0)) {
        throw DomainError("spectral radius must be positive");
    }
    Rng rng(seed);
    Rng ra = rng.stream("reservoir");
    Rng rc = rng.stream("input-weights");
    EsnParams p;
    p.reservoir.resize(n_neurons, n_neurons);
    for (Index i = 0; i < n_neurons; ++i) {
        for (Index j = 0; j < n_neurons; ++j) {
            p.reservoir(i, j) = ra.next_normal();
        }
    }
    p.input_weights.resize(n_neurons, input_dim);
    for (Index i = 0; i < n_neurons; ++i) {
        for (Index j = 0; j < input_dim; ++j) {
            p.input_weights(i, j) = input_scale * rc.next_normal();
        }
    }
    p.leak_scale = 1.0;
    double rho = spectral_radius_power(p.reservoir);
    if (!(rho > 0.0)) {
        throw NumericError("drawn reservoir has zero spectral radius");
    }
    p.reservoir *= spectral_radius / rho;
    return p;
}

DrivenSystem make_esn(const EsnParams& params) {
    if (params.reservoir.rows() != params.reservoir.cols() ||
        params.input_weights.rows() != params.reservoir.rows()) {
        throw ShapeError("reservoir and input weight shapes are inconsistent");
    }
    const Index n = params.reservoir.rows();
    Mat a = params.leak_scale * params.reservoir;
    Mat c = params.input_weights;
    Box bounds{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
    return DrivenSystem(
        "esn",
        [a, c](const Vec& u, const Vec& x) -> Vec {
            return (c * u + a * x).array().tanh().matrix();
        },
        c.cols(), n, bounds);
}

DrivenSystem make_esn(Index n_neurons, Index input_dim, std::uint64_t seed,
                      double spectral_radius, double input_scale) {
    return make_esn(make_esn_params(n_neurons, input_dim, seed, spectral_radius, input_scale));
}

DrivenSystem make_product_system() {
    Box bounds{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
    return DrivenSystem(
        "product",
        [](const Vec& u, const Vec& x) -> Vec {
            return Vec::Constant(1, u(0) * x(0));
        },
        1, 1, bounds);
}

DrivenSystem make_linear_scalar(double a) {
    return DrivenSystem(
        "linear",
        [a](const Vec& u, const Vec& x) -> Vec {
            return Vec::Constant(1, a * x(0) + u(0));
        },
        1, 1);
}

DrivenSystem make_varma(const VarmaParams& params) {
    if (!params.coeff || !params.offset) {
        throw DomainError("varma needs both coeff and offset maps");
    }
    if (params.input_dim < 1 || params.state_dim < 1) {
        throw DomainError("varma dimensions must be >= 1");
    }
    Vec probe = Vec::Zero(params.input_dim);
    Mat a0 = params.coeff(probe);
    Vec f0 = params.offset(probe);
    if (a0.rows() != params.state_dim || a0.cols() != params.state_dim ||
        f0.size() != params.state_dim) {
        throw ShapeError("varma coeff/offset shapes do not match state_dim");
    }
    if (!a0.allFinite() || !f0.allFinite()) {
        throw DomainError("varma coeff/offset produced non-finite values");
    }
    auto coeff = params.coeff;
    auto offset = params.offset;
    const Index state_dim = params.state_dim;
    return DrivenSystem(
        "varma",
        [coeff, offset, state_dim](const Vec& u, const Vec& x) -> Vec {
            Mat a = coeff(u);
            Vec f = offset(u);
            if (a.rows() != state_dim || a.cols() != state_dim || f.size() != state_dim) {
                throw ShapeError("varma coeff/offset returned a wrong shape");
            }
            return a * x + f;
        },
        params.input_dim, params.state_dim);
}

DrivenSystem make_garch_vol(const GarchParams& params) {
    if (!(params.omega > 0.0) || params.alpha < 0.0 || params.beta < 0.0) {
        throw DomainError("garch needs omega > 0 and alpha, beta >= 0");
    }
    if (!(params.alpha + params.beta < 1.0)) {
        throw DomainError("garch needs alpha + beta < 1, got " +
                          format_double(params.alpha + params.beta));
    }
    const double omega = params.omega, alpha = params.alpha, beta = params.beta;
    return DrivenSystem(
        "garch_vol",
        [omega, alpha, beta](const Vec& u, const Vec& h) -> Vec {
            return Vec::Constant(1, omega + (alpha * u(0) * u(0) + beta) * h(0));
        },
        1, 1);
}

Vec semigroup_apply(const DrivenSystem& g, const Mat& u_path, const Vec& x, Index m, Index n) {
    if (m > n) {
        throw DomainError("semigroup needs m <= n");
    }
    if (m < 0 || n > u_path.rows()) {
        throw ShapeError("semigroup window [" + std::to_string(m) + ", " + std::to_string(n) +
                         ") exceeds the path length " + std::to_string(u_path.rows()));
    }
    if (u_path.cols() != g.input_dim()) {
        throw ShapeError("path input dimension " + std::to_string(u_path.cols()) +
                         " does not match the system");
    }
    Vec state = x;
    for (Index t = m; t < n; ++t) {
        state = g.apply(u_path.row(t).transpose(), state);
    }
    return state;
}

ReachableCloud reachable_cloud(const DrivenSystem& g, const Mat& u_path, Index n, Index j,
                               const Mat& init_grid) {
    if (j < 0 || j > n) {
        throw DomainError("lookback j must satisfy 0 <= j <= n");
    }
    if (init_grid.rows() < 1 || init_grid.cols() != g.state_dim()) {
        throw ShapeError("initial grid must be non-empty with state-dimension columns");
    }
    ReachableCloud cloud;
    cloud.states.resize(init_grid.rows(), g.state_dim());
    for (Index k = 0; k < init_grid.rows(); ++k) {
        cloud.states.row(k) =
            semigroup_apply(g, u_path, init_grid.row(k).transpose(), n - j, n).transpose();
    }
    cloud.diameter = 0.0;
    for (Index p = 0; p < cloud.states.rows(); ++p) {
        for (Index q = p + 1; q < cloud.states.rows(); ++q) {
            cloud.diameter =
                std::max(cloud.diameter, (cloud.states.row(p) - cloud.states.row(q)).norm());
        }
    }
    return cloud;
}

ReachableCloud reachable_cloud(const DrivenSystem& g, const Mat& u_path, Index n, Index j,
                               Index n_init, std::uint64_t seed) {
    if (!g.state_bounds().has_value()) {
        throw ContractViolation("drawing an initial grid needs state bounds; pass a grid");
    }
    if (n_init < 1) {
        throw DomainError("need at least one initial state");
    }
    const Box& box = *g.state_bounds();
    Rng rng = Rng(seed).stream("reachable-grid");
    Mat grid(n_init, g.state_dim());
    for (Index k = 0; k < n_init; ++k) {
        for (Index d = 0; d < g.state_dim(); ++d) {
            grid(k, d) = rng.next_uniform(box.lo(d), box.hi(d));
        }
    }
    return reachable_cloud(g, u_path, n, j, grid);
}

Mat washout_trajectory(const DrivenSystem& g, const Mat& u_path, const Vec& x0, Index washout) {
    const Index len = u_path.rows();
    if (washout < 0 || washout >= len) {
        throw DomainError("washout must satisfy 0 <= washout < path length");
    }
    if (u_path.cols() != g.input_dim()) {
        throw ShapeError("path input dimension does not match the system");
    }
    Mat states(len - washout, g.state_dim());
    Vec x = x0;
    for (Index t = 0; t < len; ++t) {
        x = g.apply(u_path.row(t).transpose(), x);
        if (t >= washout) {
            states.row(t - washout) = x.transpose();
        }
    }
    return states;
}

} // namespace rct
