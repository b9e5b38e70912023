#include "rct/invariant.hpp"

#include "rct/errors.hpp"
#include "rct/util.hpp"

#include <cmath>
#include <limits>

namespace rct {
namespace {

EmpiricalMeasure initial_measure(const DrivenSystem& g, const SolveConfig& config, Rng rng) {
    if (config.init_point.has_value()) {
        if (config.init_point->size() != g.state_dim()) {
            throw ShapeError("init point does not match the state dimension");
        }
        return EmpiricalMeasure::dirac(*config.init_point);
    }
    if (g.state_bounds().has_value() && config.init_atoms > 1) {
        const Box& box = *g.state_bounds();
        Mat grid(config.init_atoms, g.state_dim());
        for (Index k = 0; k < config.init_atoms; ++k) {
            for (Index d = 0; d < g.state_dim(); ++d) {
                grid(k, d) = rng.next_uniform(box.lo(d), box.hi(d));
            }
        }
        return EmpiricalMeasure::equal_weights(std::move(grid));
    }
    return EmpiricalMeasure::dirac(Vec::Zero(g.state_dim()));
}

EmpiricalMeasure column_measure(const EmpiricalMeasure& mu, Index column) {
    if (column < 0 || column >= mu.dim()) {
        throw ShapeError("observable index " + std::to_string(column) + " out of range");
    }
    return EmpiricalMeasure(mu.support().col(column), mu.weights());
}

} // namespace

SolveReport solve_invariant(const DrivenSystem& g, const DistributionSpec& theta,
                            const SolveConfig& config,
                            std::optional<ContractionReport> certificate) {
    validate_spec(theta);
    if (spec_dim(theta) != g.input_dim()) {
        throw ShapeError("theta dimension does not match the system input");
    }
    if (config.n_particles < 1 || config.max_iter < 1 || !(config.tol > 0.0)) {
        throw DomainError("solver needs n_particles >= 1, max_iter >= 1, tol > 0");
    }
    Rng base(config.seed);

    // Finite input measure for the exact-product path (and the default
    // contraction estimate).
    EmpiricalMeasure theta_atoms =
        spec_is_finite(theta) ? discretize(theta, 1, 0)
                              : discretize(theta, config.theta_atoms, base.stream("theta").key());

    double c_hat;
    if (certificate.has_value()) {
        c_hat = certificate->c_hat;
    } else {
        Box pair_box = g.state_bounds().has_value()
                           ? *g.state_bounds()
                           : Box{Vec::Constant(g.state_dim(), -1.0),
                                 Vec::Constant(g.state_dim(), 1.0)};
        c_hat = estimate_contraction(g, theta_atoms, pair_box, 64,
                                     base.stream("contraction").key())
                    .c_hat;
    }
    if (c_hat >= 1.0 && config.refuse_non_contractive) {
        throw NonContractionError("contraction factor " + format_double(c_hat) +
                                  " >= 1: no fixed-point guarantee; refusing to iterate");
    }

    auto step = [&](const EmpiricalMeasure& mu, std::uint64_t seed) {
        if (config.mode == SolveConfig::Mode::MonteCarlo) {
            return foias_mc(g, theta, mu, config.n_particles, seed);
        }
        EmpiricalMeasure pushed = foias_exact(g, theta_atoms, mu, config.product_cap);
        return systematic_resample(pushed, config.n_particles, seed);
    };
    auto gap_between = [&](const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                           std::uint64_t seed) {
        return w1_auto(a, b, Metric::euclidean(), config.w1_max_support, seed);
    };

    EmpiricalMeasure mu = initial_measure(g, config, base.stream("init"));

    double noise_floor = gap_between(step(mu, base.stream("floor-a").key()),
                                     step(mu, base.stream("floor-b").key()),
                                     base.stream("floor-gap").key());
    double threshold = std::max(config.tol * std::max(1.0 - c_hat, 0.0), 3.0 * noise_floor);

    SolveReport report(mu);
    report.c_used = c_hat;
    report.mode =
        config.mode == SolveConfig::Mode::MonteCarlo ? "monte_carlo" : "exact_product";
    // A sampled contraction estimate is a lower estimate of the modulus, so
    // it cannot assert well-posedness on an unbounded space; only an analytic
    // certificate can.
    std::optional<double> asserted_lipschitz;
    if (certificate.has_value() &&
        certificate->method == ContractionMethod::AnalyticCertificate &&
        certificate->c_hat < 1.0) {
        asserted_lipschitz = certificate->c_hat;
    }
    report.warning = foias_wellposedness_warning(g, std::nullopt, asserted_lipschitz);

    // The ratio above which a consecutive gap counts as stalled rather than
    // decaying at the certified rate.
    const double stall_ratio = std::max(0.9, (1.0 + std::min(c_hat, 1.0)) / 2.0);

    for (int k = 0; k < config.max_iter; ++k) {
        EmpiricalMeasure next = step(mu, base.stream("step").stream(static_cast<std::uint64_t>(k)).key());
        double gap = gap_between(next, mu,
                                 base.stream("gap").stream(static_cast<std::uint64_t>(k)).key());
        report.gaps.push_back(gap);
        report.iterations = k + 1;
        if (gap <= threshold) {
            mu = std::move(next);
            report.converged = true;
            break;
        }
        // Decay stalled above the threshold. The initial floor estimate can
        // undershoot when the start measure is smaller than the working
        // support (a first exact-product step resamples as a no-op and is
        // deterministic), so re-measure the floor at the current iterate and
        // accept the gap if it sits at that level.
        if (c_hat < 1.0 && k > 0 && gap > stall_ratio * report.gaps[static_cast<std::size_t>(k) - 1]) {
            Rng fl = base.stream("floor").stream(static_cast<std::uint64_t>(k));
            noise_floor = std::max(
                noise_floor, gap_between(step(mu, fl.stream("a").key()),
                                         step(mu, fl.stream("b").key()), fl.stream("gap").key()));
            threshold = std::max(threshold, 3.0 * noise_floor);
            if (gap <= threshold) {
                mu = std::move(next);
                report.converged = true;
                break;
            }
        }
        mu = std::move(next);
    }
    report.noise_floor = noise_floor;
    report.fixed_point = mu;
    report.posterior_bound = c_hat < 1.0 && !report.gaps.empty()
                                 ? report.gaps.back() / (1.0 - c_hat)
                                 : std::numeric_limits<double>::infinity();
    return report;
}

std::vector<SweepRow> continuity_sweep(const DrivenSystem& g,
                                       const std::function<DistributionSpec(double)>& family,
                                       const std::vector<double>& grid,
                                       const SweepConfig& config) {
    if (!family) {
        throw DomainError("sweep needs a parameterized input family");
    }
    if (grid.empty()) {
        throw DomainError("sweep grid is empty");
    }
    if (!(config.eps > 0.0)) {
        throw DomainError("sweep eps must be positive");
    }
    if (g.input_dim() != 1) {
        throw ContractViolation("sweeps compare 1-D input families");
    }

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    Rng base(config.seed);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const double p = grid[gi];
        const std::uint64_t pair_seed =
            base.stream("sweep-point").stream(static_cast<std::uint64_t>(gi)).key();
        SweepRow row;
        row.param = p;
        DistributionSpec lo = family(p);
        DistributionSpec hi = family(p + config.eps);
        EmpiricalMeasure theta_lo = discretize(lo, config.n_atoms, pair_seed);
        EmpiricalMeasure theta_hi = discretize(hi, config.n_atoms, pair_seed);
        row.input_gap = w1_exact_1d(theta_lo, theta_hi);

        try {
            EmpiricalMeasure state_lo = EmpiricalMeasure::dirac(Vec::Zero(1));
            EmpiricalMeasure state_hi = state_lo;
            bool ok = true;
            if (config.estimator == SweepConfig::Estimator::FixedPoint) {
                SolveConfig sc = config.solver;
                sc.seed = pair_seed;
                auto as_spec = [](const EmpiricalMeasure& m) {
                    return DistributionSpec(FiniteAtomsSpec{m.support(), m.weights()});
                };
                SolveReport rep_lo = solve_invariant(g, as_spec(theta_lo), sc);
                SolveReport rep_hi = solve_invariant(g, as_spec(theta_hi), sc);
                ok = rep_lo.converged && rep_hi.converged;
                state_lo = std::move(rep_lo.fixed_point);
                state_hi = std::move(rep_hi.fixed_point);
            } else {
                const Index length = config.washout + config.n_atoms;
                Mat path_lo = sample_path({lo, IidDependence{}}, length, pair_seed);
                Mat path_hi = sample_path({hi, IidDependence{}}, length, pair_seed);
                Vec x0 = g.state_bounds().has_value()
                             ? ((g.state_bounds()->lo + g.state_bounds()->hi) / 2.0).eval()
                             : Vec::Zero(g.state_dim());
                Mat states_lo = washout_trajectory(g, path_lo, x0, config.washout);
                Mat states_hi = washout_trajectory(g, path_hi, x0, config.washout);
                ok = states_lo.allFinite() && states_hi.allFinite();
                state_lo = EmpiricalMeasure::equal_weights(std::move(states_lo));
                state_hi = EmpiricalMeasure::equal_weights(std::move(states_hi));
            }
            if (g.state_dim() == 1) {
                row.state_gap = w1_exact_1d(state_lo, state_hi);
            } else if (config.full_state_w1) {
                row.state_gap = w1_auto(state_lo, state_hi, Metric::euclidean(),
                                        config.solver.w1_max_support, pair_seed);
            } else {
                row.state_gap = w1_exact_1d(column_measure(state_lo, config.observable),
                                            column_measure(state_hi, config.observable));
            }
            row.converged = ok;
        } catch (const NonContractionError&) {
            row.state_gap = std::numeric_limits<double>::quiet_NaN();
            row.converged = false;
        } catch (const NumericError&) {
            row.state_gap = std::numeric_limits<double>::quiet_NaN();
            row.converged = false;
        }
        row.ratio = row.input_gap > 0.0 ? row.state_gap / row.input_gap
                                        : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
    }
    return rows;
}

double lipschitz_of_s_g(const std::vector<SweepRow>& rows) {
    double best = -1.0;
    for (const SweepRow& row : rows) {
        if (row.input_gap > 0.0 && std::isfinite(row.ratio)) {
            best = std::max(best, row.ratio);
        }
    }
    if (best < 0.0) {
        throw DomainError("degenerate sweep: no rows with a positive input gap");
    }
    return best;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "param,input_gap,state_gap,ratio,converged\n";
    for (const SweepRow& row : rows) {
        out += format_double(row.param) + "," + format_double(row.input_gap) + "," +
               format_double(row.state_gap) + "," + format_double(row.ratio) + "," +
               (row.converged ? "true" : "false") + "\n";
    }
    return out;
}

} // namespace rct
