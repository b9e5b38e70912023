#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rct/contraction.hpp"
#include "rct/errors.hpp"
#include "rct/foias.hpp"
#include "rct/invariant.hpp"
#include "rct/measure.hpp"
#include "rct/metric.hpp"
#include "rct/seqspace.hpp"
#include "rct/system.hpp"
#include "rct/transport.hpp"
#include "rct/util.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace rct;
using namespace pybind11::literals;

namespace {

Metric metric_from_cap(std::optional<double> cap) {
    return cap ? Metric::capped_euclidean(*cap) : Metric::euclidean();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "transport toolkit for driven dynamical systems";

    py::register_exception<NonContractionError>(m, "NonContractionError", PyExc_RuntimeError);

    // --- measures -------------------------------------------------------------

    py::class_<EmpiricalMeasure>(m, "Measure")
        .def(py::init<Mat, Vec>(), "support"_a, "weights"_a)
        .def_static("dirac", &EmpiricalMeasure::dirac, "point"_a)
        .def_static("equal_weights", &EmpiricalMeasure::equal_weights, "support"_a)
        .def_static("from_table", &measure_from_table, "text"_a)
        .def_property_readonly("support",
                               [](const EmpiricalMeasure& mu) { return mu.support(); })
        .def_property_readonly("weights",
                               [](const EmpiricalMeasure& mu) { return mu.weights(); })
        .def_property_readonly("dim", &EmpiricalMeasure::dim)
        .def("__len__", &EmpiricalMeasure::size)
        .def("__eq__", &EmpiricalMeasure::operator==, py::is_operator())
        .def("merged", &EmpiricalMeasure::merged)
        .def("quantile", &EmpiricalMeasure::quantile, "p"_a)
        .def("to_table", [](const EmpiricalMeasure& mu) { return to_table(mu); })
        .def("__repr__", [](const EmpiricalMeasure& mu) {
            return "Measure(" + std::to_string(mu.size()) + " atoms, dim " +
                   std::to_string(mu.dim()) + ")";
        });

    m.def("systematic_resample", &systematic_resample, "mu"_a, "n"_a, "seed"_a);
    m.def("product_measure", &product_measure, "theta"_a, "mu"_a,
          "product_cap"_a = Index{1000000});

    // --- distribution specifications -------------------------------------------

    py::class_<DiracSpec>(m, "DiracSpec")
        .def(py::init([](Vec point) { return DiracSpec{std::move(point)}; }), "point"_a);
    py::class_<FiniteAtomsSpec>(m, "FiniteAtomsSpec")
        .def(py::init([](Mat points, Vec weights) {
                 return FiniteAtomsSpec{std::move(points), std::move(weights)};
             }),
             "points"_a, "weights"_a);
    py::class_<UniformSpec>(m, "UniformSpec")
        .def(py::init([](double lo, double hi, Index dim) { return UniformSpec{lo, hi, dim}; }),
             "lo"_a, "hi"_a, "dim"_a = Index{1});
    py::class_<ExponentialSpec>(m, "ExponentialSpec")
        .def(py::init([](double rate, Index dim) { return ExponentialSpec{rate, dim}; }),
             "rate"_a, "dim"_a = Index{1});
    py::class_<GaussianSpec>(m, "GaussianSpec")
        .def(py::init([](double mean, double stddev, Index dim) {
                 return GaussianSpec{mean, stddev, dim};
             }),
             "mean"_a, "stddev"_a, "dim"_a = Index{1});
    py::class_<StandardizedGaussianSpec>(m, "StandardizedGaussianSpec")
        .def(py::init([](Index dim) { return StandardizedGaussianSpec{dim}; }),
             "dim"_a = Index{1});

    m.def("discretize", &discretize, "spec"_a, "n"_a, "seed"_a);

    py::class_<ProcessSpec>(m, "Process")
        .def(py::init([](DistributionSpec marginal) {
                 ProcessSpec p{std::move(marginal), IidDependence{}};
                 validate_process(p);
                 return p;
             }),
             "marginal"_a)
        .def(py::init([](DistributionSpec marginal, Mat transition) {
                 ProcessSpec p{std::move(marginal),
                               FiniteMarkovDependence{std::move(transition)}};
                 validate_process(p);
                 return p;
             }),
             "marginal"_a, "transition"_a);

    m.def("sample_path", &sample_path, "process"_a, "length"_a, "seed"_a);

    // --- systems ---------------------------------------------------------------

    py::class_<DrivenSystem>(m, "System")
        .def("apply", &DrivenSystem::apply, "u"_a, "x"_a)
        .def_property_readonly("name", &DrivenSystem::name)
        .def_property_readonly("input_dim", &DrivenSystem::input_dim)
        .def_property_readonly("state_dim", &DrivenSystem::state_dim)
        .def("__repr__",
             [](const DrivenSystem& g) { return "System(" + g.name() + ")"; });

    m.def("linear", &make_linear_scalar, "a"_a);
    m.def("product_system", &make_product_system);
    m.def(
        "esn",
        [](Index neurons, Index input_dim, std::uint64_t seed, double spectral_radius,
           double input_scale) {
            return make_esn(neurons, input_dim, seed, spectral_radius, input_scale);
        },
        "neurons"_a, "input_dim"_a, "seed"_a, "spectral_radius"_a, "input_scale"_a = 1.0);
    m.def(
        "garch",
        [](double omega, double alpha, double beta) {
            return make_garch_vol(GarchParams{omega, alpha, beta});
        },
        "omega"_a, "alpha"_a, "beta"_a);
    m.def(
        "varma",
        [](std::function<Mat(const Vec&)> coeff, std::function<Vec(const Vec&)> offset,
           Index input_dim, Index state_dim) {
            return make_varma(VarmaParams{std::move(coeff), std::move(offset), input_dim,
                                          state_dim});
        },
        "coeff"_a, "offset"_a, "input_dim"_a, "state_dim"_a);

    m.def("washout_trajectory", &washout_trajectory, "system"_a, "u_path"_a, "x0"_a,
          "washout"_a);
    m.def("semigroup_apply", &semigroup_apply, "system"_a, "u_path"_a, "x"_a, "m"_a, "n"_a);
    m.def("spectral_radius_power", &spectral_radius_power, "a"_a, "rel_tol"_a = 1e-10,
          "max_iters"_a = 10000L);

    // --- transport --------------------------------------------------------------

    m.def(
        "w1_exact",
        [](const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::optional<double> cap,
           Index pair_cap) { return w1_exact(mu, nu, metric_from_cap(cap), pair_cap).cost; },
        "mu"_a, "nu"_a, "cap"_a = py::none(), "pair_cap"_a = kDefaultPairCap);
    m.def(
        "w1_plan",
        [](const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::optional<double> cap,
           Index pair_cap) {
            TransportPlan p = w1_exact(mu, nu, metric_from_cap(cap), pair_cap);
            return std::make_pair(p.cost, p.plan);
        },
        "mu"_a, "nu"_a, "cap"_a = py::none(), "pair_cap"_a = kDefaultPairCap);
    m.def("w1_exact_1d", &w1_exact_1d, "mu"_a, "nu"_a);
    m.def(
        "w1_entropic",
        [](const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double epsilon,
           int max_iters, std::optional<double> cap) {
            EntropicResult r = w1_entropic(mu, nu, metric_from_cap(cap), epsilon, max_iters);
            return py::make_tuple(r.plan.cost, r.iterations, r.converged);
        },
        "mu"_a, "nu"_a, "epsilon"_a, "max_iters"_a = 20000, "cap"_a = py::none());
    m.def(
        "w1_auto",
        [](const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::optional<double> cap,
           Index max_support, std::uint64_t seed) {
            return w1_auto(mu, nu, metric_from_cap(cap), max_support, seed);
        },
        "mu"_a, "nu"_a, "cap"_a = py::none(), "max_support"_a = Index{512}, "seed"_a = 0);
    m.def(
        "dual_lower_bound",
        [](const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
           const std::function<double(const Vec&)>& f, std::optional<double> cap) {
            return dual_lower_bound(mu, nu, f, metric_from_cap(cap));
        },
        "mu"_a, "nu"_a, "f"_a, "cap"_a = py::none());

    // --- transfer operator -------------------------------------------------------

    m.def("foias_exact", &foias_exact, "system"_a, "theta"_a, "mu"_a,
          "product_cap"_a = Index{1000000});
    m.def("foias_mc", &foias_mc, "system"_a, "theta"_a, "mu"_a, "n_particles"_a, "seed"_a);
    m.def("compress", &compress, "mu"_a, "n"_a, "seed"_a);

    // --- contraction ---------------------------------------------------------------

    py::class_<ContractionReport>(m, "ContractionReport")
        .def_readonly("c_hat", &ContractionReport::c_hat)
        .def_readonly("ci_halfwidth", &ContractionReport::ci_halfwidth)
        .def_readonly("n_pairs", &ContractionReport::n_pairs)
        .def_readonly("n_inputs", &ContractionReport::n_inputs)
        .def_property_readonly("method",
                               [](const ContractionReport& r) { return to_string(r.method); })
        .def("to_text", &ContractionReport::to_text)
        .def("__repr__", [](const ContractionReport& r) {
            return "ContractionReport(c_hat=" + format_double(r.c_hat, 6) + ")";
        });

    py::class_<Box>(m, "Box")
        .def(py::init([](Vec lo, Vec hi) { return Box{std::move(lo), std::move(hi)}; }), "lo"_a,
             "hi"_a)
        .def_readonly("lo", &Box::lo)
        .def_readonly("hi", &Box::hi);

    m.def(
        "estimate_contraction",
        [](const DrivenSystem& g, const EmpiricalMeasure& theta, const Box& pair_box,
           Index n_pairs, std::uint64_t seed, std::optional<double> cap) {
            return estimate_contraction(g, theta, pair_box, n_pairs, seed, metric_from_cap(cap));
        },
        "system"_a, "theta"_a, "pair_box"_a, "n_pairs"_a = Index{64}, "seed"_a = 0,
        "cap"_a = py::none());
    m.def(
        "estimate_contraction_mc",
        [](const DrivenSystem& g, const DistributionSpec& theta, const Box& pair_box,
           Index n_pairs, Index n_inputs, std::uint64_t seed, std::optional<double> cap) {
            return estimate_contraction(g, theta, pair_box, n_pairs, n_inputs, seed,
                                        metric_from_cap(cap));
        },
        "system"_a, "theta"_a, "pair_box"_a, "n_pairs"_a = Index{64},
        "n_inputs"_a = Index{256}, "seed"_a = 0, "cap"_a = py::none());
    m.def(
        "garch_certificate",
        [](double omega, double alpha, double beta) {
            return garch_certificate(GarchParams{omega, alpha, beta});
        },
        "omega"_a, "alpha"_a, "beta"_a);

    // --- invariant measures ----------------------------------------------------------

    py::class_<SolveConfig>(m, "SolveConfig")
        .def(py::init<>())
        .def_readwrite("n_particles", &SolveConfig::n_particles)
        .def_readwrite("tol", &SolveConfig::tol)
        .def_readwrite("max_iter", &SolveConfig::max_iter)
        .def_readwrite("seed", &SolveConfig::seed)
        .def_readwrite("theta_atoms", &SolveConfig::theta_atoms)
        .def_readwrite("init_atoms", &SolveConfig::init_atoms)
        .def_readwrite("init_point", &SolveConfig::init_point)
        .def_readwrite("w1_max_support", &SolveConfig::w1_max_support)
        .def_readwrite("refuse_non_contractive", &SolveConfig::refuse_non_contractive)
        .def_readwrite("product_cap", &SolveConfig::product_cap)
        .def_property(
            "mode",
            [](const SolveConfig& c) {
                return c.mode == SolveConfig::Mode::ExactProduct ? "exact_product"
                                                                 : "monte_carlo";
            },
            [](SolveConfig& c, const std::string& mode) {
                if (mode == "exact_product") {
                    c.mode = SolveConfig::Mode::ExactProduct;
                } else if (mode == "monte_carlo") {
                    c.mode = SolveConfig::Mode::MonteCarlo;
                } else {
                    throw DomainError("mode must be exact_product or monte_carlo");
                }
            });

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("fixed_point", &SolveReport::fixed_point)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("gaps", &SolveReport::gaps)
        .def_readonly("c_used", &SolveReport::c_used)
        .def_readonly("posterior_bound", &SolveReport::posterior_bound)
        .def_readonly("noise_floor", &SolveReport::noise_floor)
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("mode", &SolveReport::mode)
        .def_readonly("warning", &SolveReport::warning)
        .def("__repr__", [](const SolveReport& r) {
            return std::string("SolveReport(converged=") + (r.converged ? "True" : "False") +
                   ", iterations=" + std::to_string(r.iterations) + ")";
        });

    m.def("solve_invariant", &solve_invariant, "system"_a, "theta"_a,
          "config"_a = SolveConfig{}, "certificate"_a = py::none());

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("param", &SweepRow::param)
        .def_readonly("input_gap", &SweepRow::input_gap)
        .def_readonly("state_gap", &SweepRow::state_gap)
        .def_readonly("ratio", &SweepRow::ratio)
        .def_readonly("converged", &SweepRow::converged);

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("eps", &SweepConfig::eps)
        .def_readwrite("n_atoms", &SweepConfig::n_atoms)
        .def_readwrite("seed", &SweepConfig::seed)
        .def_readwrite("observable", &SweepConfig::observable)
        .def_readwrite("washout", &SweepConfig::washout)
        .def_readwrite("full_state_w1", &SweepConfig::full_state_w1)
        .def_readwrite("solver", &SweepConfig::solver)
        .def_property(
            "estimator",
            [](const SweepConfig& c) {
                return c.estimator == SweepConfig::Estimator::FixedPoint ? "fixed_point"
                                                                         : "trajectory";
            },
            [](SweepConfig& c, const std::string& estimator) {
                if (estimator == "fixed_point") {
                    c.estimator = SweepConfig::Estimator::FixedPoint;
                } else if (estimator == "trajectory") {
                    c.estimator = SweepConfig::Estimator::Trajectory;
                } else {
                    throw DomainError("estimator must be fixed_point or trajectory");
                }
            });

    m.def("continuity_sweep", &continuity_sweep, "system"_a, "family"_a, "grid"_a,
          "config"_a = SweepConfig{});
    m.def("sweep_to_csv", &sweep_to_csv, "rows"_a);
    m.def("lipschitz_of_s_g", &lipschitz_of_s_g, "rows"_a);

    // --- sequence space ---------------------------------------------------------------

    py::class_<WindowMeasure>(m, "WindowMeasure")
        .def_readonly("measure", &WindowMeasure::measure)
        .def_readonly("horizon", &WindowMeasure::horizon)
        .def_readonly("elem_dim", &WindowMeasure::elem_dim)
        .def_readonly("stride", &WindowMeasure::stride);

    m.def("stationary_window_measure", &stationary_window_measure, "system"_a, "process"_a,
          "horizon"_a, "n_windows"_a, "certificate"_a, "seed"_a, "washout"_a = Index{0},
          "stride"_a = Index{1});
    m.def("foias_seq_apply", &foias_seq_apply, "system"_a, "process"_a, "m"_a, "n_particles"_a,
          "seed"_a);
    m.def("stationarity_gap", &stationarity_gap, "m"_a, "max_support"_a = Index{1024},
          "seed"_a = 0);
    m.def("window_law_gap_dual", &window_law_gap_dual, "a"_a, "b"_a, "ratio"_a = 0.5,
          "cap"_a = 1.0);
}
