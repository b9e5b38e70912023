#include "cli_commands.hpp"

#include "rct/contraction.hpp"
#include "rct/errors.hpp"
#include "rct/foias.hpp"
#include "rct/invariant.hpp"
#include "rct/measure.hpp"
#include "rct/metric.hpp"
#include "rct/rng.hpp"
#include "rct/seqspace.hpp"
#include "rct/system.hpp"
#include "rct/transport.hpp"
#include "rct/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <utility>

namespace rct::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& message) { throw DomainError(message); }

Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        config_error("cannot open config file " + path);
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        config_error(std::string("config: ") + e.what());
    }
}

/// Rejects keys outside the allowed set so typos fail loudly instead of
/// silently falling back to defaults.
void require_keys(const Json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        config_error(where + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            config_error("unknown key \"" + item.key() + "\" in " + where);
        }
    }
}

const Json& require_section(const Json& config, const char* name) {
    if (!config.contains(name)) {
        config_error(std::string("config needs a \"") + name + "\" section");
    }
    return config.at(name);
}

double num_at(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
        config_error(where + " needs a numeric \"" + key + "\"");
    }
    return obj.at(key).get<double>();
}

double num_or(const Json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_number()) {
        config_error(where + ": \"" + key + "\" must be a number");
    }
    return obj.at(key).get<double>();
}

Index index_or(const Json& obj, const char* key, Index fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_number_integer()) {
        config_error(where + ": \"" + key + "\" must be an integer");
    }
    return static_cast<Index>(obj.at(key).get<std::int64_t>());
}

bool bool_or(const Json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        config_error(where + ": \"" + key + "\" must be a boolean");
    }
    return obj.at(key).get<bool>();
}

std::string string_or(const Json& obj, const char* key, std::string fallback,
                      const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_string()) {
        config_error(where + ": \"" + key + "\" must be a string");
    }
    return obj.at(key).get<std::string>();
}

Vec vec_from_json(const Json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) {
        config_error(where + " must be a non-empty array of numbers");
    }
    Vec v(static_cast<Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            config_error(where + " must contain numbers only");
        }
        v(static_cast<Index>(i)) = arr[i].get<double>();
    }
    return v;
}

Mat mat_from_json(const Json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty() || !arr[0].is_array() || arr[0].empty()) {
        config_error(where + " must be a non-empty array of equal-length number arrays");
    }
    const std::size_t cols = arr[0].size();
    Mat m(static_cast<Index>(arr.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_array() || arr[i].size() != cols) {
            config_error(where + " rows must have equal length");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!arr[i][j].is_number()) {
                config_error(where + " must contain numbers only");
            }
            m(static_cast<Index>(i), static_cast<Index>(j)) = arr[i][j].get<double>();
        }
    }
    return m;
}

DistributionSpec spec_from_json(const Json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        config_error(where + " needs a string \"kind\"");
    }
    const std::string kind = j.at("kind").get<std::string>();
    DistributionSpec spec;
    if (kind == "dirac") {
        require_keys(j, where, {"kind", "point"});
        spec = DiracSpec{vec_from_json(j.at("point"), where + ".point")};
    } else if (kind == "finite") {
        require_keys(j, where, {"kind", "points", "weights"});
        Mat points = mat_from_json(j.at("points"), where + ".points");
        Vec weights = j.contains("weights")
                          ? vec_from_json(j.at("weights"), where + ".weights")
                          : Vec::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
        spec = FiniteAtomsSpec{std::move(points), std::move(weights)};
    } else if (kind == "uniform") {
        require_keys(j, where, {"kind", "lo", "hi", "dim"});
        spec = UniformSpec{num_at(j, "lo", where), num_at(j, "hi", where),
                           index_or(j, "dim", 1, where)};
    } else if (kind == "exponential") {
        require_keys(j, where, {"kind", "rate", "dim"});
        spec = ExponentialSpec{num_at(j, "rate", where), index_or(j, "dim", 1, where)};
    } else if (kind == "gaussian") {
        require_keys(j, where, {"kind", "mean", "stddev", "dim"});
        spec = GaussianSpec{num_at(j, "mean", where), num_at(j, "stddev", where),
                            index_or(j, "dim", 1, where)};
    } else if (kind == "standardized_gaussian") {
        require_keys(j, where, {"kind", "dim"});
        spec = StandardizedGaussianSpec{index_or(j, "dim", 1, where)};
    } else {
        config_error(where + ": unknown distribution kind \"" + kind + "\"");
    }
    validate_spec(spec);
    return spec;
}

ProcessSpec process_from_config(const Json& config) {
    ProcessSpec process{spec_from_json(require_section(config, "input"), "input"),
                        IidDependence{}};
    if (config.contains("markov_transition")) {
        process.dependence = FiniteMarkovDependence{
            mat_from_json(config.at("markov_transition"), "markov_transition")};
    }
    validate_process(process);
    return process;
}

struct BuiltSystem {
    DrivenSystem system;
    std::string kind;
    std::optional<GarchParams> garch;
    std::optional<VarmaParams> varma;
};

GarchParams garch_from_json(const Json& j) {
    require_keys(j, "system", {"kind", "omega", "alpha", "beta"});
    return GarchParams{num_at(j, "omega", "system"), num_at(j, "alpha", "system"),
                       num_at(j, "beta", "system")};
}

VarmaParams varma_from_json(const Json& j) {
    require_keys(j, "system", {"kind", "scale", "state_dim"});
    const double scale = num_at(j, "scale", "system");
    const Index dim = index_or(j, "state_dim", 1, "system");
    if (dim < 1) {
        config_error("system.state_dim must be >= 1");
    }
    VarmaParams p;
    p.coeff = [scale, dim](const Vec&) { return Mat(scale * Mat::Identity(dim, dim)); };
    p.offset = [dim](const Vec& u) { return Vec(Vec::Constant(dim, u(0))); };
    p.input_dim = 1;
    p.state_dim = dim;
    return p;
}

std::string system_kind(const Json& config) {
    const Json& j = require_section(config, "system");
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        config_error("system needs a string \"kind\"");
    }
    return j.at("kind").get<std::string>();
}

BuiltSystem system_from_config(const Json& config) {
    const Json& j = require_section(config, "system");
    const std::string kind = system_kind(config);
    if (kind == "esn") {
        require_keys(j, "system",
                     {"kind", "neurons", "input_dim", "seed", "spectral_radius", "input_scale"});
        return BuiltSystem{make_esn(index_or(j, "neurons", 100, "system"),
                                    index_or(j, "input_dim", 1, "system"),
                                    static_cast<std::uint64_t>(index_or(j, "seed", 1, "system")),
                                    num_at(j, "spectral_radius", "system"),
                                    num_or(j, "input_scale", 1.0, "system")),
                           kind,
                           {},
                           {}};
    }
    if (kind == "linear") {
        require_keys(j, "system", {"kind", "a"});
        return BuiltSystem{make_linear_scalar(num_at(j, "a", "system")), kind, {}, {}};
    }
    if (kind == "product") {
        require_keys(j, "system", {"kind"});
        return BuiltSystem{make_product_system(), kind, {}, {}};
    }
    if (kind == "garch") {
        GarchParams p = garch_from_json(j);
        return BuiltSystem{make_garch_vol(p), kind, p, {}};
    }
    if (kind == "varma") {
        VarmaParams p = varma_from_json(j);
        return BuiltSystem{make_varma(p), kind, {}, std::move(p)};
    }
    config_error("unknown system kind \"" + kind + "\"");
}

Metric metric_from_json(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        return Metric::euclidean();
    }
    const Json& j = obj.at(key);
    require_keys(j, where + ".metric", {"kind", "cap"});
    const std::string kind = string_or(j, "kind", "euclidean", where + ".metric");
    if (kind == "euclidean") {
        return Metric::euclidean();
    }
    if (kind == "capped_euclidean") {
        return Metric::capped_euclidean(num_at(j, "cap", where + ".metric"));
    }
    config_error(where + ".metric: unknown kind \"" + kind + "\"");
}

Box pair_box_for(const BuiltSystem& bs, const Json& opts, const std::string& where) {
    if (opts.contains("pair_lo") || opts.contains("pair_hi")) {
        if (!opts.contains("pair_lo") || !opts.contains("pair_hi")) {
            config_error(where + " needs both pair_lo and pair_hi");
        }
        Box box{vec_from_json(opts.at("pair_lo"), where + ".pair_lo"),
                vec_from_json(opts.at("pair_hi"), where + ".pair_hi")};
        if (box.lo.size() != bs.system.state_dim() || box.hi.size() != bs.system.state_dim()) {
            config_error(where + ": pair box dimension does not match the state");
        }
        return box;
    }
    if (bs.system.state_bounds()) {
        return *bs.system.state_bounds();
    }
    config_error(where + " needs pair_lo/pair_hi because the system has no state bounds");
}

constexpr std::initializer_list<const char*> kCertifyKeys = {"n_pairs",  "n_inputs", "n_samples",
                                                             "pair_lo", "pair_hi",  "metric"};

ContractionReport build_certificate(const BuiltSystem& bs, const DistributionSpec& theta,
                                    const Json& opts, const std::string& where,
                                    std::uint64_t seed) {
    if (bs.garch) {
        return garch_certificate(*bs.garch);
    }
    if (bs.varma) {
        return varma_certificate(*bs.varma, theta, index_or(opts, "n_samples", 4096, where),
                                 Rng(seed).stream("certificate").key());
    }
    const Index n_pairs = index_or(opts, "n_pairs", 64, where);
    Box box = pair_box_for(bs, opts, where);
    Metric metric = metric_from_json(opts, "metric", where);
    if (spec_is_finite(theta)) {
        EmpiricalMeasure atoms = discretize(theta, 1, Rng(seed).stream("theta").key());
        return estimate_contraction(bs.system, atoms, box, n_pairs,
                                    Rng(seed).stream("certificate").key(), metric);
    }
    return estimate_contraction(bs.system, theta, box, n_pairs,
                                index_or(opts, "n_inputs", 256, where),
                                Rng(seed).stream("certificate").key(), metric);
}

SolveConfig solve_config_from(const Json& j, const std::string& where, std::uint64_t seed) {
    SolveConfig sc;
    sc.n_particles = index_or(j, "n_particles", sc.n_particles, where);
    sc.tol = num_or(j, "tol", sc.tol, where);
    sc.max_iter = static_cast<int>(index_or(j, "max_iter", sc.max_iter, where));
    const std::string mode = string_or(j, "mode", "exact_product", where);
    if (mode == "exact_product") {
        sc.mode = SolveConfig::Mode::ExactProduct;
    } else if (mode == "monte_carlo") {
        sc.mode = SolveConfig::Mode::MonteCarlo;
    } else {
        config_error(where + ".mode must be exact_product or monte_carlo");
    }
    sc.theta_atoms = index_or(j, "theta_atoms", sc.theta_atoms, where);
    sc.init_atoms = index_or(j, "init_atoms", sc.init_atoms, where);
    if (j.contains("init_point")) {
        sc.init_point = vec_from_json(j.at("init_point"), where + ".init_point");
    }
    sc.w1_max_support = index_or(j, "w1_max_support", sc.w1_max_support, where);
    sc.refuse_non_contractive =
        bool_or(j, "refuse_non_contractive", sc.refuse_non_contractive, where);
    sc.product_cap = index_or(j, "product_cap", sc.product_cap, where);
    sc.seed = seed;
    return sc;
}

constexpr std::initializer_list<const char*> kSolverKeys = {
    "n_particles", "tol",        "max_iter",       "mode",
    "theta_atoms", "init_atoms", "init_point",     "w1_max_support",
    "product_cap", "refuse_non_contractive"};

std::uint64_t effective_seed(const Options& opts, const Json& config) {
    if (opts.seed) {
        return *opts.seed;
    }
    if (config.contains("seed")) {
        if (!config.at("seed").is_number_integer()) {
            config_error("seed must be an integer");
        }
        return config.at("seed").get<std::uint64_t>();
    }
    return 0;
}

fs::path ensure_out_dir(const Options& opts) {
    fs::path out(opts.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) {
        throw ResourceError("cannot create output directory " + out.string());
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ResourceError("cannot write " + path.string());
    }
    f << content;
}

void check_top_level(const Json& config) {
    require_keys(config, "config",
                 {"seed", "system", "input", "markov_transition", "certify", "invariant", "sweep",
                  "seq", "wasserstein", "simulate"});
}

const Json kEmptyObject = Json::object();

const Json& section_or_empty(const Json& config, const char* name) {
    return config.contains(name) ? config.at(name) : kEmptyObject;
}

// --- certify ----------------------------------------------------------------

int cmd_certify(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    const Json& copts = section_or_empty(config, "certify");
    require_keys(copts, "certify", kCertifyKeys);

    ContractionReport report = [&] {
        if (system_kind(config) == "garch") {
            // Certify from the raw parameters so a non-contractive recursion
            // reports its factor instead of failing construction.
            return garch_certificate(garch_from_json(config.at("system")));
        }
        BuiltSystem bs = system_from_config(config);
        DistributionSpec theta = spec_from_json(require_section(config, "input"), "input");
        if (spec_dim(theta) != bs.system.input_dim()) {
            config_error("input dimension does not match the system");
        }
        return build_certificate(bs, theta, copts, "certify", seed);
    }();

    const std::string text = report.to_text();
    write_file(ensure_out_dir(opts) / "report.txt", text);
    out << text;
    return report.c_hat < 1.0 ? 0 : 2;
}

// --- invariant ---------------------------------------------------------------

int cmd_invariant(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    BuiltSystem bs = system_from_config(config);
    DistributionSpec theta = spec_from_json(require_section(config, "input"), "input");
    if (spec_dim(theta) != bs.system.input_dim()) {
        config_error("input dimension does not match the system");
    }

    const Json& iopts = section_or_empty(config, "invariant");
    require_keys(iopts, "invariant",
                 {"n_particles", "tol", "max_iter", "mode", "theta_atoms", "init_atoms",
                  "init_point", "w1_max_support", "product_cap", "refuse_non_contractive",
                  "certificate", "n_samples"});
    SolveConfig sc = solve_config_from(iopts, "invariant", seed);

    std::optional<ContractionReport> cert;
    const std::string cert_mode = string_or(iopts, "certificate", "auto", "invariant");
    if (cert_mode == "analytic") {
        if (bs.garch) {
            cert = garch_certificate(*bs.garch);
        } else if (bs.varma) {
            cert = varma_certificate(*bs.varma, theta, index_or(iopts, "n_samples", 4096, "invariant"),
                                     Rng(seed).stream("certificate").key());
        } else {
            config_error("invariant.certificate = analytic needs a garch or varma system");
        }
    } else if (cert_mode != "auto") {
        config_error("invariant.certificate must be auto or analytic");
    }

    SolveReport report = solve_invariant(bs.system, theta, sc, cert);

    Json j;
    j["system"] = bs.system.name();
    j["mode"] = report.mode;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["c_used"] = report.c_used;
    j["posterior_bound"] = report.posterior_bound;
    j["noise_floor"] = report.noise_floor;
    j["support_size"] = static_cast<std::int64_t>(report.fixed_point.size());
    j["gaps"] = report.gaps;
    if (report.warning) {
        j["warning"] = *report.warning;
    } else {
        j["warning"] = nullptr;
    }

    fs::path dir = ensure_out_dir(opts);
    write_file(dir / "report.json", j.dump(2) + "\n");
    write_file(dir / "measure.csv", to_table(report.fixed_point));
    out << "fixed point: " << report.fixed_point.size() << " atoms after " << report.iterations
        << " iterations, converged = " << (report.converged ? "true" : "false") << "\n"
        << "posterior bound: " << format_double(report.posterior_bound) << "\n";
    return report.converged ? 0 : 3;
}

// --- sweep -------------------------------------------------------------------

std::function<DistributionSpec(double)> family_from_json(const Json& fj,
                                                         const std::string& where) {
    if (!fj.is_object() || !fj.contains("kind") || !fj.at("kind").is_string()) {
        config_error(where + " needs a string \"kind\"");
    }
    const std::string kind = fj.at("kind").get<std::string>();
    if (kind == "uniform_shift") {
        require_keys(fj, where, {"kind", "width"});
        const double width = num_at(fj, "width", where);
        if (!(width > 0.0)) {
            config_error(where + ".width must be > 0");
        }
        return [width](double p) { return DistributionSpec(UniformSpec{p, p + width, 1}); };
    }
    if (kind == "uniform_width") {
        require_keys(fj, where, {"kind"});
        return [](double p) { return DistributionSpec(UniformSpec{0.0, p, 1}); };
    }
    if (kind == "dirac") {
        require_keys(fj, where, {"kind"});
        return [](double p) { return DistributionSpec(DiracSpec{Vec::Constant(1, p)}); };
    }
    if (kind == "gaussian_mean") {
        require_keys(fj, where, {"kind", "stddev"});
        const double stddev = num_at(fj, "stddev", where);
        return [stddev](double p) { return DistributionSpec(GaussianSpec{p, stddev, 1}); };
    }
    if (kind == "exponential_rate") {
        require_keys(fj, where, {"kind"});
        return [](double p) { return DistributionSpec(ExponentialSpec{p, 1}); };
    }
    config_error(where + ": unknown family kind \"" + kind + "\"");
}

int cmd_sweep(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    BuiltSystem bs = system_from_config(config);
    const Json& sj = require_section(config, "sweep");
    require_keys(sj, "sweep",
                 {"family", "grid", "grid_lo", "grid_hi", "n_points", "eps", "n_atoms",
                  "observable", "estimator", "washout", "full_state_w1", "solver"});

    if (!sj.contains("family")) {
        config_error("sweep needs a \"family\"");
    }
    auto family = family_from_json(sj.at("family"), "sweep.family");

    std::vector<double> grid;
    if (sj.contains("grid")) {
        const Json& gj = sj.at("grid");
        if (!gj.is_array() || gj.empty()) {
            config_error("sweep.grid must be a non-empty array");
        }
        for (const auto& v : gj) {
            if (!v.is_number()) {
                config_error("sweep.grid must contain numbers only");
            }
            grid.push_back(v.get<double>());
        }
    } else {
        const double lo = num_at(sj, "grid_lo", "sweep");
        const double hi = num_at(sj, "grid_hi", "sweep");
        const Index n = index_or(sj, "n_points", 10, "sweep");
        if (n < 1) {
            config_error("sweep.n_points must be >= 1");
        }
        for (Index i = 0; i < n; ++i) {
            grid.push_back(n == 1 ? lo
                                  : lo + (hi - lo) * static_cast<double>(i) /
                                             static_cast<double>(n - 1));
        }
    }

    SweepConfig cfg;
    cfg.eps = num_or(sj, "eps", cfg.eps, "sweep");
    cfg.n_atoms = index_or(sj, "n_atoms", cfg.n_atoms, "sweep");
    cfg.seed = seed;
    cfg.observable = index_or(sj, "observable", cfg.observable, "sweep");
    const std::string estimator = string_or(sj, "estimator", "fixed_point", "sweep");
    if (estimator == "fixed_point") {
        cfg.estimator = SweepConfig::Estimator::FixedPoint;
    } else if (estimator == "trajectory") {
        cfg.estimator = SweepConfig::Estimator::Trajectory;
    } else {
        config_error("sweep.estimator must be fixed_point or trajectory");
    }
    cfg.washout = index_or(sj, "washout", cfg.washout, "sweep");
    cfg.full_state_w1 = bool_or(sj, "full_state_w1", cfg.full_state_w1, "sweep");
    if (sj.contains("solver")) {
        require_keys(sj.at("solver"), "sweep.solver", kSolverKeys);
        cfg.solver = solve_config_from(sj.at("solver"), "sweep.solver", seed);
    } else {
        cfg.solver.seed = seed;
    }

    std::vector<SweepRow> rows = continuity_sweep(bs.system, family, grid, cfg);
    write_file(ensure_out_dir(opts) / "sweep.csv", sweep_to_csv(rows));

    std::size_t ok = 0;
    for (const SweepRow& row : rows) {
        ok += row.converged ? 1 : 0;
    }
    out << "sweep: " << rows.size() << " rows, " << ok << " converged";
    try {
        out << ", max ratio = " << format_double(lipschitz_of_s_g(rows));
    } catch (const DomainError&) {
        // no finite ratio to report
    }
    out << "\n";
    return ok == rows.size() ? 0 : 3;
}

// --- seq ---------------------------------------------------------------------

int cmd_seq(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    BuiltSystem bs = system_from_config(config);
    ProcessSpec process = process_from_config(config);
    if (spec_dim(process.marginal) != bs.system.input_dim()) {
        config_error("input dimension does not match the system");
    }

    const Json& qj = section_or_empty(config, "seq");
    require_keys(qj, "seq",
                 {"horizon", "n_windows", "stride", "washout", "n_particles", "max_support",
                  "observable", "certify"});
    const Index horizon = index_or(qj, "horizon", 8, "seq");
    const Index n_windows = index_or(qj, "n_windows", 256, "seq");
    const Index stride = index_or(qj, "stride", 1, "seq");
    const Index washout = index_or(qj, "washout", 0, "seq");
    const Index n_particles = index_or(qj, "n_particles", 2048, "seq");
    const Index max_support = index_or(qj, "max_support", 1024, "seq");
    const Index observable = index_or(qj, "observable", 0, "seq");
    const Json& copts = section_or_empty(qj, "certify");
    require_keys(copts, "seq.certify", kCertifyKeys);
    if (observable < 0 || observable >= bs.system.state_dim()) {
        config_error("seq.observable out of range");
    }

    ContractionReport cert = build_certificate(bs, process.marginal, copts, "seq.certify", seed);
    WindowMeasure m =
        stationary_window_measure(bs.system, process, horizon, n_windows, cert,
                                  Rng(seed).stream("windows").key(), washout, stride);
    const double shift_gap = stationarity_gap(m, max_support, Rng(seed).stream("gap").key());
    WindowMeasure image =
        foias_seq_apply(bs.system, process, m, n_particles, Rng(seed).stream("image").key());
    const double invariance_gap = window_law_gap_dual(m, image);

    // Newest-element observable marginal of the window law against the same
    // marginal of an independently seeded stationary state cloud.
    WindowMeasure filt =
        stationary_window_measure(bs.system, process, 1, n_windows, cert,
                                  Rng(seed).stream("filter").key(), washout, 1);
    auto column_measure = [](const EmpiricalMeasure& mu, Index col) {
        Mat c(mu.size(), 1);
        c.col(0) = mu.support().col(col);
        return EmpiricalMeasure(std::move(c), mu.weights());
    };
    const double filter_gap = w1_exact_1d(
        column_measure(m.measure, (horizon - 1) * m.elem_dim + observable),
        column_measure(filt.measure, observable));

    Json j;
    j["system"] = bs.system.name();
    j["horizon"] = static_cast<std::int64_t>(horizon);
    j["elem_dim"] = static_cast<std::int64_t>(m.elem_dim);
    j["n_windows"] = static_cast<std::int64_t>(m.measure.size());
    j["stride"] = static_cast<std::int64_t>(m.stride);
    j["c_hat"] = cert.c_hat;
    j["stationarity_gap"] = shift_gap;
    j["invariance_gap"] = invariance_gap;
    j["filter_gap"] = filter_gap;
    write_file(ensure_out_dir(opts) / "report.json", j.dump(2) + "\n");
    out << "window law: " << m.measure.size() << " windows of horizon " << horizon << "\n"
        << "stationarity gap: " << format_double(shift_gap) << "\n"
        << "invariance gap: " << format_double(invariance_gap) << "\n"
        << "filter gap: " << format_double(filter_gap) << "\n";
    return 0;
}

// --- wasserstein ---------------------------------------------------------------

EmpiricalMeasure measure_from_source(const Json& j, const std::string& where,
                                     std::uint64_t seed) {
    require_keys(j, where, {"points", "weights", "table", "spec", "n_atoms", "seed"});
    if (j.contains("table")) {
        const std::string path = j.at("table").get<std::string>();
        std::ifstream in(path);
        if (!in) {
            config_error(where + ": cannot open table " + path);
        }
        std::ostringstream text;
        text << in.rdbuf();
        return measure_from_table(text.str());
    }
    if (j.contains("points")) {
        Mat points = mat_from_json(j.at("points"), where + ".points");
        Vec weights = j.contains("weights")
                          ? vec_from_json(j.at("weights"), where + ".weights")
                          : Vec::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
        return EmpiricalMeasure(std::move(points), std::move(weights));
    }
    if (j.contains("spec")) {
        DistributionSpec spec = spec_from_json(j.at("spec"), where + ".spec");
        const Index n = index_or(j, "n_atoms", 1024, where);
        const std::uint64_t s = j.contains("seed")
                                    ? static_cast<std::uint64_t>(index_or(j, "seed", 0, where))
                                    : Rng(seed).stream(where).key();
        return discretize(spec, n, s);
    }
    config_error(where + " needs points, a table, or a spec");
}

int cmd_wasserstein(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    const Json& wj = require_section(config, "wasserstein");
    require_keys(wj, "wasserstein",
                 {"mu", "nu", "method", "epsilon", "max_iters", "max_support", "pair_cap",
                  "metric"});
    if (!wj.contains("mu") || !wj.contains("nu")) {
        config_error("wasserstein needs \"mu\" and \"nu\"");
    }
    EmpiricalMeasure mu = measure_from_source(wj.at("mu"), "wasserstein.mu", seed);
    EmpiricalMeasure nu = measure_from_source(wj.at("nu"), "wasserstein.nu", seed);
    if (mu.dim() != nu.dim()) {
        config_error("mu and nu have different dimensions");
    }
    Metric metric = metric_from_json(wj, "metric", "wasserstein");
    const std::string method = string_or(wj, "method", "auto", "wasserstein");

    double value = 0.0;
    if (method == "auto") {
        value = w1_auto(mu, nu, metric, index_or(wj, "max_support", 512, "wasserstein"),
                        Rng(seed).stream("wasserstein").key());
    } else if (method == "exact") {
        value = w1_exact(mu, nu, metric, index_or(wj, "pair_cap", kDefaultPairCap, "wasserstein"))
                    .cost;
    } else if (method == "exact_1d") {
        value = w1_exact_1d(mu, nu);
    } else if (method == "entropic") {
        EntropicResult r =
            w1_entropic(mu, nu, metric, num_at(wj, "epsilon", "wasserstein"),
                        static_cast<int>(index_or(wj, "max_iters", 20000, "wasserstein")));
        if (!r.converged) {
            throw NumericError("entropic solver did not converge");
        }
        value = r.plan.cost;
    } else {
        config_error("wasserstein.method must be auto, exact, exact_1d, or entropic");
    }
    out << format_double(value, 12) << "\n";
    return 0;
}

// --- simulate ------------------------------------------------------------------

int cmd_simulate(const Json& config, const Options& opts, std::ostream& out) {
    const std::uint64_t seed = effective_seed(opts, config);
    BuiltSystem bs = system_from_config(config);
    ProcessSpec process = process_from_config(config);
    if (spec_dim(process.marginal) != bs.system.input_dim()) {
        config_error("input dimension does not match the system");
    }

    const Json& mj = require_section(config, "simulate");
    require_keys(mj, "simulate", {"length", "washout", "x0"});
    const Index length = index_or(mj, "length", 0, "simulate");
    if (length < 1) {
        config_error("simulate.length must be >= 1");
    }
    const Index washout = index_or(mj, "washout", 0, "simulate");
    if (washout < 0) {
        config_error("simulate.washout must be >= 0");
    }
    Vec x0;
    if (mj.contains("x0")) {
        x0 = vec_from_json(mj.at("x0"), "simulate.x0");
    } else if (bs.system.state_bounds()) {
        x0 = (bs.system.state_bounds()->lo + bs.system.state_bounds()->hi) / 2.0;
    } else {
        x0 = Vec::Zero(bs.system.state_dim());
    }
    if (x0.size() != bs.system.state_dim()) {
        config_error("simulate.x0 dimension does not match the state");
    }

    Mat u_path = sample_path(process, washout + length, Rng(seed).stream("path").key());
    Mat states = washout_trajectory(bs.system, u_path, x0, washout);

    std::string csv;
    for (Index c = 0; c < states.cols(); ++c) {
        csv += (c == 0 ? "x" : ",x") + std::to_string(c);
    }
    csv += '\n';
    for (Index r = 0; r < states.rows(); ++r) {
        for (Index c = 0; c < states.cols(); ++c) {
            if (c > 0) {
                csv += ',';
            }
            csv += format_double(states(r, c));
        }
        csv += '\n';
    }
    fs::path dir = ensure_out_dir(opts);
    write_file(dir / "states.csv", csv);
    out << "wrote " << states.rows() << " states to " << (dir / "states.csv").string() << "\n";
    return 0;
}

} // namespace

int run_command(const std::string& command, const Options& opts, std::ostream& out,
                std::ostream& err) {
    try {
        Json config = load_config(opts.config_path);
        check_top_level(config);
        if (command == "certify") {
            return cmd_certify(config, opts, out);
        }
        if (command == "invariant") {
            return cmd_invariant(config, opts, out);
        }
        if (command == "sweep") {
            return cmd_sweep(config, opts, out);
        }
        if (command == "seq") {
            return cmd_seq(config, opts, out);
        }
        if (command == "wasserstein") {
            return cmd_wasserstein(config, opts, out);
        }
        if (command == "simulate") {
            return cmd_simulate(config, opts, out);
        }
        err << "unknown command \"" << command << "\"\n";
        return 1;
    } catch (const NonContractionError& e) {
        err << "contraction premise violated: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const Json::exception& e) {
        err << "config: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"transport toolkit for driven dynamical systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_value = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"certify", "estimate or certify the mean contraction factor"},
        {"invariant", "solve for the invariant state measure"},
        {"sweep", "input-measure continuity sweep over a parameter grid"},
        {"seq", "stationary window law and its shift defect"},
        {"wasserstein", "distance between two finitely supported measures"},
        {"simulate", "roll the system along a sampled input path"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed_value, "sampling seed (overrides the config)");
        sub->add_option("--out", out_dir, "artifact directory");
    }

    // CLI11 consumes the vector form back to front.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    Options opts;
    opts.config_path = config_path;
    opts.out_dir = out_dir;
    if (sub->count("--seed") > 0) {
        opts.seed = seed_value;
    }
    return run_command(sub->get_name(), opts, out, err);
}

} // namespace rct::cli
