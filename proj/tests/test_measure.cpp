#include "rct/measure.hpp"

#include "rct/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace rct;

namespace {

Mat col(std::initializer_list<double> xs) {
    Mat m(static_cast<Index>(xs.size()), 1);
    Index i = 0;
    for (double x : xs) {
        m(i++, 0) = x;
    }
    return m;
}

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

} // namespace

TEST_CASE("measure construction validates") {
    CHECK_THROWS_AS(EmpiricalMeasure(Mat(0, 1), Vec(0)), ShapeError);
    CHECK_THROWS_AS(EmpiricalMeasure(col({0, 1}), vec({0.5})), ShapeError);
    CHECK_THROWS_AS(EmpiricalMeasure(col({0, 1}), vec({-0.1, 1.1})), DomainError);
    CHECK_THROWS_AS(EmpiricalMeasure(col({0, 1}), vec({0.5, 0.6})), DomainError);
    Mat bad = col({0, 1});
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(EmpiricalMeasure(bad, vec({0.5, 0.5})), DomainError);

    // within the sum slack the weights are renormalized
    EmpiricalMeasure ok(col({0, 1}), vec({0.5, 0.5 + 5e-10}));
    CHECK(ok.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));

    // weights at or below the floor are dropped
    EmpiricalMeasure dropped(col({0, 1, 2}), vec({0.5, 1e-16, 0.5}));
    CHECK(dropped.size() == 2);
}

TEST_CASE("dirac and equal weights") {
    EmpiricalMeasure d = EmpiricalMeasure::dirac(vec({1.5, -2.0}));
    CHECK(d.size() == 1);
    CHECK(d.dim() == 2);
    CHECK(d.weights()(0) == 1.0);
    CHECK(d.atom(0)(1) == -2.0);

    EmpiricalMeasure e = EmpiricalMeasure::equal_weights(col({3, 1, 2}));
    CHECK(e.size() == 3);
    CHECK(e.weights()(1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("merged sums coinciding atoms in lexicographic order") {
    EmpiricalMeasure m(col({2, 0, 2}), vec({0.25, 0.5, 0.25}));
    EmpiricalMeasure g = m.merged();
    REQUIRE(g.size() == 2);
    CHECK(g.support()(0, 0) == 0.0);
    CHECK(g.support()(1, 0) == 2.0);
    CHECK(g.weights()(0) == doctest::Approx(0.5));
    CHECK(g.weights()(1) == doctest::Approx(0.5));
}

TEST_CASE("quantile is the left-continuous generalized inverse") {
    EmpiricalMeasure m(col({0, 1, 2}), vec({0.25, 0.5, 0.25}));
    CHECK(m.quantile(0.0) == 0.0);
    CHECK(m.quantile(0.25) == 0.0);
    CHECK(m.quantile(0.26) == 1.0);
    CHECK(m.quantile(0.75) == 1.0);
    CHECK(m.quantile(0.76) == 2.0);
    CHECK(m.quantile(1.0) == 2.0);
    CHECK_THROWS_AS(m.quantile(1.5), DomainError);
    EmpiricalMeasure flat(Mat::Zero(1, 2), vec({1.0}));
    CHECK_THROWS_AS(flat.quantile(0.5), ShapeError);
}

TEST_CASE("systematic resample") {
    // no-op on an already small equal-weight measure
    EmpiricalMeasure small = EmpiricalMeasure::equal_weights(col({5, 7, 9}));
    CHECK(systematic_resample(small, 3, 1) == small);
    CHECK(systematic_resample(small, 10, 1) == small);

    // exact proportions survive: weights 1/4 and 3/4 resampled to 4 atoms
    EmpiricalMeasure skew(col({0, 1}), vec({0.25, 0.75}));
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
        EmpiricalMeasure r = systematic_resample(skew, 4, seed);
        REQUIRE(r.size() == 4);
        Index zeros = 0;
        for (Index i = 0; i < 4; ++i) {
            zeros += r.support()(i, 0) == 0.0 ? 1 : 0;
            CHECK(r.weights()(i) == doctest::Approx(0.25));
        }
        CHECK(zeros == 1);
    }

    // deterministic in the seed
    EmpiricalMeasure big(col({0, 1, 2, 3, 4}), vec({0.1, 0.3, 0.2, 0.25, 0.15}));
    CHECK(systematic_resample(big, 3, 9) == systematic_resample(big, 3, 9));
    CHECK_THROWS_AS(systematic_resample(big, 0, 1), DomainError);
}

TEST_CASE("product measure concatenates coordinates theta-major") {
    EmpiricalMeasure theta(col({10, 20}), vec({0.3, 0.7}));
    EmpiricalMeasure mu(col({1, 2}), vec({0.4, 0.6}));
    EmpiricalMeasure p = product_measure(theta, mu);
    REQUIRE(p.size() == 4);
    REQUIRE(p.dim() == 2);
    CHECK(p.support()(0, 0) == 10.0);
    CHECK(p.support()(0, 1) == 1.0);
    CHECK(p.support()(1, 0) == 10.0);
    CHECK(p.support()(1, 1) == 2.0);
    CHECK(p.support()(3, 0) == 20.0);
    CHECK(p.support()(3, 1) == 2.0);
    CHECK(p.weights()(0) == doctest::Approx(0.12));
    CHECK(p.weights()(3) == doctest::Approx(0.42));
    CHECK_THROWS_AS(product_measure(theta, mu, 3), ResourceError);
}

TEST_CASE("spec validation and dimensions") {
    CHECK(spec_dim(DistributionSpec(UniformSpec{0, 1, 3})) == 3);
    CHECK(spec_dim(DistributionSpec(DiracSpec{vec({1, 2})})) == 2);
    CHECK(spec_is_finite(DistributionSpec(DiracSpec{vec({1})})));
    CHECK_FALSE(spec_is_finite(DistributionSpec(ExponentialSpec{1.0, 1})));
    CHECK_THROWS_AS(validate_spec(DistributionSpec(UniformSpec{1, 1, 1})), DomainError);
    CHECK_THROWS_AS(validate_spec(DistributionSpec(ExponentialSpec{-2.0, 1})), DomainError);
    CHECK_THROWS_AS(validate_spec(DistributionSpec(GaussianSpec{0, 0, 1})), DomainError);
    CHECK_THROWS_AS(validate_spec(DistributionSpec(UniformSpec{0, 1, 0})), DomainError);
}

TEST_CASE("discretize passes finite specs through and couples shared seeds") {
    Mat pts = col({3, 1});
    EmpiricalMeasure direct(pts, vec({0.25, 0.75}));
    EmpiricalMeasure d = discretize(DistributionSpec(FiniteAtomsSpec{pts, vec({0.25, 0.75})}),
                                    64, 7);
    CHECK(d == direct);

    // inverse-CDF sampling: equal seeds couple family members atom by atom
    EmpiricalMeasure a = discretize(DistributionSpec(UniformSpec{0.0, 1.0, 1}), 64, 123);
    EmpiricalMeasure b = discretize(DistributionSpec(UniformSpec{0.01, 1.01, 1}), 64, 123);
    REQUIRE(a.size() == 64);
    REQUIRE(b.size() == 64);
    for (Index i = 0; i < 64; ++i) {
        CHECK(b.support()(i, 0) - a.support()(i, 0) == doctest::Approx(0.01).epsilon(1e-12));
    }

    // moments sane at moderate n
    EmpiricalMeasure e = discretize(DistributionSpec(ExponentialSpec{2.0, 1}), 20000, 5);
    double mean = (e.support().col(0).transpose() * e.weights()).value();
    CHECK(mean == doctest::Approx(0.5).epsilon(0.05));
    CHECK(e.support().col(0).minCoeff() >= 0.0);
}

TEST_CASE("iid paths are stationary draws") {
    ProcessSpec p{DistributionSpec(UniformSpec{0, 1, 2}), IidDependence{}};
    validate_process(p);
    Mat path = sample_path(p, 50, 3);
    CHECK(path.rows() == 50);
    CHECK(path.cols() == 2);
    CHECK(path.minCoeff() >= 0.0);
    CHECK(path.maxCoeff() < 1.0);
    CHECK(sample_path(p, 50, 3) == path);
    CHECK(sample_path(p, 50, 4) != path);
}

TEST_CASE("markov dependence follows the transition matrix exactly") {
    Mat t(2, 2);
    t << 0, 1, 1, 0; // alternate deterministically
    ProcessSpec p{DistributionSpec(FiniteAtomsSpec{col({0, 1}), vec({0.5, 0.5})}),
                  FiniteMarkovDependence{t}};
    validate_process(p);
    Mat path = sample_path(p, 40, 11);
    for (Index k = 0; k + 1 < 40; ++k) {
        CHECK(path(k + 1, 0) == 1.0 - path(k, 0));
    }

    // non-stationary marginal is refused
    ProcessSpec bad{DistributionSpec(FiniteAtomsSpec{col({0, 1}), vec({0.3, 0.7})}),
                    FiniteMarkovDependence{t}};
    CHECK_THROWS_AS(validate_process(bad), ContractViolation);

    // markov needs a finite marginal
    ProcessSpec cont{DistributionSpec(UniformSpec{0, 1, 1}), FiniteMarkovDependence{t}};
    CHECK_THROWS_AS(validate_process(cont), ContractViolation);
}

TEST_CASE("table round trip is bitwise") {
    Rng rng(17);
    Mat support(5, 3);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 3; ++j) {
            support(i, j) = rng.next_normal() * std::exp(rng.next_uniform(-8, 8));
        }
    }
    Vec w(5);
    for (Index i = 0; i < 5; ++i) {
        w(i) = 0.1 + rng.next_double();
    }
    w /= w.sum();
    EmpiricalMeasure m(support, w);
    std::string table = to_table(m);
    CHECK(table.substr(0, table.find('\n')) == "x0,x1,x2,weight");
    EmpiricalMeasure back = measure_from_table(table);
    CHECK(back == m);
    CHECK_THROWS_AS(measure_from_table("x0\n1\n"), DomainError);
    CHECK_THROWS_AS(measure_from_table(""), DomainError);
}
