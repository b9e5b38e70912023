#include "rct/foias.hpp"

#include "rct/errors.hpp"
#include "rct/rng.hpp"
#include "rct/transport.hpp"

#include "doctest.h"

#include <cmath>

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

TEST_CASE("pushforward merges coinciding images") {
    EmpiricalMeasure mu(col({-1, 0.5, 1}), vec({0.25, 0.5, 0.25}));
    EmpiricalMeasure img = frobenius_perron(
        [](const Vec& x) { return Vec(x.array().square().matrix()); }, mu);
    REQUIRE(img.size() == 2);
    CHECK(img.support()(0, 0) == 0.25);
    CHECK(img.support()(1, 0) == 1.0);
    CHECK(img.weights()(0) == doctest::Approx(0.5));
    CHECK(img.weights()(1) == doctest::Approx(0.5));
}

TEST_CASE("transfer operator on finite supports by hand") {
    DrivenSystem lin = make_linear_scalar(0.5);
    EmpiricalMeasure theta(col({0, 1}), vec({0.5, 0.5}));
    EmpiricalMeasure mu(col({0, 2}), vec({0.5, 0.5}));
    EmpiricalMeasure img = foias_exact(lin, theta, mu);
    REQUIRE(img.size() == 3);
    CHECK(img.support()(0, 0) == 0.0);
    CHECK(img.support()(1, 0) == 1.0);
    CHECK(img.support()(2, 0) == 2.0);
    CHECK(img.weights()(0) == doctest::Approx(0.25));
    CHECK(img.weights()(1) == doctest::Approx(0.5));
    CHECK(img.weights()(2) == doctest::Approx(0.25));
}

TEST_CASE("transfer operator equals the product-measure pushforward") {
    DrivenSystem esn = make_esn(3, 2, 5, 0.8);
    Rng rng(40);
    Mat tsup(4, 2), msup(5, 3);
    for (Index i = 0; i < 4; ++i) {
        tsup(i, 0) = rng.next_uniform(0, 1);
        tsup(i, 1) = rng.next_uniform(0, 1);
    }
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 3; ++j) {
            msup(i, j) = rng.next_uniform(-1, 1);
        }
    }
    Vec tw(4), mw(5);
    for (Index i = 0; i < 4; ++i) {
        tw(i) = 0.1 + rng.next_double();
    }
    for (Index i = 0; i < 5; ++i) {
        mw(i) = 0.1 + rng.next_double();
    }
    EmpiricalMeasure theta(tsup, tw / tw.sum());
    EmpiricalMeasure mu(msup, mw / mw.sum());

    EmpiricalMeasure direct = foias_exact(esn, theta, mu);
    EmpiricalMeasure via_product = frobenius_perron(
        [&esn](const Vec& z) { return esn.apply(z.head(2), z.tail(3)); },
        product_measure(theta, mu));
    CHECK(direct == via_product);
}

TEST_CASE("monte carlo image approximates the exact image") {
    DrivenSystem lin = make_linear_scalar(0.5);
    // delta_0 pushed through g(u, x) = 0.5 x + u with U(0,1) inputs is U(0,1)
    EmpiricalMeasure mu = EmpiricalMeasure::dirac(Vec::Zero(1));
    EmpiricalMeasure img =
        foias_mc(lin, DistributionSpec(UniformSpec{0, 1, 1}), mu, 20000, 13);
    REQUIRE(img.size() == 20000);
    EmpiricalMeasure ref = discretize(DistributionSpec(UniformSpec{0, 1, 1}), 20000, 999);
    CHECK(w1_exact_1d(img, ref) < 0.02);
    CHECK(foias_mc(lin, DistributionSpec(UniformSpec{0, 1, 1}), mu, 500, 13) ==
          foias_mc(lin, DistributionSpec(UniformSpec{0, 1, 1}), mu, 500, 13));
}

TEST_CASE("transfer operator validates shapes and caps") {
    DrivenSystem lin = make_linear_scalar(0.5);
    EmpiricalMeasure theta2(Mat::Zero(1, 2), vec({1.0}));
    EmpiricalMeasure mu(col({0, 1}), vec({0.5, 0.5}));
    CHECK_THROWS_AS(foias_exact(lin, theta2, mu), ShapeError);
    CHECK_THROWS_AS(foias_mc(lin, DistributionSpec(UniformSpec{0, 1, 2}), mu, 100, 1),
                    ShapeError);
    EmpiricalMeasure theta(col({0, 1, 2}), vec({0.3, 0.3, 0.4}));
    CHECK_THROWS_AS(foias_exact(lin, theta, mu, 5), ResourceError);
}

TEST_CASE("compress reduces support deterministically") {
    Rng rng(21);
    Mat support(100, 2);
    for (Index i = 0; i < 100; ++i) {
        support(i, 0) = rng.next_normal();
        support(i, 1) = rng.next_normal();
    }
    EmpiricalMeasure mu = EmpiricalMeasure::equal_weights(support);
    CHECK(compress(mu, 100, 3) == mu);
    CHECK(compress(mu, 200, 3) == mu);
    EmpiricalMeasure small = compress(mu, 32, 3);
    CHECK(small.size() == 32);
    CHECK(small.weights()(0) == doctest::Approx(1.0 / 32));
    CHECK(compress(mu, 32, 3) == small);
}

TEST_CASE("wellposedness warning covers the divergence cases") {
    DrivenSystem lin = make_linear_scalar(0.5); // unbounded states
    DrivenSystem prod = make_product_system();  // compact box

    CHECK(foias_wellposedness_warning(prod, std::nullopt, std::nullopt) == std::nullopt);
    CHECK(foias_wellposedness_warning(lin, 1.0, std::nullopt) == std::nullopt);
    CHECK(foias_wellposedness_warning(lin, std::nullopt, 0.5) == std::nullopt);
    auto warning = foias_wellposedness_warning(lin, std::nullopt, std::nullopt);
    REQUIRE(warning.has_value());
    CHECK_FALSE(warning->empty());
}
