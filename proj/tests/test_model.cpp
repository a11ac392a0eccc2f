#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nsbm/model.hpp"
#include "nsbm/rng.hpp"
#include "helpers.hpp"

using namespace nsbm;
using nsbm_tests::theta_single;
using nsbm_tests::theta_two_group;

TEST_CASE("validate_theta accepts the two-group benchmark parameter") {
    CHECK_NOTHROW(validate_theta(theta_two_group()));
}

TEST_CASE("validate_theta names the first violated invariant") {
    ModelParams t = theta_two_group();
    t.pi = {0.6, 0.5};
    CHECK_THROWS_WITH_AS(validate_theta(t), "pi not a probability vector", InvalidParams);

    t = theta_two_group();
    t.mu.set(0, 0, 0.0);
    t.sigma.set(0, 0, 1.0);
    CHECK_THROWS_WITH_AS(validate_theta(t), "null equals alternative at (1,1)",
                         InvalidParams);

    t = theta_two_group();
    t.sigma.set(0, 1, -1.0);
    CHECK_THROWS_AS(validate_theta(t), InvalidParams);
}

TEST_CASE("gaussian densities") {
    CHECK(null_density(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(alt_density(2.0, 2.0, 0.7) == doctest::Approx(null_density(0.0, 0.7)).epsilon(1e-12));
    // (1/2) phi(0.5)
    CHECK(alt_density(0.0, 1.0, 2.0) == doctest::Approx(0.17603266338214976).epsilon(1e-10));
}

TEST_CASE("l_value closed-form points") {
    ModelParams t = theta_single(0.5, 2.0, 1.0);
    CHECK(l_value(1.0, 0, 0, t) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(l_value(10.0, 0, 0, t) ==
          doctest::Approx(1.0 / (1.0 + std::exp(18.0))).epsilon(1e-9));

    ModelParams t2 = theta_single(0.3, 1.0, 2.0);
    const double g0 = null_density(0.0, 1.0);
    const double g1 = alt_density(0.0, 1.0, 2.0);
    const double expect = 0.7 * g0 / (0.7 * g0 + 0.3 * g1);
    CHECK(l_value(0.0, 0, 0, t2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(l_value(0.0, 0, 0, t2) == doctest::Approx(0.8410).epsilon(5e-4));
}

TEST_CASE("l_value is in (0,1) and monotone when sigma = sigma0, mu > 0") {
    ModelParams t = theta_single(0.4, 1.5, 1.0);
    double prev = 1.0;
    for (double x = -50.0; x <= 50.0; x += 0.25) {
        const double l = l_value(x, 0, 0, t);
        CHECK(l > 0.0);
        CHECK(l < 1.0);
        CHECK(l < prev + 1e-15);
        prev = l;
    }
}

TEST_CASE("rho complements l_value") {
    ModelParams t = theta_two_group(0.7, 1.3, 0.8);
    Rng rng = make_rng(11);
    std::normal_distribution<double> norm(0.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = norm(rng);
        const int q = k % 2, l = (k / 2) % 2;
        CHECK(rho_value(x, q, l, t) + l_value(x, q, l, t) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pi0_pi1 matches the benchmark values") {
    auto [p0, p1] = pi0_pi1(theta_two_group(1.0));
    CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.5).epsilon(1e-12));

    std::tie(p0, p1) = pi0_pi1(theta_two_group(0.5));
    CHECK(p0 == doctest::Approx(0.75).epsilon(1e-12));

    std::tie(p0, p1) = pi0_pi1(theta_two_group(0.2));
    CHECK(p0 == doctest::Approx(0.9).epsilon(1e-12));

    std::tie(p0, p1) = pi0_pi1(theta_single(0.3, 2.0, 1.0));
    CHECK(p0 == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("p_value basics") {
    CHECK(p_value(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p_value(1.959964, 1.0) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(p_value(-2.3, 1.7) == doctest::Approx(p_value(2.3, 1.7)).epsilon(1e-15));
    double prev = 1.0;
    for (double x = 0.0; x < 10.0; x += 0.05) {
        const double p = p_value(x, 1.0);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("p-values are uniform under the null") {
    const int N = 100000;
    Rng rng = make_rng(7);
    std::normal_distribution<double> norm(0.0, 1.3);
    std::vector<double> p(N);
    for (int i = 0; i < N; ++i) p[i] = p_value(norm(rng), 1.3);
    std::sort(p.begin(), p.end());
    double sup = 0.0;
    for (int i = 0; i < N; ++i) {
        const double ecdf_hi = static_cast<double>(i + 1) / N;
        const double ecdf_lo = static_cast<double>(i) / N;
        sup = std::max({sup, std::abs(ecdf_hi - p[i]), std::abs(ecdf_lo - p[i])});
    }
    CHECK(sup < 0.01);
}

TEST_CASE("l_value is the posterior no-edge probability") {
    // simulate (A, X) at one cell and compare binned frequencies
    const ModelParams t = theta_single(0.35, 1.2, 0.8);
    const int N = 1000000;
    Rng rng = make_rng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    const double lo = -3.0, hi = 3.0, width = 0.1;
    const int bins = static_cast<int>((hi - lo) / width);
    std::vector<double> count(bins, 0.0), nulls(bins, 0.0);
    for (int k = 0; k < N; ++k) {
        const bool edge = unif(rng) < 0.35;
        const double x = edge ? 1.2 + 0.8 * norm(rng) : norm(rng);
        if (x < lo || x >= hi) continue;
        const int b = static_cast<int>((x - lo) / width);
        count[b] += 1.0;
        nulls[b] += edge ? 0.0 : 1.0;
    }
    for (int b = 0; b < bins; ++b) {
        if (count[b] < 1000) continue;  // skip ill-estimated tail bins
        const double center = lo + (b + 0.5) * width;
        CHECK(std::abs(nulls[b] / count[b] - l_value(center, 0, 0, t)) < 0.02);
    }
}
