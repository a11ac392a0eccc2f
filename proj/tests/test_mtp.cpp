#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nsbm/mtp.hpp"
#include "nsbm/rng.hpp"
#include "nsbm/sampler.hpp"
#include "helpers.hpp"

using namespace nsbm;
using nsbm_tests::theta_single;
using nsbm_tests::theta_two_group;

namespace {

ModelParams random_theta_single(Rng& rng, bool force_small_sigma = false) {
    std::uniform_real_distribution<double> uw(0.1, 0.9), umu(-2.0, 2.0), us(0.3, 2.0);
    const double sigma = force_small_sigma ? std::uniform_real_distribution<double>(
                                                 0.3, 0.95)(rng)
                                           : us(rng);
    return theta_single(uw(rng), umu(rng), sigma, 1.0);
}

DecisionMatrix bh_bruteforce(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::size_t k_hat = 0;
    for (std::size_t k = 1; k <= m; ++k)
        if (sorted[k - 1] <= alpha * static_cast<double>(k) / static_cast<double>(m))
            k_hat = k;
    DecisionMatrix dec;
    dec.rejected.assign(m, 0);
    if (k_hat > 0)
        for (std::size_t e = 0; e < m; ++e)
            dec.rejected[e] =
                p[e] <= alpha * static_cast<double>(k_hat) / static_cast<double>(m) ? 1 : 0;
    return dec;
}

}  // namespace

TEST_CASE("abc coefficients closed forms") {
    // sigma = sigma0: a vanishes
    ModelParams t = theta_single(0.4, 1.3, 1.0);
    CHECK(abc_coefficients(0, 0, t, 0.3)[0] == doctest::Approx(0.0));

    // mu=1, sigma=sigma0=1, w=t=0.5 -> (0, -2, 1), region {x >= 0.5}
    t = theta_single(0.5, 1.0, 1.0);
    auto [a, b, c] = abc_coefficients(0, 0, t, 0.5);
    CHECK(a == doctest::Approx(0.0));
    CHECK(b == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    RejectionRegion r = rejection_region(0, 0, t, 0.5);
    REQUIRE(r.intervals.size() == 1);
    CHECK(r.intervals[0].lo == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isinf(r.intervals[0].hi));

    // mu=0, sigma=2, sigma0=1, w=t=0.5 -> (-0.75, 0, 2 log 2), |x| >= 1.3596
    t = theta_single(0.5, 0.0, 2.0);
    auto [a2, b2, c2] = abc_coefficients(0, 0, t, 0.5);
    CHECK(a2 == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(b2 == doctest::Approx(0.0));
    CHECK(c2 == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    r = rejection_region(0, 0, t, 0.5);
    REQUIRE(r.intervals.size() == 2);
    CHECK(r.intervals[0].hi == doctest::Approx(-1.3596).epsilon(1e-4));
    CHECK(r.intervals[1].lo == doctest::Approx(1.3596).epsilon(1e-4));

    CHECK_THROWS(abc_coefficients(0, 0, t, 0.0));
    CHECK_THROWS(abc_coefficients(0, 0, t, 1.0));
}

TEST_CASE("rejection_region edge cases") {
    const ModelParams t = theta_single(0.5, 0.0, 2.0);
    CHECK(rejection_region(0, 0, t, 0.0).intervals.empty());
    RejectionRegion all = rejection_region(0, 0, t, 1.0);
    REQUIRE(all.intervals.size() == 1);
    CHECK(all.contains(-1e12));
    CHECK(all.contains(1e12));

    // a > 0 with no real roots: empty region (t tiny, sigma < sigma0)
    const ModelParams small = theta_single(0.5, 0.0, 0.5);
    CHECK(rejection_region(0, 0, small, 1e-6).intervals.empty());
}

TEST_CASE("rejection region matches the l_value sublevel set on a grid") {
    Rng rng = make_rng(314);
    std::uniform_real_distribution<double> ut(0.02, 0.98);
    for (int rep = 0; rep < 100; ++rep) {
        const ModelParams t = random_theta_single(rng);
        const double thr = ut(rng);
        const RejectionRegion region = rejection_region(0, 0, t, thr);
        for (int g = 0; g < 10000; ++g) {
            const double x = -8.0 + 16.0 * g / 9999.0;
            const bool in = region.contains(x);
            const double lv = l_value(x, 0, 0, t);
            if (std::abs(lv - thr) < 1e-9) continue;  // boundary ties
            CHECK(in == (lv <= thr));
            if (in != (lv <= thr)) return;  // avoid assertion spam
        }
    }
}

TEST_CASE("q0_q1 closed forms and Monte Carlo spot check") {
    // region {x >= 0.5} under N(0,1) / N(1,1)
    const ModelParams t = theta_single(0.5, 1.0, 1.0);
    auto [q0, q1] = q0_q1(0.5, 0, 0, t, t);
    CHECK(q0 == doctest::Approx(0.30854).epsilon(1e-4));
    CHECK(q1 == doctest::Approx(0.69146).epsilon(1e-4));

    std::tie(q0, q1) = q0_q1(0.0, 0, 0, t, t);
    CHECK(q0 == 0.0);
    CHECK(q1 == 0.0);
    std::tie(q0, q1) = q0_q1(1.0, 0, 0, t, t);
    CHECK(q0 == 1.0);
    CHECK(q1 == 1.0);

    // small Monte Carlo oracle over the three sign cases of a
    Rng rng = make_rng(271);
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (int rep = 0; rep < 6; ++rep) {
        const ModelParams theta = random_theta_single(rng);
        const ModelParams prime = random_theta_single(rng);
        const double thr = ut(rng);
        auto [c0, c1] = q0_q1(thr, 0, 0, prime, theta);
        const RejectionRegion region = rejection_region(0, 0, theta, thr);
        const int N = 200000;
        int in0 = 0, in1 = 0;
        for (int k = 0; k < N; ++k) {
            if (region.contains(prime.sigma0 * norm(rng))) ++in0;
            if (region.contains(prime.mu(0, 0) + prime.sigma(0, 0) * norm(rng))) ++in1;
        }
        CHECK(std::abs(c0 - static_cast<double>(in0) / N) < 5e-3);
        CHECK(std::abs(c1 - static_cast<double>(in1) / N) < 5e-3);
    }
}

TEST_CASE("t1_t2 boundaries") {
    // sigma = sigma0 -> (0,1)
    auto [a, b] = t1_t2(0, 0, theta_single(0.4, 1.0, 1.0));
    CHECK(a == 0.0);
    CHECK(b == 1.0);

    // w=0.5, sigma0=1, sigma=2, mu=0 -> t0 = 2/3, increasing on (0, 2/3)
    std::tie(a, b) = t1_t2(0, 0, theta_single(0.5, 0.0, 2.0));
    CHECK(a == 0.0);
    CHECK(b == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // sigma < sigma0: (t0, 1); q0/q1 are 0 below t1 and 1 above t2
    const ModelParams small = theta_single(0.3, 0.8, 0.6);
    std::tie(a, b) = t1_t2(0, 0, small);
    CHECK(a > 0.0);
    CHECK(b == 1.0);
    for (double t = 0.01; t < a - 1e-6; t += a / 20) {
        auto [q0, q1] = q0_q1(t, 0, 0, small, small);
        CHECK(q0 == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(q1 == doctest::Approx(0.0).epsilon(1e-9));
    }
    const ModelParams big = theta_single(0.5, 0.0, 2.0);
    for (double t = 2.0 / 3.0 + 1e-6; t < 1.0; t += 0.05) {
        auto [q0, q1] = q0_q1(t, 0, 0, big, big);
        CHECK(q0 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(q1 == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("big_q values and shape") {
    const ModelParams t = theta_single(0.5, 1.0, 1.0);
    CHECK(big_q(t, 0.0) == 0.0);
    CHECK(big_q(t, 0.5) == doctest::Approx(0.30854).epsilon(1e-4));
    // at t >= t2, Q equals pi0
    const ModelParams big = theta_single(0.5, 0.0, 2.0);
    CHECK(big_q(big, 0.9) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(big_q(big, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

    // monotone and below the identity on (t1, 1]
    Rng rng = make_rng(555);
    for (int rep = 0; rep < 20; ++rep) {
        const ModelParams th = random_theta_single(rng);
        const double t1 = t1_t2_global(th).first;
        double prev = 0.0;
        for (int g = 1; g <= 200; ++g) {
            const double tt = t1 + (1.0 - t1) * g / 200.0;
            const double v = big_q(th, tt);
            CHECK(v >= prev - 1e-12);
            CHECK(v < tt + 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("t_threshold inverts big_q") {
    const ModelParams t = theta_single(0.5, 1.0, 1.0);
    CHECK(t_threshold(t, 0.5) == doctest::Approx(1.0));  // alpha >= pi0
    CHECK(t_threshold(t, 0.30854) == doctest::Approx(0.5).epsilon(1e-4));

    Rng rng = make_rng(808);
    std::uniform_real_distribution<double> ua(0.01, 0.4);
    for (int rep = 0; rep < 100; ++rep) {
        ModelParams th = random_theta_single(rng);
        th.sigma.set(0, 0, std::max(th.sigma(0, 0), 1.0));  // sigma >= sigma0: alpha*=0
        const double pi0 = pi0_pi1(th).first;
        double alpha = ua(rng);
        if (alpha >= pi0) alpha = pi0 * 0.5;
        const double T = t_threshold(th, alpha);
        CHECK(big_q(th, T) <= alpha + 1e-9);
        if (T < 1.0 - 1e-6) CHECK(big_q(th, T + 1e-6) > alpha - 1e-9);
    }
}

TEST_CASE("alpha_star rule") {
    CHECK(alpha_star(theta_single(0.4, 1.0, 1.0)).is_zero);
    CHECK(alpha_star(theta_single(0.4, 0.5, 1.7)).is_zero);

    const AlphaStar sub = alpha_star(theta_single(0.4, 0.8, 0.6));
    CHECK_FALSE(sub.is_zero);
    CHECK(sub.value > 0.0);

    // mixed-variance two-group parameter with all sigma < sigma0
    ModelParams mixed = theta_two_group(0.6, 0.0, 1.0);
    mixed.sigma.set(0, 0, 0.3);
    mixed.sigma.set(0, 1, 0.9);
    mixed.sigma.set(1, 1, 0.4);
    mixed.mu = QTable(2, 0.0);
    CHECK_FALSE(alpha_star(mixed).is_zero);

    // sub-critical alpha is an error
    CHECK_THROWS_AS(t_threshold(theta_single(0.4, 0.8, 0.6), sub.value * 0.5),
                    SubCriticalAlpha);
}

TEST_CASE("q_values compose big_q with l_values") {
    const ModelParams t = theta_two_group(0.8, 2.0, 1.0);
    auto [state, x] = sample_nsbm(12, t, 33);
    const std::vector<double> lv = l_values(x, state.z, t);
    const std::vector<double> qv = q_values(x, state.z, t);
    const double pi0 = pi0_pi1(t).first;
    for (std::size_t k = 0; k < qv.size(); ++k) {
        CHECK(qv[k] == doctest::Approx(big_q(t, lv[k])).epsilon(1e-12));
        CHECK(qv[k] >= 0.0);
        CHECK(qv[k] <= pi0 + 1e-12);
    }

    // joint label/theta permutation leaves q-values unchanged
    std::vector<int> zp(state.z.size());
    for (std::size_t i = 0; i < zp.size(); ++i) zp[i] = 1 - state.z[i];
    const std::vector<double> qp = q_values(x, zp, permute_theta(t, {1, 0}));
    for (std::size_t k = 0; k < qv.size(); ++k)
        CHECK(qp[k] == doctest::Approx(qv[k]).epsilon(1e-12));
}

TEST_CASE("procedure_vem / procedure_oracle decisions") {
    const ModelParams t = theta_two_group(0.8, 2.0, 1.0);
    auto [state, x] = sample_nsbm(4, t, 51);  // 6 edges
    const DecisionMatrix dec = procedure_oracle(x, state.z, t, 0.1);
    const std::vector<double> qv = q_values(x, state.z, t);
    for (std::size_t k = 0; k < qv.size(); ++k)
        CHECK(dec.rejected[k] == (qv[k] <= 0.1 ? 1 : 0));

    // nested rejection sets in alpha
    auto [state2, x2] = sample_nsbm(20, t, 52);
    const DecisionMatrix lo = procedure_oracle(x2, state2.z, t, 0.05);
    const DecisionMatrix hi = procedure_oracle(x2, state2.z, t, 0.2);
    for (std::size_t k = 0; k < lo.rejected.size(); ++k)
        if (lo.rejected[k]) CHECK(hi.rejected[k]);

    // alpha >= pi0: everything rejected
    const DecisionMatrix all = procedure_oracle(x2, state2.z, t, 0.95);
    CHECK(all.rejection_count() == x2.m());

    CHECK_THROWS(procedure_oracle(x2, state2.z, t, 0.0));
    CHECK_THROWS(procedure_oracle(x2, state2.z, t, 1.0));
}

TEST_CASE("bh step-up") {
    DecisionMatrix dec = bh({0.01, 0.02, 0.5}, 0.15);
    CHECK(dec.rejected == std::vector<std::uint8_t>{1, 1, 0});

    dec = bh({1.0, 1.0, 1.0}, 0.2);
    CHECK(dec.rejection_count() == 0);
    dec = bh({0.0, 0.0, 0.0}, 0.2);
    CHECK(dec.rejection_count() == 3);

    Rng rng = make_rng(606);
    std::uniform_real_distribution<double> up(0.0, 1.0), ua(0.01, 0.5);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> p(40);
        for (auto& v : p) v = std::pow(up(rng), 2.0);
        const double alpha = ua(rng);
        CHECK(bh(p, alpha).rejected == bh_bruteforce(p, alpha).rejected);
    }
}

TEST_CASE("storey estimator and abh") {
    CHECK(storey_pi0({0.6, 0.7, 0.2, 0.9}) == doctest::Approx(1.0));
    CHECK(storey_pi0({0.1, 0.2, 0.3, 0.4}) == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> p = {0.01, 0.04, 0.2, 0.6, 0.9};
    CHECK(abh(p, 0.1, 1.0).rejected == bh(p, 0.1).rejected);
    CHECK(abh(p, 0.1, 0.5).rejected == bh(p, 0.2).rejected);
    CHECK_THROWS(abh(p, 0.1, 0.0));
}
