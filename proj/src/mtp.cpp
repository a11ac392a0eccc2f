#include "nsbm/mtp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nsbm {

namespace {

constexpr double kZeroA = 1e-12;  // |a| below this uses the linear case
constexpr double kInf = std::numeric_limits<double>::infinity();

double interval_mass(const RejectionRegion& region, double mean, double sd) {
    double p = 0.0;
    for (const auto& iv : region.intervals) {
        const double zlo = (iv.lo - mean) / sd;  // +-inf propagates fine
        const double zhi = (iv.hi - mean) / sd;
        // far right tail: difference of survival functions keeps precision
        if (zlo > 0.0)
            p += normal_sf(zlo) - normal_sf(zhi);
        else
            p += normal_cdf(zhi) - normal_cdf(zlo);
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

std::array<double, 3> abc_coefficients(int q, int l, const ModelParams& theta, double t) {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("abc_coefficients: t outside (0,1)");
    const double s = theta.sigma(q, l);
    const double s0 = theta.sigma0;
    const double mu = theta.mu(q, l);
    const double w = theta.w(q, l);
    const double a = 1.0 / (s * s) - 1.0 / (s0 * s0);
    const double b = -2.0 * mu / (s * s);
    const double c = mu * mu / (s * s) +
                     2.0 * (std::log(s / s0) + std::log(1.0 / w - 1.0) +
                            std::log(1.0 / t - 1.0));
    return {a, b, c};
}

RejectionRegion rejection_region(int q, int l, const ModelParams& theta, double t) {
    RejectionRegion region;
    if (t <= 0.0) return region;
    if (t >= 1.0) {
        region.intervals.push_back({-kInf, kInf});
        return region;
    }
    const auto [a, b, c] = abc_coefficients(q, l, theta, t);
    if (std::abs(a) < kZeroA) {
        if (std::abs(b) < kZeroA) {
            if (c <= 0.0) region.intervals.push_back({-kInf, kInf});
            return region;
        }
        if (b > 0.0)
            region.intervals.push_back({-kInf, -c / b});
        else
            region.intervals.push_back({-c / b, kInf});
        return region;
    }
    const double disc = b * b - 4.0 * a * c;
    if (a > 0.0) {
        if (disc <= 0.0) return region;  // never below zero
        const double root = std::sqrt(disc);
        region.intervals.push_back({(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)});
        return region;
    }
    // a < 0: quadratic opens downward, complement of the root interval
    if (disc < 0.0) {
        region.intervals.push_back({-kInf, kInf});
        return region;
    }
    const double root = std::sqrt(disc);
    double r1 = (-b - root) / (2.0 * a);
    double r2 = (-b + root) / (2.0 * a);
    if (r1 > r2) std::swap(r1, r2);
    region.intervals.push_back({-kInf, r1});
    region.intervals.push_back({r2, kInf});
    return region;
}

std::pair<double, double> q0_q1(double t, int q, int l, const ModelParams& theta_prime,
                                const ModelParams& theta) {
    if (t <= 0.0) return {0.0, 0.0};
    if (t >= 1.0) return {1.0, 1.0};
    const RejectionRegion region = rejection_region(q, l, theta, t);
    const double p0 = interval_mass(region, 0.0, theta_prime.sigma0);
    const double p1 =
        interval_mass(region, theta_prime.mu(q, l), theta_prime.sigma(q, l));
    return {p0, p1};
}

std::pair<double, double> t1_t2(int q, int l, const ModelParams& theta) {
    const double s = theta.sigma(q, l);
    const double s0 = theta.sigma0;
    const double a = 1.0 / (s * s) - 1.0 / (s0 * s0);
    if (std::abs(a) < kZeroA) return {0.0, 1.0};
    const double mu = theta.mu(q, l);
    const double w = theta.w(q, l);
    const double t0 =
        1.0 / (1.0 + (w / (1.0 - w)) * (s0 / s) *
                         std::exp(mu * mu / (2.0 * (s0 * s0 - s * s))));
    if (a < 0.0) return {0.0, t0};  // sigma > sigma0
    return {t0, 1.0};               // sigma < sigma0
}

std::pair<double, double> t1_t2_global(const ModelParams& theta) {
    double t1 = 1.0, t2 = 0.0;
    for (int q = 0; q < theta.Q; ++q) {
        for (int l = q; l < theta.Q; ++l) {
            const auto [a, b] = t1_t2(q, l, theta);
            t1 = std::min(t1, a);
            t2 = std::max(t2, b);
        }
    }
    return {t1, t2};
}

double big_q(const ModelParams& theta, double t) {
    double num = 0.0, den = 0.0;
    for (int q = 0; q < theta.Q; ++q) {
        for (int l = 0; l < theta.Q; ++l) {
            const double pp = theta.pi[q] * theta.pi[l];
            const auto [p0, p1] = q0_q1(t, q, l, theta, theta);
            const double w = theta.w(q, l);
            num += pp * (1.0 - w) * p0;
            den += pp * ((1.0 - w) * p0 + w * p1);
        }
    }
    // 0/0 convention; subnormal masses carry almost no significand bits,
    // so ratios of them are quantization noise and count as zero too
    if (den < 1e-300) return 0.0;
    return num / den;
}

AlphaStar alpha_star(const ModelParams& theta) {
    bool some_geq = false;
    for (int q = 0; q < theta.Q && !some_geq; ++q)
        for (int l = q; l < theta.Q; ++l)
            if (theta.sigma(q, l) >= theta.sigma0 - kZeroA) {
                some_geq = true;
                break;
            }
    if (some_geq) return {true, 0.0};
    const double t1 = t1_t2_global(theta).first;
    return {false, big_q(theta, t1 + 1e-9)};
}

double t_threshold(const ModelParams& theta, double alpha) {
    const double pi0 = pi0_pi1(theta).first;
    if (alpha >= pi0) return 1.0;
    const AlphaStar as = alpha_star(theta);
    if (!as.is_zero && alpha <= as.value) throw SubCriticalAlpha(alpha, as.value);

    double lo = t1_t2_global(theta).first;  // big_q(lo) = 0 <= alpha
    double hi = 1.0;                        // big_q(1) = pi0 > alpha
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (big_q(theta, mid) <= alpha)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<double> l_values(const ObservationMatrix& x, const std::vector<int>& z_hat,
                             const ModelParams& theta_hat) {
    std::vector<double> out(x.m());
    const EdgeIndexMap idx(x.n);
    for (std::size_t k = 0; k < x.m(); ++k) {
        auto [i, j] = idx.nodes(k);
        out[k] = l_value(x.values[k], z_hat[i], z_hat[j], theta_hat);
    }
    return out;
}

std::vector<double> q_values(const ObservationMatrix& x, const std::vector<int>& z_hat,
                             const ModelParams& theta_hat) {
    const std::vector<double> lv = l_values(x, z_hat, theta_hat);
    std::vector<double> out(lv.size());
    for (std::size_t k = 0; k < lv.size(); ++k) out[k] = big_q(theta_hat, lv[k]);
    return out;
}

namespace {

DecisionMatrix q_value_procedure(const ObservationMatrix& x, const std::vector<int>& z,
                                 const ModelParams& theta, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha outside (0,1)");
    const AlphaStar as = alpha_star(theta);
    if (!as.is_zero && alpha <= as.value) throw SubCriticalAlpha(alpha, as.value);

    DecisionMatrix dec;
    dec.n = x.n;
    dec.q_values = q_values(x, z, theta);
    dec.rejected.resize(dec.q_values.size());
    for (std::size_t k = 0; k < dec.q_values.size(); ++k)
        dec.rejected[k] = dec.q_values[k] <= alpha ? 1 : 0;
    return dec;
}

}  // namespace

DecisionMatrix procedure_vem(const ObservationMatrix& x, double alpha, const FitResult& fit) {
    return q_value_procedure(x, fit.z_hat, fit.theta_hat, alpha);
}

DecisionMatrix procedure_oracle(const ObservationMatrix& x, const std::vector<int>& z_true,
                                const ModelParams& theta_true, double alpha) {
    return q_value_procedure(x, z_true, theta_true, alpha);
}

DecisionMatrix bh(const std::vector<double>& p_values, double alpha) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::size_t k_hat = 0;  // step-up: largest k with p_(k) <= alpha k / m
    for (std::size_t k = m; k >= 1; --k) {
        if (p_values[order[k - 1]] <= alpha * static_cast<double>(k) / static_cast<double>(m)) {
            k_hat = k;
            break;
        }
    }

    DecisionMatrix dec;
    dec.rejected.assign(m, 0);
    if (k_hat > 0) {
        const double thresh = alpha * static_cast<double>(k_hat) / static_cast<double>(m);
        for (std::size_t e = 0; e < m; ++e)
            dec.rejected[e] = p_values[e] <= thresh ? 1 : 0;
    }
    return dec;
}

double storey_pi0(const std::vector<double>& p_values, double lambda) {
    std::size_t exceed = 0;
    for (double p : p_values)
        if (p > lambda) ++exceed;
    const double est = (1.0 + static_cast<double>(exceed)) /
                       (static_cast<double>(p_values.size()) * (1.0 - lambda));
    return std::min(est, 1.0);
}

DecisionMatrix abh(const std::vector<double>& p_values, double alpha, double pi0_hat) {
    if (!(pi0_hat > 0.0)) throw std::invalid_argument("abh: pi0_hat must be positive");
    return bh(p_values, alpha / pi0_hat);
}

}  // namespace nsbm
