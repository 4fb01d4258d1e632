#include <doctest.h>

#include <random>

#include "iscc/resource_alloc.hpp"

using namespace iscc;

TEST_CASE("alloc_mec closed form") {
    const std::vector<double> s{4e9, 1e9}, a{4, 4};
    const auto f = alloc_mec(s, a, 12e9);
    CHECK(f[0] == doctest::Approx(8e9));
    CHECK(f[1] == doctest::Approx(4e9));
    // KKT: s / (alpha f^2) equal across devices
    CHECK(s[0] / (a[0] * f[0] * f[0]) == doctest::Approx(s[1] / (a[1] * f[1] * f[1])));

    const std::vector<double> zero{0, 0};
    CHECK(alloc_mec(zero, a, 12e9) == std::vector<double>{0, 0});
    const std::vector<double> one{3e9}, a1{4};
    CHECK(alloc_mec(one, a1, 12e9)[0] == 12e9);
    const std::vector<double> mixed{0, 2e9}, a2{4, 2};
    const auto g = alloc_mec(mixed, a2, 10e9);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(10e9));
}

TEST_CASE("alloc_mec beats a dense grid search") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> s_dist(1e8, 5e9), a_dist(1, 8);
    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + trial % 2;
        std::vector<double> s(K), a(K);
        for (int k = 0; k < K; ++k) {
            s[k] = s_dist(rng);
            a[k] = a_dist(rng);
        }
        const double F = 12e9;
        const auto f = alloc_mec(s, a, F);
        auto obj = [&](const std::vector<double>& x) {
            double v = 0;
            for (int k = 0; k < K; ++k) v += s[k] / (a[k] * x[k]);
            return v;
        };
        double best = 1e300;
        const int n = K == 2 ? 10000 : 400;
        for (int i = 1; i < n; ++i) {
            if (K == 2) {
                best = std::min(best, obj({F * i / n, F * (n - i) / n}));
            } else {
                for (int j = 1; i + j < n; ++j) best = std::min(best, obj({F * i / n, F * j / n, F * (n - i - j) / n}));
            }
        }
        CAPTURE(trial);
        double sum = 0;
        for (double x : f) sum += x;
        CHECK(sum == doctest::Approx(F).epsilon(1e-12));
        CHECK(obj(f) <= best * (1 + 1e-12));
        CHECK(obj(f) >= best * (1 - 1e-3));
    }
}

TEST_CASE("alloc_local branches") {
    CHECK(alloc_local(1e9, 2, 0.8e9, 300, 1e-28) == 0.8e9);
    CHECK(alloc_local(1e9, 2, 0.8e9, 300, 1e-10) == doctest::Approx(std::sqrt(6000.0)));
    CHECK(alloc_local(0, 2, 0.8e9, 300, 1e-28) == 0.8e9);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lg(-2, 2);
    for (int i = 0; i < 200; ++i) {
        const double s = 1e9 * std::pow(10, lg(rng)), F = 0.8e9, E = 300 * std::pow(10, lg(rng)),
                     kappa = 1e-28 * std::pow(10, 4 * lg(rng)), alpha = 2;
        const double f = alloc_local(s, alpha, F, E, kappa);
        const double cap = std::sqrt(E * alpha / (kappa * s));
        CHECK((f == F || f == cap));
        CHECK(f <= F);
        CHECK(energy(s, f, alpha, kappa) <= E * (1 + 1e-9));
    }
}

TEST_CASE("energy") {
    CHECK(energy(1e9, 0.8e9, 2, 1e-28) == doctest::Approx(0.032));
    CHECK(energy(0, 0.8e9, 2, 1e-28) == 0.0);
    CHECK(energy(1e9, 1.6e9, 2, 1e-28) == doctest::Approx(4 * energy(1e9, 0.8e9, 2, 1e-28)));
    // p * T with p = kappa f^3 and T = s / (alpha f)
    const double f = 0.5e9, s = 3e9;
    CHECK(energy(s, f, 2, 1e-28) == doctest::Approx(1e-28 * f * f * f * s / (2 * f)));
}
