#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <map>

#include "test_util.hpp"

using namespace iscc;
using iscc::testing::small_instance;

namespace {

// Conditional pair probabilities by brute force over all 2^n bit vectors.
std::map<PartitionPair, double> enumerate_conditional(const std::vector<double>& w) {
    const int n = static_cast<int>(w.size());
    std::map<PartitionPair, double> mass;
    double total = 0;
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
        const int set = __builtin_popcount(bits);
        if (set < 1 || set > 2) continue;
        double m = 1;
        std::vector<int> on;
        for (int l = 0; l < n; ++l) {
            const bool b = bits >> l & 1u;
            m *= b ? w[l] : 1 - w[l];
            if (b) on.push_back(l);
        }
        const PartitionPair p{on.front(), on.back()};
        mass[p] += m;
        total += m;
    }
    for (auto& [p, m] : mass) m /= total;
    return mass;
}

double chi_square_p(const std::vector<double>& w, std::uint64_t seed, int draws) {
    const PairSampler sampler(w);
    const auto expected = enumerate_conditional(w);
    std::map<PartitionPair, int> counts;
    Rng rng(seed);
    for (int i = 0; i < draws; ++i) ++counts[sampler(rng)];
    double stat = 0;
    int cells = 0;
    for (const auto& [p, prob] : expected) {
        if (prob <= 0) {
            CHECK(counts[p] == 0);
            continue;
        }
        const double e = prob * draws;
        const double o = counts[p];
        stat += (o - e) * (o - e) / e;
        ++cells;
    }
    boost::math::chi_squared dist(cells - 1);
    return 1 - boost::math::cdf(dist, stat);
}

std::vector<SampleEval> elites_from(const std::vector<std::vector<PartitionPair>>& as) {
    std::vector<SampleEval> out;
    for (const auto& a : as) out.push_back({a, 0.0, true, static_cast<int>(out.size())});
    return out;
}

}  // namespace

TEST_CASE("sampler on deterministic supports") {
    Rng rng(1);
    const std::vector<double> w1{1, 0, 0}, w2{1, 1, 0};
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_feasible(w1, rng) == PartitionPair{0, 0});
        CHECK(sample_feasible(w2, rng) == PartitionPair{0, 1});
    }
}

TEST_CASE("sampler probabilities match enumeration") {
    const std::vector<double> w{0.2, 0.7, 0.5, 0.05, 0.9};
    const PairSampler s(w);
    const auto expected = enumerate_conditional(w);
    double sum = 0;
    for (std::size_t i = 0; i < s.support().size(); ++i) {
        CHECK(s.probabilities()[i] == doctest::Approx(expected.at(s.support()[i])).epsilon(1e-12));
        sum += s.probabilities()[i];
    }
    CHECK(sum == doctest::Approx(1.0));
    // support follows enumerate order
    CHECK(s.support().front() == PartitionPair{0, 0});
    CHECK(s.support().back() == PartitionPair{4, 4});
}

TEST_CASE("sampler frequencies pass a chi-square test") {
    CHECK(chi_square_p(std::vector<double>(6, 0.5), 3, 100000) > 0.01);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (int t = 0; t < 3; ++t) {
        std::vector<double> w(6);
        for (double& x : w) x = u(rng);
        CHECK(chi_square_p(w, 100 + t, 100000) > 0.01);
    }
}

TEST_CASE("degenerate row falls back to uniform") {
    const std::vector<double> w{1, 1, 1};
    const PairSampler s(w);
    CHECK(s.degenerate());
    for (double p : s.probabilities()) CHECK(p == doctest::Approx(1.0 / 6));
    const std::vector<double> bad{1.2, 0};
    CHECK_THROWS(PairSampler{bad});
}

TEST_CASE("update_omega and smooth") {
    // bit (0, 1) set in 3 of 4 elites
    const auto el = elites_from({{{1, 3}}, {{1, 1}}, {{0, 0}}, {{0, 1}}});
    const auto u = update_omega(el, 1, 3);
    CHECK(u(0, 1) == doctest::Approx(0.75));
    CHECK(u(0, 0) == doctest::Approx(0.5));
    CHECK(u(0, 3) == doctest::Approx(0.25));

    const auto same = update_omega(elites_from({{{2, 4}, {3, 3}}, {{2, 4}, {3, 3}}}), 2, 4);
    Eigen::MatrixXd ind = Eigen::MatrixXd::Zero(2, 5);
    ind(0, 2) = ind(0, 4) = ind(1, 3) = 1;
    CHECK(same == ind);

    const Eigen::MatrixXd half = Eigen::MatrixXd::Constant(2, 2, 0.5);
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(2, 2);
    CHECK(smooth(half, one, 0.9)(0, 0) == doctest::Approx(0.95));
    CHECK(smooth(half, one, 1.0) == one);
    CHECK_THROWS(update_omega(std::vector<SampleEval>{}, 1, 2));
}

TEST_CASE("CE on a one-layer, one-device problem is exact") {
    const auto in = small_instance(1, 1, 1);
    const InnerSolver inner(in.scenario, in.channels, in.targets);
    double best = 1e300;
    for (const auto& p : enumerate_partitions(inner.profile()))
        best = std::min(best, inner.evaluate(std::vector<PartitionPair>{p}).objective);
    CeParams params;
    params.samples = 20;
    params.elites = 5;
    const auto r = optimize(inner, params);
    CHECK(r.solution.objective == best);
}

TEST_CASE("CE with full enumeration equals the exhaustive optimum") {
    const auto in = small_instance(2, 2, 3);
    const InnerSolver inner(in.scenario, in.channels, in.targets);
    double best = 1e300;
    const auto pairs = enumerate_partitions(inner.profile());
    for (const auto& a : pairs)
        for (const auto& b : pairs) best = std::min(best, inner.evaluate(std::vector<PartitionPair>{a, b}).objective);
    CeParams params;
    params.enumerate_samples = true;
    params.elites = 10;
    const auto r = optimize(inner, params);
    CHECK(r.solution.objective == best);
}

TEST_CASE("CE invariants and determinism") {
    const auto in = small_instance(3, 3, 5);
    const InnerSolver inner(in.scenario, in.channels, in.targets);
    CeParams params;
    params.samples = 200;
    params.elites = 20;
    params.seed = 99;
    const auto r = optimize(inner, params);
    REQUIRE_FALSE(r.state.history.empty());
    for (std::size_t i = 1; i < r.state.history.size(); ++i)
        CHECK(r.state.history[i].best_objective <= r.state.history[i - 1].best_objective);
    CHECK((r.state.omega.array() >= 0).all());
    CHECK((r.state.omega.array() <= 1).all());
    CHECK(r.solution.objective == r.state.best_objective);
    CHECK(r.state.iteration <= params.max_iters);

    const auto again = optimize(inner, params);
    CHECK(again.best == r.best);
    CHECK(again.state.omega == r.state.omega);
    params.workers = 3;
    const auto threaded = optimize(inner, params);
    CHECK(threaded.best == r.best);
    CHECK(threaded.state.omega == r.state.omega);
}

TEST_CASE("full smoothing with identical elites collapses the model") {
    const auto in = small_instance(4, 2, 3);
    const InnerSolver inner(in.scenario, in.channels, in.targets);
    CeParams params;
    params.samples = 50;
    params.elites = 1;
    params.smoothing = 1.0;
    params.max_iters = 3;
    params.stall_iters = 10;
    const auto r = optimize(inner, params);
    // after one step omega is an indicator, so every later sample is that assignment
    CHECK((r.state.omega.array() * (1 - r.state.omega.array())).abs().maxCoeff() == 0.0);
    CHECK(r.state.history[1].mean_elite_objective == r.state.history[2].mean_elite_objective);
}

TEST_CASE("CE parameter validation") {
    CeParams p;
    p.elites = 0;
    CHECK_THROWS(p.validate());
    p.elites = 2000;
    CHECK_THROWS(p.validate());
    p = {};
    p.smoothing = 0;
    CHECK_THROWS(p.validate());
    CHECK_NOTHROW(CeParams{}.validate());
}
