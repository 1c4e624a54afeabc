#include "socnet/cluster_perm.hpp"
#include "socnet/stats.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <random>

using namespace socnet;

namespace {

NetworkSnapshot path4() {
    std::vector<std::pair<NodeIndex, NodeIndex>> e{{0, 1}, {1, 2}, {2, 3}};
    return NetworkSnapshot(4, e);
}

NetworkSnapshot complete(std::size_t n) {
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i < n; ++i)
        for (NodeIndex j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return NetworkSnapshot(n, e);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

ClusterTestResult with_significance(std::initializer_list<bool> sig) {
    ClusterTestResult r;
    int d = 1;
    for (bool s : sig) {
        DistanceResult row;
        row.distance = d++;
        row.significant = s;
        row.significant_positive = s;
        r.distances.push_back(row);
    }
    return r;
}

} // namespace

TEST_CASE("risk ratio on the path graph") {
    const auto g = path4();
    const auto t = vec({1, 1, 0, 0});
    const auto rr1 = risk_ratio_at_distance(g, t, 1);
    REQUIRE(rr1.defined);
    CHECK(rr1.value == doctest::Approx(2.0));
    CHECK(rr1.n_alter_has == 3);
    CHECK(rr1.n_alter_lacks == 3);

    const auto rr3 = risk_ratio_at_distance(g, t, 3);
    REQUIRE(rr3.defined);
    CHECK(rr3.value == 0.0);
    CHECK(rr3.n_alter_has == 1);
    CHECK(rr3.n_alter_lacks == 1);

    const auto flat = risk_ratio_at_distance(g, vec({1, 1, 1, 1}), 1);
    CHECK_FALSE(flat.defined);
    CHECK(std::isnan(flat.value));
}

TEST_CASE("unobserved nodes carry paths but no pairs") {
    const auto g = path4();
    const auto t = vec({1, kMissing, 0, 1});
    const DistancePairs pairs(g, t, 3);
    CHECK(pairs.at(1).size() == 1); // (2,3)
    CHECK(pairs.at(2).size() == 1); // (0,2) through the unobserved node
    CHECK(pairs.at(3).size() == 1);
}

TEST_CASE("permutation preserves prevalence and missing positions") {
    const auto t = vec({1, kMissing, 0, 1, 0, 1, kMissing, 0});
    for (std::size_t r = 0; r < 50; ++r) {
        const auto p = permute_observed(t, 3, r);
        CHECK(std::isnan(p(1)));
        CHECK(std::isnan(p(6)));
        double sum = 0;
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (!std::isnan(p(i))) sum += p(i);
        CHECK(sum == 3.0);
    }
    const auto a = permute_observed(t, 3, 7), b = permute_observed(t, 3, 7);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())) == 0);
}

TEST_CASE("vertex-transitive graph gives a degenerate null") {
    const auto g = complete(3);
    const auto t = vec({1, 1, 0});
    const double observed = risk_ratio_at_distance(g, t, 1).value;
    for (double v : permutation_null(g, t, 1, 100, 9)) CHECK(v == observed);

    ClusterTestOptions opt;
    opt.max_d = 1;
    opt.replicates = 200;
    const auto r = cluster_test(g, t, opt);
    CHECK(r.distances[0].ci_low == 0.0);
    CHECK(r.distances[0].ci_high == 0.0);
    CHECK_FALSE(r.distances[0].significant);
    CHECK(reach(r) == 0);
}

TEST_CASE("cluster test is deterministic") {
    std::mt19937_64 rng(2);
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i < 60; ++i)
        for (NodeIndex j = i + 1; j < 60; ++j)
            if (std::bernoulli_distribution(0.08)(rng)) e.emplace_back(i, j);
    const NetworkSnapshot g(60, e);
    Eigen::VectorXd t(60);
    for (auto& x : t) x = double(rng() % 2);
    ClusterTestOptions opt;
    opt.replicates = 300;
    opt.seed = 44;
    const auto a = cluster_test(g, t, opt);
    const auto b = cluster_test(g, t, opt);
    REQUIRE(a.distances.size() == b.distances.size());
    for (std::size_t d = 0; d < a.distances.size(); ++d) {
        CHECK(a.distances[d].null_values == b.distances[d].null_values);
        CHECK(a.distances[d].ci_low == b.distances[d].ci_low);
    }
    CHECK(permutation_null(g, t, 1, 1, 5) == permutation_null(g, t, 1, 1, 5));
}

TEST_CASE("strongly clustered trait is significant at distance 1") {
    // two cliques joined by one edge; the trait marks one clique
    std::vector<std::pair<NodeIndex, NodeIndex>> e;
    for (NodeIndex i = 0; i < 10; ++i)
        for (NodeIndex j = i + 1; j < 10; ++j) {
            e.emplace_back(i, j);
            e.emplace_back(i + 10, j + 10);
        }
    e.emplace_back(0, 10);
    const NetworkSnapshot g(20, e);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(20);
    t.head(10).setOnes();
    ClusterTestOptions opt;
    opt.max_d = 2;
    opt.replicates = 500;
    const auto r = cluster_test(g, t, opt);
    CHECK(r.distances[0].significant_positive);
    CHECK(r.distances[0].ci_low > 0);
    CHECK(reach(r) >= 1);
}

TEST_CASE("pearson variant") {
    const auto g = path4();
    const auto c = pair_correlation(DistancePairs(g, vec({1, 2, 3, 4}), 1).at(1), vec({1, 2, 3, 4}));
    REQUIRE(c.defined);
    // ordered pairs: (1,2),(2,1),(2,3),(3,2),(3,4),(4,3)
    const Eigen::VectorXd x = vec({1, 2, 2, 3, 3, 4}), y = vec({2, 1, 3, 2, 4, 3});
    const double mx = x.mean(), my = y.mean();
    const double r = ((x.array() - mx) * (y.array() - my)).sum() /
                     std::sqrt(((x.array() - mx).square().sum()) * ((y.array() - my).square().sum()));
    CHECK(c.value == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("reach follows the contiguity rule") {
    CHECK(reach(with_significance({true, true, true, false})) == 3);
    CHECK(reach(with_significance({true, false, true, false})) == 1);
    CHECK(reach(with_significance({false, false, false, false})) == 0);
    CHECK(reach(with_significance({false, true, true})) == 0);
}

TEST_CASE("centered null range convention") {
    const auto g = complete(3);
    ClusterTestOptions opt;
    opt.max_d = 1;
    opt.replicates = 50;
    opt.convention = CiConvention::centered_null_range;
    const auto r = cluster_test(g, vec({1, 1, 0}), opt);
    CHECK_FALSE(r.distances[0].significant);
}

TEST_CASE("residualize against a normal-equations oracle") {
    PanelBuilder b;
    const double y[6] = {3.1, 4.0, 2.2, 5.9, 4.4, 6.3};
    const double x[6] = {1.0, 2.0, 0.5, 4.0, 2.5, 3.5};
    for (int i = 0; i < 6; ++i) {
        const auto id = std::to_string(i + 1);
        b.add_node({id});
        b.add_trait(id, 1, "y", y[i]);
        b.add_trait(id, 1, "x", x[i]);
        b.add_trait(id, 1, "c", 7.0);
        b.add_trait(id, 1, "lin", 2.0 + 3.0 * x[i]);
    }
    const Panel p = b.build();

    Eigen::MatrixXd X(6, 2);
    Eigen::VectorXd Y(6);
    for (int i = 0; i < 6; ++i) {
        X(i, 0) = 1;
        X(i, 1) = x[i];
        Y(i) = y[i];
    }
    const Eigen::VectorXd beta = (X.transpose() * X).inverse() * X.transpose() * Y;
    const Eigen::VectorXd expect = Y - X * beta;
    const auto res = residualize_trait(p, "y", {"x"}, 1);
    for (int i = 0; i < 6; ++i) CHECK(res(i) == doctest::Approx(expect(i)).epsilon(1e-10).scale(1.0));

    // intercept only: deviations from the mean
    const auto dev = residualize_trait(p, "y", {}, 1);
    for (int i = 0; i < 6; ++i) CHECK(dev(i) == doctest::Approx(y[i] - Y.mean()).epsilon(1e-12).scale(1.0));

    const auto zero = residualize_trait(p, "lin", {"x"}, 1);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(residualize_trait(p, "y", {"c"}, 1), NumericalError);

    const auto d = dichotomize(vec({-1, 0, 2, kMissing}));
    CHECK(d(0) == 0);
    CHECK(d(1) == 0);
    CHECK(d(2) == 1);
    CHECK(std::isnan(d(3)));
}

TEST_CASE("decay profile") {
    const double a[] = {1.2, 1.44};
    const auto exact = decay_profile(a);
    CHECK(exact[1].ratio == doctest::Approx(1.0));
    CHECK_FALSE(exact[1].slower_than_multiplicative);
    const double b[] = {1.2, 1.30};
    const auto slow = decay_profile(b);
    CHECK(slow[1].ratio > 1.0);
    CHECK(slow[1].slower_than_multiplicative);
    const double undefined[] = {kMissing, 1.3};
    CHECK_THROWS_AS(decay_profile(undefined), DataError);

    const double chain[] = {0.2, 0.2};
    CHECK(chained_probability(chain) == doctest::Approx(0.04));
}

TEST_CASE("type-7 percentile") {
    const double v[] = {4, 1, 3, 2, 5};
    CHECK(stats::percentile(v, 0.0) == 1.0);
    CHECK(stats::percentile(v, 0.5) == 3.0);
    CHECK(stats::percentile(v, 0.25) == 2.0);
    CHECK(stats::percentile(v, 0.1) == doctest::Approx(1.4));
}
