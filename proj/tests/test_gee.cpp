#include "socnet/gee.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace socnet;

namespace {

// Rows with independent random regressors; each row gets its own ego unless
// `cluster_size` groups them.
DyadSet random_rows(std::mt19937_64& rng, std::size_t n, bool binary_outcome, std::size_t cluster_size = 1) {
    std::normal_distribution<> z;
    std::bernoulli_distribution coin(0.5);
    DyadSet d;
    d.trait = "y";
    for (std::size_t i = 0; i < n; ++i) {
        DyadRow r;
        r.ego = NodeIndex(i / cluster_size);
        r.alter = NodeIndex(100000 + i);
        r.y_ego_t = coin(rng);
        r.y_alter_t = coin(rng);
        r.y_alter_t1 = coin(rng);
        if (binary_outcome) {
            const double eta = -0.3 + 0.8 * r.y_ego_t + 0.5 * r.y_alter_t1 - 0.2 * r.y_alter_t;
            r.y_ego_t1 = std::bernoulli_distribution(1 / (1 + std::exp(-eta)))(rng);
        } else {
            r.y_ego_t1 = 1.0 + 0.5 * r.y_ego_t + 0.3 * r.y_alter_t1 + 0.1 * r.y_alter_t + z(rng);
        }
        d.rows.push_back(r);
    }
    return d;
}

Eigen::MatrixXd basic_design(const DyadSet& d) {
    Eigen::MatrixXd X(Eigen::Index(d.rows.size()), 4);
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        const auto& r = d.rows[i];
        X.row(Eigen::Index(i)) << 1.0, r.y_ego_t, r.y_alter_t1, r.y_alter_t;
    }
    return X;
}

Eigen::VectorXd outcome(const DyadSet& d) {
    Eigen::VectorXd y(Eigen::Index(d.rows.size()));
    for (std::size_t i = 0; i < d.rows.size(); ++i) y(Eigen::Index(i)) = d.rows[i].y_ego_t1;
    return y;
}

// Plain Newton-Raphson on the Bernoulli log likelihood.
Eigen::VectorXd logistic_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
    for (int it = 0; it < 200; ++it) {
        const Eigen::ArrayXd p = 1.0 / (1.0 + (-(X * b).array()).exp());
        const Eigen::VectorXd grad = X.transpose() * (y.array() - p).matrix();
        const Eigen::MatrixXd hess = X.transpose() * (p * (1 - p)).matrix().asDiagonal() * X;
        const Eigen::VectorXd step = hess.llt().solve(grad);
        b += step;
        if (step.norm() < 1e-14) break;
    }
    return b;
}

// Friend ties 1-2 (and 2-3 with `third`) over [first, last], trait on every wave.
Panel pair_panel(int first, int last, int waves, bool drop_ego_wave2 = false, bool third = false) {
    PanelBuilder b;
    b.add_node({"1"});
    b.add_node({"2"});
    b.add_tie("1", "2", TieType::friend_tie, first, last, true);
    if (third) {
        b.add_node({"3"});
        b.add_tie("2", "3", TieType::friend_tie, first, last, true);
    }
    for (int w = 1; w <= waves; ++w) {
        if (!(drop_ego_wave2 && w == 2)) b.add_trait("1", w, "y", w % 2);
        b.add_trait("2", w, "y", (w + 1) % 2);
        if (third) b.add_trait("3", w, "y", 1);
    }
    return b.build();
}

} // namespace

TEST_CASE("dyad rows follow consecutive-wave tie overlap") {
    const auto both = build_dyad_rows(pair_panel(1, 3, 3), "y", TieFilter::all(), {});
    CHECK(both.rows.size() == 4); // two ordered directions x t in {1, 2}
    for (const auto& r : both.rows) CHECK((r.wave_t == 1 || r.wave_t == 2));

    CHECK_THROWS_AS(build_dyad_rows(pair_panel(2, 2, 3), "y", TieFilter::all(), {}), DataError);

    // node 1 unobserved at wave 2: both of its dyads lose t=1 and t=2
    const auto dropped = build_dyad_rows(pair_panel(1, 3, 3, true, true), "y", TieFilter::all(), {});
    CHECK(dropped.rows.size() == 4);
    for (const auto& r : dropped.rows) {
        CHECK(r.ego != 0);
        CHECK(r.alter != 0);
    }
    CHECK(dropped.drops.dropped() == 4);
    CHECK_FALSE(dropped.drops.by_reason.empty());
}

TEST_CASE("dyad rows carry directionality and values") {
    const auto d = build_dyad_rows(pair_panel(1, 3, 3), "y", TieFilter::all(), {});
    for (const auto& r : d.rows) {
        CHECK(r.directionality == (r.ego == 0 ? FriendshipClass::ego_perceived : FriendshipClass::alter_perceived));
        CHECK(r.y_ego_t == double((r.ego == 0 ? r.wave_t : r.wave_t + 1) % 2));
    }
}

TEST_CASE("identity link equals least squares") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = random_rows(rng, 40 + rep, false);
        const auto fit = fit_gee(d, basic_model(Link::identity, {}));
        const Eigen::MatrixXd X = basic_design(d);
        const Eigen::VectorXd y = outcome(d);
        const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
        CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() < 1e-8);

        // one row per cluster: the sandwich is White's HC0
        const Eigen::VectorXd e = y - X * beta;
        const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
        const Eigen::MatrixXd hc0 = bread * X.transpose() * e.array().square().matrix().asDiagonal() * X * bread;
        CHECK((fit.robust_covariance - hc0).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("logit link equals a Newton maximum-likelihood oracle") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = random_rows(rng, 300, true, 3);
        const auto fit = fit_gee(d, basic_model(Link::logit, {}));
        const Eigen::VectorXd b = logistic_mle(basic_design(d), outcome(d));
        CHECK((fit.coefficients - b).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(fit.n_clusters == 100);
    }
}

TEST_CASE("constant alter column is reported as collinear") {
    std::mt19937_64 rng(3);
    auto d = random_rows(rng, 50, false);
    for (auto& r : d.rows) r.y_alter_t1 = 1.0;
    try {
        fit_gee(d, basic_model(Link::identity, {}));
        FAIL("expected a collinearity error");
    } catch (const CollinearityError& e) {
        CHECK(e.terms().find("y_alter_t1") != std::string::npos);
    }
}

TEST_CASE("separated logit data is a numerical error") {
    std::mt19937_64 rng(4);
    auto d = random_rows(rng, 60, true);
    for (auto& r : d.rows) r.y_ego_t1 = r.y_alter_t1;
    CHECK_THROWS_AS(fit_gee(d, basic_model(Link::logit, {})), NumericalError);
}

TEST_CASE("dyad clustering merges both directions of a pair") {
    DyadSet d;
    d.rows.resize(4);
    d.rows[0].ego = 0, d.rows[0].alter = 1;
    d.rows[1].ego = 1, d.rows[1].alter = 0;
    d.rows[2].ego = 0, d.rows[2].alter = 2;
    d.rows[3].ego = 2, d.rows[3].alter = 0;
    const auto ego = cluster_ids(d, ClusterKey::ego);
    const auto dyad = cluster_ids(d, ClusterKey::dyad);
    CHECK(ego[0] == ego[2]);
    CHECK(ego[0] != ego[1]);
    CHECK(dyad[0] == dyad[1]);
    CHECK(dyad[2] == dyad[3]);
    CHECK(dyad[0] != dyad[2]);
}

TEST_CASE("serial correlation test") {
    std::mt19937_64 rng(5);
    std::normal_distribution<> z;
    auto series = [&](double rho, std::size_t dyads, int waves, std::uint64_t seed) {
        rng.seed(seed);
        DyadSet d;
        for (std::size_t k = 0; k < dyads; ++k) {
            double e = z(rng);
            for (int t = 1; t <= waves; ++t) {
                DyadRow r;
                r.ego = NodeIndex(k);
                r.alter = NodeIndex(k + dyads);
                r.wave_t = t;
                r.y_ego_t = z(rng);
                r.y_alter_t = z(rng);
                r.y_alter_t1 = z(rng);
                e = rho * e + std::sqrt(1 - rho * rho) * z(rng);
                r.y_ego_t1 = 0.2 * r.y_alter_t1 + e;
                d.rows.push_back(r);
            }
        }
        return d;
    };
    const auto spec = basic_model(Link::identity, {});

    const auto ar = series(0.8, 50, 10, 1);
    CHECK(lm_serial_test(fit_gee(ar, spec), ar, spec).p_value < 0.01);

    int rejections = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto iid = series(0.0, 25, 4, 100 + s);
        rejections += lm_serial_test(fit_gee(iid, spec), iid, spec).p_value < 0.05;
    }
    // binomial(200, 0.05) 99.9% range
    CHECK(rejections >= 1);
    CHECK(rejections <= 23);

    const auto single = series(0.0, 40, 1, 7);
    CHECK_THROWS_AS(lm_serial_test(fit_gee(single, spec), single, spec), DataError);
}

TEST_CASE("first difference") {
    const auto spec = basic_model(Link::logit, {});
    FitResult fit;
    fit.link = Link::logit;
    fit.names = {"intercept", "y_ego_t", "y_alter_t1", "y_alter_t"};
    fit.coefficients = Eigen::Vector4d(-1, 0, 1, 0);
    fit.robust_covariance = Eigen::Matrix4d::Zero();
    const std::map<std::string, double> means{{"y_ego_t", 0}, {"y_alter_t1", 0}, {"y_alter_t", 0}};
    const auto fd = first_difference(fit, spec, means, 500, 3);
    const double expect = 0.5 - 1 / (1 + std::exp(1.0));
    CHECK(fd.point == doctest::Approx(expect).epsilon(1e-12));
    CHECK(fd.point == doctest::Approx(0.2311).epsilon(1e-3));
    CHECK(fd.ci_low == doctest::Approx(expect).epsilon(1e-12));
    CHECK(fd.ci_high == doctest::Approx(expect).epsilon(1e-12));

    // identity link: draws are draws of beta2
    std::mt19937_64 rng(6);
    const auto d = random_rows(rng, 400, false, 4);
    const auto ispec = basic_model(Link::identity, {});
    const auto ifit = fit_gee(d, ispec);
    const auto ifd = first_difference(ifit, ispec, variable_means(d, ispec), 20000, 9);
    const double b2 = ifit.coefficient("y_alter_t1");
    const double se = ifit.std_error("y_alter_t1");
    CHECK(std::abs(ifd.point - b2) < 4 * se / std::sqrt(20000.0));
    CHECK(ifd.ci_low == doctest::Approx(b2 - 1.96 * se).epsilon(0.05));

    const auto again = first_difference(ifit, ispec, variable_means(d, ispec), 20000, 9);
    CHECK(again.point == ifd.point);
    CHECK(again.ci_low == ifd.ci_low);
}

TEST_CASE("directional contrast needs two classes") {
    std::mt19937_64 rng(7);
    auto d = random_rows(rng, 100, false, 2);
    for (auto& r : d.rows) r.directionality = FriendshipClass::mutual;
    try {
        directional_contrast(d, Link::identity, {});
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("ego_perceived") != std::string::npos);
        CHECK(msg.find("alter_perceived") != std::string::npos);
    }

    std::size_t i = 0;
    for (auto& r : d.rows) r.directionality = std::array{FriendshipClass::mutual, FriendshipClass::ego_perceived,
                                                          FriendshipClass::alter_perceived}[i++ % 3];
    const auto c = directional_contrast(d, Link::identity, {});
    CHECK(c.effects.size() == 3);
    CHECK(c.differences.size() == 3);
    for (const auto& diff : c.differences) {
        const auto find = [&](FriendshipClass k) {
            for (const auto& e : c.effects)
                if (e.cls == k) return e.estimate;
            return kMissing;
        };
        CHECK(diff.difference == doctest::Approx(find(diff.a) - find(diff.b)));
    }
}

TEST_CASE("geographic interaction") {
    std::mt19937_64 rng(8);
    auto d = random_rows(rng, 200, false, 2);
    for (auto& r : d.rows) r.geo_distance_t = 3.0;
    CHECK_THROWS_AS(distance_interaction(d, basic_model(Link::identity, {})), CollinearityError);

    std::uniform_real_distribution<> miles(0, 50);
    for (auto& r : d.rows) r.geo_distance_t = miles(rng);
    d.rows[0].geo_distance_t = kMissing;
    const auto fit = distance_interaction(d, basic_model(Link::identity, {}));
    CHECK(fit.index_of(kGeoInteraction).has_value());
    CHECK(fit.n_rows == 199);
}

TEST_CASE("lagged change model") {
    CHECK_THROWS_AS(lagged_change_model(pair_panel(1, 2, 2), "y", TieFilter::all(), {}), DataError);

    PanelBuilder b;
    for (int i = 1; i <= 6; ++i) b.add_node({std::to_string(i)});
    for (int i = 1; i <= 6; ++i)
        for (int j = i + 1; j <= 6; ++j) b.add_tie(std::to_string(i), std::to_string(j), TieType::friend_tie, 1, 4, true);
    for (int i = 1; i <= 6; ++i)
        for (int w = 1; w <= 4; ++w) b.add_trait(std::to_string(i), w, "y", double(i));
    CHECK_THROWS_AS(lagged_change_model(b.build(), "y", TieFilter::all(), {}), NumericalError);
}
