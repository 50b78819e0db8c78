#include <cmath>
#include <random>

#include "doctest.h"
#include "paofed/random.hpp"
#include "paofed/rff_feature_map.hpp"

using namespace paofed;

TEST_SUITE("rff_feature_map") {

TEST_CASE("build checks its arguments") {
    CHECK_THROWS_AS(FeatureMap::build(1, 0, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(FeatureMap::build(1, 4, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(FeatureMap::build(1, 4, 4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(FeatureMap::build(1, 4, 4, -2.0), std::invalid_argument);
}

TEST_CASE("shape and determinism") {
    Eigen::MatrixXd probe = Eigen::MatrixXd::Random(256, 4);
    const FeatureMap fm = FeatureMap::build(7, 4, 200, median_heuristic_width(probe));
    CHECK(fm.frequencies().rows() == 200);
    CHECK(fm.frequencies().cols() == 4);

    const FeatureMap a = FeatureMap::build(3, 1, 1, 1.0);
    const FeatureMap b = FeatureMap::build(3, 1, 1, 1.0);
    CHECK(a.frequencies() == b.frequencies());
    CHECK(a.phases() == b.phases());

    const FeatureMap c = FeatureMap::build(4, 4, 16, 1.0);
    const FeatureMap d = FeatureMap::build(5, 4, 16, 1.0);
    CHECK(c.frequencies() != d.frequencies());
}

TEST_CASE("zero frequencies and phases give the constant feature") {
    const int D = 5;
    const FeatureMap fm(Eigen::MatrixXd::Zero(D, 3), Eigen::VectorXd::Zero(D), 1.0);
    const Eigen::VectorXd z = fm.map(Eigen::Vector3d(0.3, -2.0, 9.0));
    for (int i = 0; i < D; ++i) CHECK(z(i) == doctest::Approx(std::sqrt(2.0 / D)));
}

TEST_CASE("features are bounded") {
    const FeatureMap fm = FeatureMap::build(11, 4, 32, 0.7);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const double cap = std::sqrt(2.0 / 32);
    for (int t = 0; t < 1000; ++t) {
        Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
        const Eigen::VectorXd z = fm.map(x);
        CHECK(z.squaredNorm() <= 2.0 + 1e-12);
        CHECK(z.cwiseAbs().maxCoeff() <= cap + 1e-15);
    }
}

TEST_CASE("map, map_into and map_rows agree") {
    const FeatureMap fm = FeatureMap::build(2, 3, 8, 1.3);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
    const Eigen::MatrixXd rows = fm.map_rows(x);
    Eigen::VectorXd out(8);
    for (int i = 0; i < 6; ++i) {
        fm.map_into(x.row(i).transpose(), out);
        CHECK((rows.row(i).transpose() - fm.map(x.row(i).transpose())).norm() < 1e-14);
        CHECK((out - rows.row(i).transpose()).norm() < 1e-14);
    }
    CHECK_THROWS_AS(fm.map(Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("serialize round trip") {
    const FeatureMap fm = FeatureMap::build(99, 4, 20, 1.234567890123);
    const FeatureMap back = FeatureMap::deserialize(fm.serialize());
    CHECK(back.frequencies() == fm.frequencies());
    CHECK(back.phases() == fm.phases());
    CHECK(back.kernel_width() == fm.kernel_width());
    CHECK_THROWS_AS(FeatureMap::deserialize("garbage"), std::invalid_argument);
}

TEST_CASE("inner products approximate the Gaussian kernel on average") {
    // Independent oracle: the closed-form kernel against the mean over many
    // freshly drawn maps.
    const double sigma = 1.5;
    const Eigen::Vector4d x(0.2, -0.5, 0.9, 0.1), y(-0.3, 0.4, 0.6, -0.8);
    double mean = 0.0;
    const int maps = 2000;
    for (int s = 0; s < maps; ++s) {
        const FeatureMap fm = FeatureMap::build(1000 + s, 4, 64, sigma);
        mean += fm.map(x).dot(fm.map(y));
    }
    mean /= maps;
    const double k = std::exp(-(x - y).squaredNorm() / (2 * sigma * sigma));
    CHECK(std::abs(mean - k) < 0.02);
}

TEST_CASE("median heuristic on a hand example") {
    Eigen::MatrixXd s(3, 1);
    s << 0.0, 1.0, 3.0;  // distances 1, 3, 2
    CHECK(median_heuristic_width(s) == doctest::Approx(2.0));
    Eigen::MatrixXd t(4, 1);
    t << 0.0, 1.0, 2.0, 4.0;  // 1 2 4 1 3 2 -> median of {1,1,2,2,3,4} = 2
    CHECK(median_heuristic_width(t) == doctest::Approx(2.0));
    CHECK_THROWS(median_heuristic_width(Eigen::MatrixXd::Zero(1, 2)));
}

TEST_CASE("one map is shared by construction") {
    const FeatureMap server = FeatureMap::build(7, 4, 16, 1.0);
    const FeatureMap client = FeatureMap::deserialize(server.serialize());
    const Eigen::Vector4d probe(0.1, 0.2, 0.3, 0.4);
    CHECK(server.map(probe) == client.map(probe));
}

}
