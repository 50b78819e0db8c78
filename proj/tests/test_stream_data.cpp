#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "paofed/stream_data.hpp"

using namespace paofed;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_SUITE("stream_data") {

TEST_CASE("synth_target hand values") {
    const double a[4] = {0, 0, 0, 0};
    const double b[4] = {1, 0, 0, 0};
    const double c[4] = {0, 0, 1, 0.5};
    CHECK(synth_target(a, 0.0) == doctest::Approx(0.8));
    CHECK(synth_target(b, 0.0) == doctest::Approx(1.8));
    CHECK(synth_target(c, 0.0) == doctest::Approx(1.3));
    CHECK(synth_target(a, 0.25) == doctest::Approx(1.05));
    const double bad[3] = {0, 0, 0};
    CHECK_THROWS_AS(synth_target(bad, 0.0), std::invalid_argument);
}

TEST_CASE("synth_target against a direct formula") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double x[4] = {u(rng), u(rng), u(rng), u(rng)};
        const double s = std::sin(std::numbers::pi * x[3]);
        const double ref = std::sqrt(x[0] * x[0] + s * s) + 0.8 - 0.5 * std::exp(-x[1] * x[1]) * x[2];
        CHECK(synth_target(x, 0.0) == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("arrival iterations are evenly spaced") {
    CHECK(arrival_iterations(4, 8) == std::vector<int>{0, 2, 4, 6});
    CHECK(arrival_iterations(3, 10) == std::vector<int>{0, 3, 6});
    const auto all = arrival_iterations(5, 5);
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(arrival_iterations(0, 5).empty());
}

TEST_CASE("default plan layout") {
    StreamConfig cfg;
    const StreamPlan plan = build_stream_plan(cfg, 11);
    CHECK(plan.client_count() == 256);
    std::vector<int> per_group(4, 0);
    for (int k = 0; k < 256; ++k) {
        const int g = plan.data_group(k);
        ++per_group[static_cast<std::size_t>(g)];
        CHECK(static_cast<int>(plan.clients[static_cast<std::size_t>(k)].size()) == cfg.group_sizes[static_cast<std::size_t>(g)]);
    }
    CHECK(per_group == std::vector<int>{64, 64, 64, 64});
    CHECK(plan.total_samples() == 64u * (500 + 1000 + 1500 + 2000));
    for (int k = 0; k < 256; ++k) {
        if (plan.data_group(k) != 3) continue;
        const auto& ev = plan.clients[static_cast<std::size_t>(k)];
        for (int n = 0; n < 2000; ++n) CHECK_EQ(ev[static_cast<std::size_t>(n)].iteration, n);
    }
}

TEST_CASE("single group fills the horizon") {
    StreamConfig cfg;
    cfg.clients = 4;
    cfg.group_sizes = {50};
    cfg.horizon = 50;
    const StreamPlan plan = build_stream_plan(cfg, 1);
    for (const auto& c : plan.clients) CHECK(c.size() == 50u);
}

TEST_CASE("plan reproducibility and seed sensitivity") {
    StreamConfig cfg;
    cfg.clients = 8;
    cfg.horizon = 100;
    cfg.group_sizes = {25, 50, 75, 100};
    CHECK(build_stream_plan(cfg, 5).dump() == build_stream_plan(cfg, 5).dump());
    CHECK(build_stream_plan(cfg, 5).dump() != build_stream_plan(cfg, 6).dump());
}

TEST_CASE("plan argument errors") {
    StreamConfig cfg;
    cfg.clients = 10;
    CHECK_THROWS_AS(build_stream_plan(cfg, 1), std::invalid_argument);
    cfg.clients = 8;
    cfg.group_sizes = {3000};
    CHECK_THROWS_AS(build_stream_plan(cfg, 1), std::invalid_argument);
}

TEST_CASE("observation noise is independent of the inputs") {
    StreamConfig cfg;
    cfg.clients = 64;
    cfg.group_sizes = {2000};
    const StreamPlan plan = build_stream_plan(cfg, 21);
    std::vector<double> noise;
    std::vector<std::array<double, 4>> xs;
    for (const auto& c : plan.clients)
        for (const auto& e : c) {
            const double clean = synth_target(std::span<const double>(e.input.data(), 4), 0.0);
            noise.push_back(e.target - clean);
            xs.push_back({e.input(0), e.input(1), e.input(2), e.input(3)});
        }
    REQUIRE(noise.size() >= 100000u);
    const double n = static_cast<double>(noise.size());
    double mn = 0, vn = 0;
    for (double v : noise) mn += v;
    mn /= n;
    for (double v : noise) vn += (v - mn) * (v - mn);
    vn /= n;
    CHECK(vn == doctest::Approx(1e-2).epsilon(0.02));
    for (int c = 0; c < 4; ++c) {
        double mx = 0, vx = 0, cov = 0;
        for (const auto& x : xs) mx += x[static_cast<std::size_t>(c)];
        mx /= n;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double dx = xs[i][static_cast<std::size_t>(c)] - mx;
            vx += dx * dx;
            cov += dx * (noise[i] - mn);
        }
        CHECK(std::abs(cov / std::sqrt(vx * vn * n * n)) < 0.02);
    }
}

TEST_CASE("test sets") {
    const FeatureMap fm = FeatureMap::build(7, 4, 200, 1.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 4);
    Eigen::VectorXd y(1);
    y << 0.8;
    const TestSet one = make_test_set(fm, x, y);
    CHECK(one.size() == 1);
    CHECK(one.targets(0) == doctest::Approx(0.8));

    StreamConfig cfg;
    const TestSet t = build_test_set(fm, cfg, 2000, 3);
    CHECK(t.inputs.rows() == 2000);
    CHECK(t.inputs.cols() == 4);
    CHECK(t.targets.size() == 2000);
    CHECK(t.mapped.rows() == 2000);
    CHECK(t.mapped.cols() == 200);
    CHECK(t.mapped.rowwise().squaredNorm().maxCoeff() <= 2.0 + 1e-12);
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd xi = t.inputs.row(i).transpose();
        CHECK(t.targets(i) == doctest::Approx(synth_target(std::span<const double>(xi.data(), 4), 0.0)));
    }
}

TEST_CASE("csv parsing") {
    const auto rows = parse_csv("a,b\n1,\"x,y\"\n\"q\"\"r\",3\r\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][1] == "x,y");
    CHECK(rows[2][0] == "q\"r");
    CHECK(rows[2][1] == "3");
}

TEST_CASE("csv min-max endpoints") {
    const auto path = write_temp("paofed_two_rows.csv", "f,y\n2,1\n6,0\n");
    CsvStreamOptions opt;
    opt.path = path.string();
    opt.feature_columns = {"f"};
    opt.target_column = "y";
    opt.normalization = Normalization::min_max;
    opt.test_fraction = 0.0;
    opt.clients = 1;
    opt.group_weights = {1};
    const CsvDataset ds = load_csv_stream(opt, 1);
    std::vector<double> xs;
    for (const auto& e : ds.plan.clients[0]) xs.push_back(e.input(0));
    std::sort(xs.begin(), xs.end());
    REQUIRE(xs.size() == 2u);
    CHECK(xs[0] == doctest::Approx(-1.0));
    CHECK(xs[1] == doctest::Approx(1.0));
}

TEST_CASE("csv split arithmetic and dropped rows") {
    std::string text = "a,b,t\n";
    for (int i = 0; i < 1000; ++i) text += std::to_string(i) + "," + std::to_string(i % 7) + "," + std::to_string(i * 0.5) + "\n";
    text += "1,,3\nx,2,3\n";
    const auto path = write_temp("paofed_split.csv", text);
    CsvStreamOptions opt;
    opt.path = path.string();
    opt.feature_columns = {"a", "b"};
    opt.target_column = "t";
    opt.clients = 8;
    opt.group_weights = {1, 1};
    const CsvDataset ds = load_csv_stream(opt, 4);
    CHECK(ds.dropped_rows == 2u);
    CHECK(ds.test_targets.size() == 100);
    CHECK(ds.plan.total_samples() == 900u);
}

TEST_CASE("csv errors are distinct") {
    CsvStreamOptions opt;
    opt.path = "/nonexistent/paofed.csv";
    opt.feature_columns = {"a"};
    opt.target_column = "t";
    try {
        load_csv_stream(opt, 1);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::file_not_found);
    }
    opt.path = write_temp("paofed_cols.csv", "a,b\n1,2\n").string();
    try {
        load_csv_stream(opt, 1);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::missing_column);
    }
    opt.path = write_temp("paofed_empty.csv", "a,t\nx,1\n,2\n").string();
    try {
        load_csv_stream(opt, 1);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::no_usable_rows);
    }
}

}
