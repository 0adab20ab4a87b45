#include "doctest.h"
#include "oracles.hpp"

#include "pmlp/density.hpp"
#include "pmlp/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace pmlp;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

FeatureMatrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> flat;
    std::size_t dim = 0;
    for (const auto& r : rows) {
        dim = r.size();
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return FeatureMatrix(rows.size(), dim, flat);
}

void check_point(const Vector& p, double x, double y) {
    CHECK(p(0) == doctest::Approx(x).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(y).epsilon(1e-12));
}

}  // namespace

TEST_CASE("sample_path examples") {
    const FeatureMatrix f = rows_of({{0, 0}, {4, 0}, {2, 2}, {1, 1}, {1, 5}});
    const PathSample a = sample_path(f, 0, 1, 3);
    REQUIRE(a.points.size() == 3);
    check_point(a.points[0], 1, 0);
    check_point(a.points[1], 2, 0);
    check_point(a.points[2], 3, 0);

    const PathSample mid = sample_path(f, 0, 2, 1);
    REQUIRE(mid.points.size() == 1);
    CHECK(mid.points[0](0) == 1.0);
    CHECK(mid.points[0](1) == 1.0);

    const PathSample b = sample_path(f, 3, 4, 2);
    REQUIRE(b.points.size() == 2);
    CHECK(std::abs(b.points[0](1) - 7.0 / 3.0) < 1e-9);
    CHECK(std::abs(b.points[1](1) - 11.0 / 3.0) < 1e-9);
    CHECK(b.points[0](0) == 1.0);
}

TEST_CASE("sample_path errors") {
    const FeatureMatrix f = rows_of({{0, 0}, {1, 1}});
    CHECK_THROWS_AS(sample_path(f, 1, 1, 1), Error);
    CHECK_THROWS_AS(sample_path(f, 0, 2, 1), Error);
    CHECK_THROWS_AS(sample_path(f, 0, 1, 0), Error);
}

TEST_CASE("sample_path points lie on the segment, reversed for swapped endpoints") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(0.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const FeatureMatrix f(2, 3, {normal(gen), normal(gen), normal(gen), normal(gen), normal(gen), normal(gen)});
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 7);
        const PathSample fwd = sample_path(f, 0, 1, k);
        const PathSample rev = sample_path(f, 1, 0, k);
        for (std::size_t l = 1; l <= k; ++l) {
            const double frac = static_cast<double>(l) / static_cast<double>(k + 1);
            const Vector expected = f.row(0) + frac * (f.row(1) - f.row(0));
            CHECK((fwd.points[l - 1] - expected).cwiseAbs().maxCoeff() < 1e-9);
            CHECK(fwd.points[l - 1] == rev.points[k - l]);
        }
    }
}

TEST_CASE("kde_density examples") {
    CHECK(kde_density(vec({0, 0}), {vec({0, 0})}, 1.0) == 1.0);
    const double expected = 0.25 * 2.0 * std::exp(-0.5);
    CHECK(std::abs(kde_density(vec({0, 0}), {vec({1, 0}), vec({0, 1})}, 2.0) - expected) < 1e-15);
    CHECK(kde_density(vec({0, 0}), {vec({1, 0}), vec({0, 1})}, 2.0) == doctest::Approx(0.303265).epsilon(1e-6));

    // large h: raw density -> 0, normalized -> 1
    const double h = 1e12;
    CHECK(kde_density(vec({0, 0}), {vec({1, 0})}, h) < 1e-11);
    CHECK(std::abs(kde_density_normalized(vec({0, 0}), {vec({1, 0})}, h) - 1.0) < 1e-6);
}

TEST_CASE("kde_density_normalized examples") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> normal(0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vector> supports;
        for (int m = 0; m < 5; ++m) supports.push_back(vec({normal(gen), normal(gen)}));
        CHECK(std::abs(kde_density_normalized(vec({normal(gen), normal(gen)}), supports, 1e12) - 1.0) < 1e-6);
    }
    const double expected = 2.0 * 0.25 * 2.0 * std::exp(-0.5);
    CHECK(std::abs(kde_density_normalized(vec({0, 0}), {vec({1, 0}), vec({0, 1})}, 2.0) - expected) < 1e-15);
    CHECK(kde_density_normalized(vec({0, 0}), {vec({1, 0}), vec({0, 1})}, 2.0) ==
          doctest::Approx(0.606531).epsilon(1e-6));
    for (double hh : {1e-3, 1.0, 1e6}) {
        CHECK(kde_density_normalized(vec({3, -1}), {vec({3, -1})}, hh) == 1.0);
    }
}

TEST_CASE("kde errors") {
    CHECK_THROWS_AS(kde_density(vec({0, 0}), {}, 1.0), Error);
    CHECK_THROWS_AS(kde_density(vec({0, 0}), {vec({1, 0})}, 0.0), Error);
    CHECK_THROWS_AS(kde_density(vec({0, 0}), {vec({1, 0})}, -1.0), Error);
    CHECK_THROWS_AS(kde_density(vec({0, 0}), {vec({1, 0, 0})}, 1.0), Error);
    CHECK_THROWS_AS(kde_density_normalized(vec({0, 0}), {}, 1.0), Error);
}

TEST_CASE("kde matches the brute-force oracle on random inputs") {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = 1 + gen() % 5;
        const std::size_t n = 1 + gen() % 20;
        const double h = std::pow(10.0, -1.0 + 3.0 * unit(gen));
        std::vector<double> q(dim);
        for (auto& x : q) x = normal(gen);
        oracle::Rows sup(n, std::vector<double>(dim));
        for (auto& r : sup)
            for (auto& x : r) x = normal(gen);

        Vector qv(static_cast<Eigen::Index>(dim));
        for (std::size_t d = 0; d < dim; ++d) qv(static_cast<Eigen::Index>(d)) = q[d];
        std::vector<Vector> sv;
        for (const auto& r : sup) {
            Vector v(static_cast<Eigen::Index>(dim));
            for (std::size_t d = 0; d < dim; ++d) v(static_cast<Eigen::Index>(d)) = r[d];
            sv.push_back(v);
        }
        const double expected = oracle::kde(q, sup, h);
        CHECK(std::abs(kde_density(qv, sv, h) - expected) < 1e-12);
        CHECK(std::abs(kde_density_normalized(qv, sv, h) - expected * h) < 1e-12);
    }
}

TEST_CASE("normalized kde lies in (0,1] and is non-decreasing in h") {
    std::mt19937_64 gen(99);
    std::normal_distribution<double> normal(0.0, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vector> supports;
        for (int m = 0; m < 6; ++m) supports.push_back(vec({normal(gen), normal(gen)}));
        const Vector q = vec({normal(gen), normal(gen)});
        double previous = 0.0;
        for (double h : {0.1, 0.5, 1.0, 2.0, 5.0, 50.0, 1e4}) {
            const double v = kde_density_normalized(q, supports, h);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v >= previous);
            previous = v;
        }
    }
}

TEST_CASE("select_kde_supports examples") {
    const FeatureMatrix f = rows_of({{0, 0}, {1, 0}, {5, 0}});
    const auto two = select_kde_supports(f, vec({0.4, 0}), 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == vec({0, 0}));
    CHECK(two[1] == vec({1, 0}));
    CHECK(select_kde_supports(f, vec({0.4, 0}), 3).size() == 3);
    CHECK_THROWS_AS(select_kde_supports(f, vec({0.4, 0}), 4), Error);

    // rows 2 and 7 equidistant from the query
    std::vector<double> flat;
    for (int r = 0; r < 9; ++r) {
        if (r == 2) {
            flat.insert(flat.end(), {-1.0, 0.0});
        } else if (r == 7) {
            flat.insert(flat.end(), {1.0, 0.0});
        } else {
            flat.insert(flat.end(), {10.0 + r, 10.0});
        }
    }
    const FeatureMatrix tie(9, 2, flat);
    const auto order = nearest_rows(tie, vec({0, 0}), 2);
    CHECK(order == std::vector<std::size_t>{2, 7});
}

TEST_CASE("nearest_rows matches an exhaustive sort") {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> coarse(0, 4);  // lattice values force ties
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 5 + static_cast<std::size_t>(trial % 20);
        oracle::Rows data(rows, std::vector<double>(2));
        std::vector<double> flat;
        for (auto& r : data) {
            for (auto& x : r) {
                x = coarse(gen);
                flat.push_back(x);
            }
        }
        const FeatureMatrix f(rows, 2, flat);
        const std::vector<double> q{static_cast<double>(coarse(gen)), static_cast<double>(coarse(gen))};
        const std::size_t n = 1 + static_cast<std::size_t>(trial) % rows;
        CHECK(nearest_rows(f, vec({q[0], q[1]}), n) == oracle::nearest(data, q, n));
    }
}

TEST_CASE("aggregate_density examples") {
    const std::vector<double> a{1, 2, 3};
    CHECK(aggregate_density(a, Aggregator::avg()) == 2.0);
    CHECK(aggregate_density(a, Aggregator::quantile(0.5)) == 2.0);
    const std::vector<double> b{4, 1, 9, 16};
    CHECK(aggregate_density(b, Aggregator::min()) == 1.0);
    CHECK(aggregate_density(b, Aggregator::max()) == 16.0);
    CHECK(aggregate_density(b, Aggregator::quantile(0.5)) == 6.5);
    CHECK(aggregate_density(b, Aggregator::quantile(0.25)) == doctest::Approx(3.25));
    CHECK_THROWS_AS(aggregate_density(std::vector<double>{}, Aggregator::avg()), Error);
}

TEST_CASE("aggregators are ordered and order-invariant") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> v(1 + gen() % 12);
        for (auto& x : v) x = unit(gen);
        const double lo = aggregate_density(v, Aggregator::min());
        const double hi = aggregate_density(v, Aggregator::max());
        const double t = 0.01 + 0.98 * unit(gen);
        const double q = aggregate_density(v, Aggregator::quantile(t));
        CHECK(lo <= q);
        CHECK(q <= hi);
        std::vector<double> shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        for (const auto& agg : {Aggregator::min(), Aggregator::max(), Aggregator::avg(), Aggregator::quantile(t)}) {
            CHECK(aggregate_density(v, agg) == aggregate_density(shuffled, agg));
        }
    }
}

TEST_CASE("path_density_info examples") {
    const SyntheticDataset ds = gen_gaussian_blobs({{0, 0}, {8, 0}}, 1.0, 60, 0, 31);
    PmlpConfig cfg;
    cfg.bandwidth_h = 1e12;
    cfg.path_points_k = 3;
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(std::abs(path_density_info(ds.features, i, 119 - i, cfg) - 1.0) < 1e-6);
    }

    // within-blob pair vs cross-blob pair, checked against the oracle first
    cfg.bandwidth_h = 1.0;
    cfg.path_points_k = 1;
    cfg.kde_support_n = 10;
    const oracle::Rows all = oracle::to_rows(ds.features.data());
    auto oracle_info = [&](std::size_t i, std::size_t j) {
        std::vector<double> mid(2);
        for (int d = 0; d < 2; ++d) mid[d] = all[i][d] + 0.5 * (all[j][d] - all[i][d]);
        oracle::Rows sup;
        for (std::size_t r : oracle::nearest(all, mid, cfg.kde_support_n)) sup.push_back(all[r]);
        return oracle::kde(mid, sup, cfg.bandwidth_h) * cfg.bandwidth_h;
    };
    const double within = path_density_info(ds.features, 0, 1, cfg);
    const double cross = path_density_info(ds.features, 0, 60, cfg);
    CHECK(std::abs(within - oracle_info(0, 1)) < 1e-12);
    CHECK(std::abs(cross - oracle_info(0, 60)) < 1e-12);
    CHECK(within > cross);
}

TEST_CASE("path_density_info is symmetric and matches the batch form") {
    const SyntheticDataset ds = gen_gaussian_blobs({{0, 0}, {4, 1}}, 1.0, 30, 0, 17);
    std::mt19937_64 gen(4);
    for (const auto& agg : {Aggregator::min(), Aggregator::max(), Aggregator::avg(), Aggregator::quantile(0.3)}) {
        PmlpConfig cfg;
        cfg.aggregator = agg;
        cfg.path_points_k = 4;
        cfg.kde_support_n = 7;
        cfg.bandwidth_h = 0.7;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (int t = 0; t < 40; ++t) {
            const std::size_t i = gen() % 60;
            std::size_t j = gen() % 60;
            if (j == i) j = (i + 1) % 60;
            pairs.emplace_back(i, j);
            CHECK(path_density_info(ds.features, i, j, cfg) == path_density_info(ds.features, j, i, cfg));
        }
        const auto batch = path_density_info_batch(ds.features, pairs, cfg);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            CHECK(batch[p] == path_density_info(ds.features, pairs[p].first, pairs[p].second, cfg));
        }
    }
}

TEST_CASE("density_ratio examples") {
    // coincident supports: every query sees the same single point
    const FeatureMatrix same = rows_of({{1, 1}, {1, 1}, {1, 1}});
    PmlpConfig cfg;
    cfg.kde_support_n = 2;
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}, {1, 2}, {0, 2}};
    CHECK(density_ratio(same, pairs, cfg) == 1.0);

    const SyntheticDataset ds = gen_gaussian_blobs({{0, 0}, {6, 0}}, 1.0, 80, 0, 77);
    const auto rp = random_pairs(160, 200, 78);
    cfg.kde_support_n = 10;
    cfg.bandwidth_h = 1e12;
    const double r_inf = density_ratio(ds.features, rp, cfg);
    CHECK(r_inf >= 1.0);
    CHECK(r_inf <= 1.0 + 1e-3);

    // oracle ratio at h=5 and h=100
    const oracle::Rows all = oracle::to_rows(ds.features.data());
    auto oracle_ratio = [&](double h) {
        double lo = INFINITY, hi = 0.0;
        for (const auto& [i, j] : rp) {
            std::vector<double> mid(2);
            for (int d = 0; d < 2; ++d) mid[d] = 0.5 * (all[i][d] + all[j][d]);
            oracle::Rows sup;
            for (std::size_t r : oracle::nearest(all, mid, 10)) sup.push_back(all[r]);
            const double v = oracle::kde(mid, sup, h) * h;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi / lo;
    };
    cfg.bandwidth_h = 5.0;
    const double r5 = density_ratio(ds.features, rp, cfg);
    cfg.bandwidth_h = 100.0;
    const double r100 = density_ratio(ds.features, rp, cfg);
    CHECK(r5 == doctest::Approx(oracle_ratio(5.0)).epsilon(1e-12));
    CHECK(r100 == doctest::Approx(oracle_ratio(100.0)).epsilon(1e-12));
    CHECK(r5 > r100);
    CHECK(r100 > r_inf);

    CHECK_THROWS_AS(density_ratio(ds.features, std::vector<std::pair<std::size_t, std::size_t>>{}, cfg), Error);
}

TEST_CASE("density_ratio rejects a zero minimum") {
    // points far apart with a tiny bandwidth underflow the kernel to zero
    const FeatureMatrix f = rows_of({{0, 0}, {1000, 0}, {2000, 0}});
    PmlpConfig cfg;
    cfg.kde_support_n = 1;
    cfg.bandwidth_h = 1e-3;
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}};
    try {
        density_ratio(f, pairs, cfg);
        FAIL("expected zero density error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDensity);
    }
}
