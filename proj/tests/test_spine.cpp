#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "brw/spine.hpp"

using namespace brw;

static double W_of(const std::vector<double>& pos)
{
    double w = 0;
    for (double v : pos) w += std::exp(-v);
    return w;
}

TEST_CASE("spine_step_law shapes") {
    auto db = OffspringLaw::discrete_binary();
    auto sdb = spine_step_law(db);
    // aggregate: +h and -h each with probability 1/2
    std::map<long, double> agg;
    for (const auto& o : sdb.table) agg[std::lround(o.dS / db.lat_h)] += o.prob;
    CHECK(agg.size() == 2);
    CHECK(agg[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(agg[-1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(sdb.mean_step()) < 1e-9);
    for (const auto& o : sdb.table) CHECK(o.siblings.size() == 1);

    auto gb = spine_step_law(OffspringLaw::gauss_boundary());
    CHECK(gb.gaussian);
    CHECK(std::abs(gb.spine_mean) < 1e-12);
    CHECK(gb.spine_var == doctest::Approx(2.0 * std::log(2.0)));

    auto gw = spine_step_law(OffspringLaw::gw_atoms());
    CHECK(std::abs(gw.mean_step()) < 1e-9);
    // size-biasing removes the zero-offspring outcome: always one sibling
    for (const auto& o : gw.table) CHECK(o.siblings.size() == 1);

    CHECK_THROWS_AS(spine_step_law(OffspringLaw::gaussian_binary(0.0, 1.0)),
                    NotBoundary);
}

TEST_CASE("spine path is a fair walk") {
    auto db = OffspringLaw::discrete_binary();
    const int N = 100000;
    auto s = sample_spine(db, N, 31337u, 0);
    int up = 0;
    for (int k = 1; k <= N; ++k)
        if (s.path[k] > s.path[k - 1]) ++up;
    double z = (up - 0.5 * N) / std::sqrt(0.25 * N);
    CHECK(std::abs(z) < 4.0);
    // lag-1 increment correlation near zero
    double c = 0, m = 0;
    for (int k = 1; k <= N; ++k) m += s.path[k] - s.path[k - 1];
    m /= N;
    double v = 0;
    for (int k = 2; k <= N; ++k) {
        double a = s.path[k] - s.path[k - 1] - m;
        double b = s.path[k - 1] - s.path[k - 2] - m;
        c += a * b;
        v += a * a;
    }
    CHECK(std::abs(c / v) < 4.0 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("decorated samples") {
    auto db = OffspringLaw::discrete_binary();
    auto s0 = sample_spine(db, 0, 5u, 0, true);
    REQUIRE(s0.decorated_stats.has_value());
    CHECK(s0.decorated_stats->gens[0].w == 1.0);

    // E_Q[W_1] = E_P[W_1^2] = 2.5 for discrete-binary
    const int T = 20000;
    double sum = 0, sum2 = 0;
    for (int t = 0; t < T; ++t) {
        auto s = sample_spine(db, 1, 8181u, t, true);
        double w = s.decorated_stats->gens[1].w;
        CHECK(w > 0.0);
        sum += w;
        sum2 += w * w;
    }
    double mean = sum / T, se = std::sqrt((sum2 / T - mean * mean) / T);
    CHECK(std::abs(mean - 2.5) < 4 * se);

    // decorated W_n stays positive (the spine survives under Q)
    for (int t = 0; t < 200; ++t) {
        auto s = sample_spine(OffspringLaw::gw_atoms(), 6, 4242u, t, true);
        CHECK(s.decorated_stats->gens.back().w > 0.0);
    }
}

TEST_CASE("many_to_one identities") {
    auto db = OffspringLaw::discrete_binary();
    const double h = db.lat_h;
    auto [c0, e0] = many_to_one(db, 0, [](const std::vector<double>&) { return 3.25; },
                                10, 1u);
    CHECK(c0 == 3.25);
    CHECK(e0 == 0.0);

    auto [m1, se1] = many_to_one(db, 1,
                                 [](const std::vector<double>&) { return 1.0; },
                                 200000, 2u);
    CHECK(std::abs(m1 - 2.0) < 4 * se1);

    auto [m2, se2] = many_to_one(
        db, 2,
        [&](const std::vector<double>& p) { return std::abs(p[2] - 2 * h) < 1e-9 ? 1.0 : 0.0; },
        200000, 3u);
    double target = (7.0 + 4.0 * std::sqrt(3.0)) / 4.0;
    CHECK(std::abs(m2 - target) < 4 * se2);
}

TEST_CASE("q_vs_p battery") {
    std::vector<TreeFunctional> battery;
    battery.push_back([](const auto&) { return 1.0; });
    battery.push_back([](const auto& g) { return g.back().empty() ? 0.0 : 1.0; });
    battery.push_back([](const auto& g) { return W_of(g.back()); });
    battery.push_back([](const auto& g) { return std::min<double>(g.back().size(), 5.0); });
    battery.push_back([](const auto& g) {
        double m = 0;
        for (double v : g.back()) m = std::min(m, v);
        return std::exp(m);
    });
    battery.push_back([](const auto& g) { return g.back().size() >= 2 ? 1.0 : 0.0; });
    battery.push_back([](const auto& g) {
        double w = 0;
        for (double v : g.back()) w += std::exp(-2 * v);
        return std::min(w, 10.0);
    });
    battery.push_back([](const auto& g) {
        double m = 0;
        for (double v : g.back()) m = std::max(m, v);
        return std::exp(-m);
    });
    battery.push_back([](const auto& g) {
        bool pos = !g.back().empty();
        for (double v : g.back()) pos = pos && v > 0;
        return pos ? 1.0 : 0.0;
    });
    battery.push_back([](const auto& g) {
        double s = 0;
        for (const auto& lvl : g)
            for (double v : lvl) s += std::tanh(v);
        return s;
    });

    for (auto law : {OffspringLaw::discrete_binary(), OffspringLaw::gw_atoms()}) {
        for (int n = 1; n <= 3; ++n) {
            for (const auto& g : battery) {
                auto [lhs, rhs] = q_vs_p_consistency(law, n, g);
                CHECK(std::abs(lhs - rhs) < 1e-9);
            }
        }
    }
    // pinned value: g = W_1 on discrete-binary gives E[W_1^2] = 5/2
    auto [lhs, rhs] = q_vs_p_consistency(
        OffspringLaw::discrete_binary(), 1,
        [](const auto& g) { return W_of(g.back()); });
    CHECK(lhs == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(rhs == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("sibling count distribution under size biasing") {
    // gw-atoms: brood is size-biased, so the spine always has exactly one
    // brother; empirical decoration must never show an empty level-1 brood
    auto gw = OffspringLaw::gw_atoms();
    for (int t = 0; t < 500; ++t) {
        auto s = sample_spine(gw, 3, 606u, t);
        for (const auto& sibs : s.sibling_sets) CHECK(sibs.size() == 1);
    }
}
