#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brw/exact.hpp"
#include "brw/rwtools.hpp"

using namespace brw;

TEST_CASE("median minimal position recursion")
{
    // n = 1: min = -h w.p. 1 - p^2 ~ 0.129, else +h; median is +h with the
    // interpolation landing inside the atom gap
    auto m = exact::min_medians({64, 128, 256, 512, 1024});
    // frozen from an independent implementation of the same recursion
    CHECK(m[64] == doctest::Approx(5.1045).epsilon(1e-3));
    CHECK(m[1024] == doctest::Approx(9.7016).epsilon(1e-3));

    // slope of median against log n (not log-log: the statistic grows like
    // (3/2) log n), computed directly
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [n, v] : m) {
        double x = std::log(n);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    double k = m.size();
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    CHECK(slope == doctest::Approx(1.656).epsilon(0.005));
}

TEST_CASE("Laplace transform recursion and Gaver-Stehfest medians")
{
    // chi_0(t) = e^{-t}
    auto c0 = exact::chi(0, {0.5, 1.0, 2.0}, 1.0);
    CHECK(c0[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(c0[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // chi_1 against the four-leaf enumeration E e^{-t W_1}
    double h = std::acosh(2.0), p = (2 + std::sqrt(3.0)) / 4.0;
    double t = 0.7;
    double direct = 0.0;
    for (int c1 : {0, 1})
        for (int c2 : {0, 1}) {
            double pr = (c1 ? p : 1 - p) * (c2 ? p : 1 - p);
            double w = std::exp(-(c1 ? h : -h)) + std::exp(-(c2 ? h : -h));
            direct += pr * std::exp(-t * w);
        }
    CHECK(exact::chi(1, {t}, 1.0)[0] == doctest::Approx(direct).epsilon(1e-12));

    // frozen medians of W_n (small n cross-checked against MC during
    // development: 0.173 / 0.154 / 0.125)
    CHECK(exact::gs_quantile(12, 1.0) == doctest::Approx(0.16846).epsilon(2e-4));
    CHECK(exact::gs_quantile(16, 1.0) == doctest::Approx(0.14179).epsilon(2e-4));
    CHECK(exact::gs_quantile(20, 1.0) == doctest::Approx(0.12458).epsilon(2e-4));
    CHECK(exact::gs_quantile(64, 1.0) == doctest::Approx(0.067343).epsilon(2e-4));
    CHECK(exact::gs_quantile(1024, 1.0) == doctest::Approx(0.017345).epsilon(2e-4));
    CHECK(exact::gs_quantile(64, 2.0) == doctest::Approx(2.8396e-05).epsilon(1e-3));
}

TEST_CASE("fractional moments of W and the Seneta-Heyde norming")
{
    // E W_n^{1/2} -> lambda_n = m^{-2}; frozen lambda_n / sqrt(n)
    double m64 = exact::frac_moment(64, 1.0, 0.5, -55.0, 40.0);
    double m256 = exact::frac_moment(256, 1.0, 0.5, -55.0, 40.0);
    CHECK(1.0 / (m64 * m64) / std::sqrt(64.0) == doctest::Approx(0.7398).epsilon(1e-3));
    CHECK(1.0 / (m256 * m256) / std::sqrt(256.0) == doctest::Approx(0.7124).epsilon(1e-3));

    // E[W_{n,2}^{1/4}] at n = 64, frozen
    double b64 = exact::frac_moment(64, 2.0, 0.25, -80.0, 75.0);
    CHECK(b64 == doctest::Approx(0.12096).epsilon(1e-3));

    // E W_0^r = 1 for the single root at the origin
    CHECK(exact::frac_moment(0, 1.0, 0.5, -55.0, 40.0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("W* moment recursion converges to the fixed-point transform")
{
    auto law = OffspringLaw::discrete_binary();
    auto tab = solve_phi(law);

    // E[(W_n*)^s] is constant in n at s = 1 (martingale) and converges to
    // phi(s) for the other exponents; frozen gaps at n = 200
    double v1 = exact::wstar_moment(tab, 1.0, 200);
    CHECK(std::abs(v1 - 0.5) < 1e-6);

    double v05 = exact::wstar_moment(tab, 0.5, 200);
    CHECK(v05 - tab.eval(0.5) == doctest::Approx(5.57e-3).epsilon(0.05));

    double v2 = exact::wstar_moment(tab, 2.0, 200);
    CHECK(v2 - tab.eval(2.0) == doctest::Approx(-6.42e-3).epsilon(0.05));

    // martingale property holds at every n, not just in the limit
    CHECK(std::abs(exact::wstar_moment(tab, 1.0, 25) - 0.5) < 1e-6);
}
