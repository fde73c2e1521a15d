#include "brw/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brw {
namespace exact {

namespace {

const double kH = std::acosh(2.0);          // lattice step
const double kP = (2.0 + std::sqrt(3.0)) / 4.0; // probability of the +h atom
const double kQ = 1.0 - kP;

double comb(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Gaver-Stehfest coefficients zeta_1..zeta_M (M even)
std::vector<double> gs_weights(int M)
{
    std::vector<double> zeta(M);
    double half_fact = 1.0;
    for (int i = 2; i <= M / 2; ++i) half_fact *= i;
    for (int k = 1; k <= M; ++k) {
        double s = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, M / 2); ++j)
            s += std::pow(static_cast<double>(j), M / 2 + 1) / half_fact *
                 comb(M / 2, j) * comb(2 * j, j) * comb(j, k - j);
        zeta[k - 1] = (((k + M / 2) % 2) ? -1.0 : 1.0) * s;
    }
    return zeta;
}

} // namespace

std::map<int, double> min_medians(const std::vector<int>& ns, double q)
{
    int nmax = *std::max_element(ns.begin(), ns.end());
    const std::size_t size = 2 * static_cast<std::size_t>(nmax) + 3;
    const long long off = nmax + 1;
    // F[j] = P(min over the first n generations <= (j - off) h)
    std::vector<double> F(size, 0.0), A(size);
    for (std::size_t j = off; j < size; ++j) F[j] = 1.0;
    std::map<int, double> out;
    for (int n = 1; n <= nmax; ++n) {
        for (std::size_t j = 0; j < size; ++j) {
            double fm = (j > 0) ? F[j - 1] : 0.0;
            double fp = (j + 1 < size) ? F[j + 1] : 1.0;
            A[j] = kP * fm + kQ * fp;
        }
        for (std::size_t j = 0; j < size; ++j) F[j] = A[j] * (2.0 - A[j]);
        if (std::find(ns.begin(), ns.end(), n) != ns.end()) {
            std::size_t j = 0;
            while (j < size && F[j] < q) ++j;
            double frac = (q - F[j - 1]) / (F[j] - F[j - 1]);
            out[n] = (static_cast<double>(j) - 1 + frac - off) * kH;
        }
    }
    return out;
}

std::vector<double> chi(int n, const std::vector<double>& t0, double beta)
{
    const double bh = beta * kH;
    std::vector<double> out(t0.size());
    std::vector<double> L(2 * n + 3), next(2 * n + 3);
    for (std::size_t c = 0; c < t0.size(); ++c) {
        double lt = std::log(t0[c]);
        for (int j = -(n + 1); j <= n + 1; ++j)
            L[j + n + 1] = std::exp(lt + bh * j); // overflow to inf = chi 0
        std::size_t len = L.size();
        for (int m = 0; m < n; ++m) {
            for (std::size_t i = 0; i + 2 < len; ++i) {
                double Lm = L[i], Lp = L[i + 2];
                double S = kP * std::exp(-Lm) + kQ * std::exp(-Lp);
                if (S > 0.9) {
                    double D = kP * (-std::expm1(-Lm)) + kQ * (-std::expm1(-Lp));
                    next[i] = -2.0 * std::log1p(-D);
                } else {
                    next[i] = -2.0 * std::log(std::max(S, 1e-300));
                }
            }
            len -= 2;
            L.swap(next);
        }
        out[c] = std::exp(-L[1]);
    }
    return out;
}

double gs_cdf(int n, double w, double beta, int M)
{
    auto zeta = gs_weights(M);
    double a = std::log(2.0) / w;
    std::vector<double> ts(M);
    for (int k = 1; k <= M; ++k) ts[k - 1] = k * a;
    auto c = chi(n, ts, beta);
    double s = 0.0;
    for (int k = 1; k <= M; ++k) s += zeta[k - 1] * c[k - 1] / k;
    return s;
}

double gs_quantile(int n, double beta, double q, int M)
{
    double lo = -120.0, hi = 20.0; // bisection in log w
    for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        if (gs_cdf(n, std::exp(mid), beta, M) < q)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double frac_moment(int n, double beta, double r, double x_lo, double x_hi, double dx)
{
    std::vector<double> xs;
    for (double x = x_lo; x <= x_hi + 1e-12; x += dx) xs.push_back(x);
    std::vector<double> ts(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ts[i] = std::exp(xs[i]);
    auto c = chi(n, ts, beta);
    double integral = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = (1.0 - c[i]) * std::exp(-r * xs[i]);
        if (i > 0) integral += 0.5 * (prev + v) * dx;
        prev = v;
    }
    return integral * r / std::tgamma(1.0 - r);
}

double wstar_moment(const PhiTable& tab, double s, int n, int J)
{
    const std::size_t m = 2 * static_cast<std::size_t>(J) + 1;
    std::vector<double> a(m), G(m), Gm(m), Gp(m);
    for (std::size_t j = 0; j < m; ++j) {
        a[j] = (static_cast<double>(j) - J) * kH;
        // G = 1 - phi(e^{-a})^s, with relative precision deep in the tail
        double om = std::min(tab.one_minus(std::exp(-std::min(a[j], 700.0))), 1.0);
        G[j] = (om >= 1.0) ? 1.0 : -std::expm1(s * std::log1p(-om));
    }
    for (int step = 0; step < n; ++step) {
        for (std::size_t j = 0; j + 1 < m; ++j) Gm[j] = G[j + 1];
        // above-grid fill via the tail form G ~ (A + B a) e^{-a}, refitted
        // from the top rows each step (u = G e^{a} computed in log space)
        std::size_t i0 = m - 1, i1 = m - 1 - 16;
        if (G[i0] > 0.0 && G[i1] > 0.0) {
            double u0 = std::exp(a[i0] + std::log(G[i0]));
            double u1 = std::exp(a[i1] + std::log(G[i1]));
            double B = (u0 - u1) / (a[i0] - a[i1]);
            double A = u0 - B * a[i0];
            double atop = a.back() + kH;
            Gm[m - 1] = std::max((A + B * atop) * std::exp(-atop), 0.0);
        } else {
            Gm[m - 1] = 0.0;
        }
        Gp[0] = 1.0;
        for (std::size_t j = 1; j < m; ++j) Gp[j] = G[j - 1];
        for (std::size_t j = 0; j < m; ++j) {
            double M2 = kP * Gm[j] + kQ * Gp[j];
            G[j] = M2 * (2.0 - M2);
        }
    }
    return 1.0 - G[J];
}

} // namespace exact
} // namespace brw
