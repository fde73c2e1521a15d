#include "brw/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace brw {

namespace {

constexpr int kGaussHermiteNodes = 64;

// physicists' Gauss-Hermite rule (weight e^{-z^2}) by Newton iteration on the
// three-term recurrence
struct GaussHermite {
    std::vector<double> z, w;
    explicit GaussHermite(int n)
    {
        z.resize(n);
        w.resize(n);
        const double pi_qtr = std::pow(M_PI, -0.25);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double r;
            if (i == 0)
                r = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
            else if (i == 1)
                r = z[n - 1] - 1.14 * std::pow(n, 0.426) / z[n - 1];
            else if (i == 2)
                r = 1.86 * z[n - 2] - 0.86 * z[n - 1];
            else if (i == 3)
                r = 1.91 * z[n - 3] - 0.91 * z[n - 2];
            else
                r = 2.0 * z[n - i] - z[n - i + 1];
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = pi_qtr, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = r * std::sqrt(2.0 / (j + 1)) * p2 -
                         std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
                }
                dp = std::sqrt(2.0 * n) * p2;
                double dr = p1 / dp;
                r -= dr;
                if (std::abs(dr) < 1e-15) break;
            }
            w[n - 1 - i] = 2.0 / (dp * dp);
            w[i] = w[n - 1 - i];
            z[n - 1 - i] = r;
            z[i] = -r;
        }
    }
};

const GaussHermite& gh64()
{
    static GaussHermite g(kGaussHermiteNodes);
    return g;
}

double eval_phi_arg(const PhiTable& phi, double t) { return phi.eval(t); }

} // namespace

void PhiTable::finalize()
{
    const std::size_t m = x.size();
    if (m < 8) throw DomainError("PhiTable: grid too small");
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) {
        double L = std::log(1.0 / std::max(phi[i], 1e-300));
        z[i] = std::log(std::max(L, 1e-300));
    }
    zfit_ = MonotoneCubic(x, z);

    // bottom: 1 - phi = e^x (A - B x), two-row fit low on the grid
    // (second row a few e-folds up, where 1 - phi is still small)
    std::size_t j2 = m - 1;
    for (std::size_t i = 1; i < m; ++i)
        if (x[i] - x[0] >= 4.5) {
            j2 = i;
            break;
        }
    double y0 = (1.0 - phi[0]) * std::exp(-x[0]);
    double y1 = (1.0 - phi[j2]) * std::exp(-x[j2]);
    ext_B = (y0 - y1) / (x[j2] - x[0]);
    ext_A = y0 + ext_B * x[0];

    // top: phi = q + C e^{-r x}, fitted over the top decade where phi > q
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    double cut = x.back() - std::log(10.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (x[i] < cut || phi[i] <= q) continue;
        double lx = x[i], ly = std::log(phi[i] - q);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    ext_C = 0.0;
    ext_r = 0.0;
    if (cnt >= 3) {
        double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        double icpt = (sy - slope * sx) / cnt;
        // accept only a sane power-law decay; otherwise fall back to the
        // constant top value
        if (slope < 0.0 && slope > -100.0 && std::abs(icpt) < 300.0) {
            ext_r = -slope;
            ext_C = std::exp(icpt);
        }
    }
}

double PhiTable::eval(double t) const
{
    if (!(t > 0.0)) throw PhiRangeError("phi argument must be positive");
    double u = std::log(t) + scale;
    if (u < x.front()) return 1.0 - std::exp(u) * (ext_A - ext_B * u);
    if (u > x.back()) {
        if (ext_C > 0.0) return q + ext_C * std::exp(-ext_r * u);
        return phi.back();
    }
    double L = std::exp(std::min(zfit_(u), 700.0));
    return std::exp(-L);
}

double PhiTable::log_inv(double t) const
{
    if (!(t > 0.0)) throw PhiRangeError("phi argument must be positive");
    double u = std::log(t) + scale;
    if (u < x.front()) {
        double om = std::exp(u) * (ext_A - ext_B * u);
        return -std::log1p(-om);
    }
    if (u > x.back()) return -std::log(eval(t));
    return std::exp(std::min(zfit_(u), 700.0));
}

double PhiTable::one_minus(double t) const
{
    if (!(t > 0.0)) throw PhiRangeError("phi argument must be positive");
    double u = std::log(t) + scale;
    if (u < x.front()) return std::exp(u) * (ext_A - ext_B * u);
    if (u > x.back()) return 1.0 - eval(t);
    double L = std::exp(std::min(zfit_(u), 700.0));
    return -std::expm1(-L);
}

double smoothing_operator(const OffspringLaw& law, const PhiTable& phi, double t)
{
    switch (law.kind) {
    case LawKind::GaussianBinary: {
        const auto& g = gh64();
        double f = 0.0;
        double s = std::sqrt(2.0 * law.sigma2);
        for (int i = 0; i < kGaussHermiteNodes; ++i)
            f += g.w[i] * eval_phi_arg(phi, t * std::exp(-(law.mu + s * g.z[i])));
        f /= std::sqrt(M_PI);
        return f * f;
    }
    case LawKind::DiscreteAtoms: {
        double f = 0.0;
        for (const auto& a : law.atoms) f += a.prob * phi.eval(t * std::exp(-a.v));
        return law.pgf(f);
    }
    case LawKind::JointAtoms: {
        double acc = 0.0;
        for (const auto& b : law.broods) {
            double prod = 1.0;
            for (double v : b.disp) prod *= phi.eval(t * std::exp(-v));
            acc += b.prob * prod;
        }
        return acc;
    }
    }
    throw DomainError("unknown law kind");
}

namespace {

// bisection for the shift making the interpolated phi equal 1/2 at t = e^{la}
double find_scale(const std::vector<double>& x, const std::vector<double>& phi)
{
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double L = std::log(1.0 / std::max(phi[i], 1e-300));
        z[i] = std::log(std::max(L, 1e-300));
    }
    MonotoneCubic f(x, z);
    double lo = x.front(), hi = x.back();
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        double val = std::exp(-std::exp(std::min(f(mid), 700.0)));
        if (val > 0.5)
            lo = mid; // phi decreasing: still above 1/2, move right
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct LatticeSolver {
    const OffspringLaw& law;
    double q;
    int K;
    std::vector<double> x;
    int m = 0;

    // distinct integer lattice shifts appearing in any brood
    std::vector<std::pair<long, double>> atom_shift; // DiscreteAtoms: (shift, prob)
    struct ShiftBrood {
        std::vector<long> shifts;
        double prob;
    };
    std::vector<ShiftBrood> broods; // JointAtoms

    LatticeSolver(const OffspringLaw& l, double q_, double xlo, double xhi, int K_)
        : law(l), q(q_), K(K_)
    {
        double dx = law.lat_h / K;
        long jlo = static_cast<long>(std::floor(xlo / dx));
        long jhi = static_cast<long>(std::ceil(xhi / dx));
        m = static_cast<int>(jhi - jlo + 1);
        x.resize(m);
        for (int j = 0; j < m; ++j) x[j] = (jlo + j) * dx;
        if (law.kind == LawKind::DiscreteAtoms) {
            for (const auto& a : law.atoms)
                atom_shift.emplace_back(std::lround(a.v / law.lat_h), a.prob);
        } else {
            for (const auto& b : law.broods) {
                ShiftBrood sb;
                sb.prob = b.prob;
                for (double v : b.disp) sb.shifts.push_back(std::lround(v / law.lat_h));
                broods.push_back(std::move(sb));
            }
        }
    }

    // phi(x - s h) with tail fills, as a full grid array
    void shifted(const std::vector<double>& ph, long s, std::vector<double>& out) const
    {
        out.resize(m);
        long off = s * K;
        // bottom fit rows 0 and 4K of the current iterate
        int j2 = std::min(m - 1, 4 * K);
        double y0 = (1.0 - ph[0]) * std::exp(-x[0]);
        double y1 = (1.0 - ph[j2]) * std::exp(-x[j2]);
        double B = (y0 - y1) / (x[j2] - x[0]);
        double A = y0 + B * x[0];
        for (int j = 0; j < m; ++j) {
            long src = j - off;
            if (src < 0) {
                double xb = x[j] - s * law.lat_h;
                out[j] = 1.0 - std::exp(xb) * (A - B * xb);
            } else if (src >= m) {
                out[j] = ph[m - 1];
            } else {
                out[j] = ph[src];
            }
        }
    }

    void T(const std::vector<double>& ph, std::vector<double>& out) const
    {
        out.assign(m, 0.0);
        if (law.kind == LawKind::DiscreteAtoms) {
            std::vector<double> f(m, 0.0), sh;
            for (const auto& [s, pr] : atom_shift) {
                shifted(ph, s, sh);
                for (int j = 0; j < m; ++j) f[j] += pr * sh[j];
            }
            for (int j = 0; j < m; ++j) out[j] = law.pgf(f[j]);
        } else {
            // cache distinct shifts
            std::map<long, std::vector<double>> cache;
            for (const auto& b : broods)
                for (long s : b.shifts)
                    if (!cache.count(s)) shifted(ph, s, cache[s]);
            for (const auto& b : broods)
                for (int j = 0; j < m; ++j) {
                    double prod = 1.0;
                    for (long s : b.shifts) prod *= cache[s][j];
                    out[j] += b.prob * prod;
                }
        }
    }

    PhiTable run(double tol, int max_iter)
    {
        std::vector<double> phi(m), next;
        for (int j = 0; j < m; ++j)
            phi[j] = std::max(q, std::exp(-std::min(std::exp(x[j]), 700.0)));

        // The fixed point is unique only up to argument scale, and plain
        // iteration drifts along that scale family. Pin the scale with
        // whole-index shifts: exact on the commensurate grid, so the whole
        // solve stays interpolation-free.
        double dx = law.lat_h / K;
        auto renorm = [&](std::vector<double>& ph) {
            double la = find_scale(x, ph);
            long sft = std::lround(la / dx);
            if (std::getenv("BRW_DEBUG_PHI") )
                std::fprintf(stderr, "  renorm la=%+.4f sft=%ld phi0=%.6e\n", la, sft, ph[0]);
            if (sft == 0) return;
            int j2 = std::min(m - 1, 4 * K);
            double y0 = (1.0 - ph[0]) * std::exp(-x[0]);
            double y1 = (1.0 - ph[j2]) * std::exp(-x[j2]);
            double B = (y0 - y1) / (x[j2] - x[0]);
            double A = y0 + B * x[0];
            std::vector<double> sh(m);
            for (int j = 0; j < m; ++j) {
                long src = j + sft;
                if (src >= m)
                    sh[j] = ph[m - 1];
                else if (src < 0) {
                    double xb = x[j] + sft * dx;
                    sh[j] = 1.0 - std::exp(xb) * (A - B * xb);
                } else
                    sh[j] = ph[src];
            }
            ph.swap(sh);
        };

        for (int it = 0; it < max_iter; ++it) {
            renorm(phi);
            T(phi, next);
            double diff = 0.0;
            for (int j = 0; j < m; ++j) {
                double d = std::abs(next[j] - phi[j]);
                if (!(d <= diff)) diff = d; // NaN-safe max
            }
            phi.swap(next);
            if (diff == 0.0) break;
            if (std::isnan(diff))
                throw NoConvergence("solve_phi iterate became NaN");
        }
        T(phi, next);
        double res = 0.0;
        for (int j = 0; j < m; ++j) {
            double d = std::abs(next[j] - phi[j]);
            if (!(d <= res)) res = d;
        }

        PhiTable tab;
        tab.x = x;
        tab.phi = phi;
        tab.q = q;
        tab.tol = tol;
        tab.residual = res;
        tab.scale = find_scale(x, phi);
        tab.finalize();
        if (!(res <= tol))
            throw NoConvergence("solve_phi residual " + std::to_string(res) +
                                " above tolerance after max_iter");
        return tab;
    }
};

PhiTable solve_generic(const OffspringLaw& law, double q, GridSpec grid, double tol,
                       int max_iter)
{
    int m = grid.points;
    std::vector<double> x(m);
    double x0 = std::log(grid.t_lo), x1 = std::log(grid.t_hi);
    for (int j = 0; j < m; ++j) x[j] = x0 + (x1 - x0) * j / (m - 1);
    std::vector<double> phi(m), next(m);
    for (int j = 0; j < m; ++j)
        phi[j] = std::max(q, std::exp(-std::min(std::exp(x[j]), 700.0)));

    for (int it = 0; it < max_iter; ++it) {
        PhiTable cur;
        cur.x = x;
        cur.phi = phi;
        cur.q = q;
        cur.finalize();
        double diff = 0.0;
        for (int j = 0; j < m; ++j) {
            next[j] = std::max(q, smoothing_operator(law, cur, std::exp(x[j])));
            diff = std::max(diff, std::abs(next[j] - phi[j]));
        }
        // renormalize the argument scale so phi(1) stays pinned at 1/2
        double la = find_scale(x, next);
        PhiTable scaled;
        scaled.x = x;
        scaled.phi = next;
        scaled.q = q;
        scaled.finalize();
        for (int j = 0; j < m; ++j)
            phi[j] = std::max(q, scaled.eval(std::exp(x[j] + la)));
        if (diff < tol * 0.1) break;
    }

    PhiTable tab;
    tab.x = x;
    tab.phi = phi;
    tab.q = q;
    tab.tol = tol;
    tab.scale = find_scale(x, phi);
    tab.finalize();
    // report the genuine operator residual on the grid
    double r = 0.0;
    for (int j = 0; j < m; ++j) {
        double t = std::exp(x[j] - tab.scale);
        r = std::max(r, std::abs(smoothing_operator(law, tab, t) - tab.eval(t)));
    }
    tab.residual = r;
    if (r > tol)
        throw NoConvergence("solve_phi residual " + std::to_string(r) +
                            " above tolerance after max_iter");
    return tab;
}

} // namespace

PhiTable solve_phi(const OffspringLaw& law, GridSpec grid, double tol, int max_iter)
{
    auto rep = validate_assumptions(law, 1e-6);
    if (!rep.passes_boundary)
        throw DomainError("solve_phi requires a boundary-normalized law");
    double q = (law.mean_offspring() > 1.0) ? extinction_prob(law) : 0.0;

    if (law.lattice) {
        // step-commensurate grid: the operator closes on grid indices exactly.
        // Cover at least the requested window, and enough of both tails for
        // the c* fit and the phi -> q approach.
        double xlo = std::min(std::log(grid.t_lo), -23.0);
        double xhi = std::max(std::log(grid.t_hi), 19.5);
        int K = grid.lattice_subdiv > 0 ? grid.lattice_subdiv : 128;
        LatticeSolver ls(law, q, xlo, xhi, K);
        return ls.run(tol, max_iter);
    }
    return solve_generic(law, q, grid, tol, max_iter);
}

std::pair<double, double> cstar_fit(PhiTable& phi)
{
    if (!phi.ready()) throw DomainError("cstar_fit: empty table");
    if (phi.t_lo() > 1e-6) throw DomainError("cstar_fit: grid must reach below 1e-6");
    double cut = phi.x.front() + std::log(10.0);
    double su = 0, sy = 0, suu = 0, suy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < phi.x.size() && phi.x[i] <= cut; ++i) {
        double t = std::exp(phi.x[i] - phi.scale);
        double u = t * std::log(1.0 / t);
        double y = phi.log_inv(t);
        su += u;
        sy += y;
        suu += u * u;
        suy += u * y;
        ++cnt;
    }
    double c = (cnt * suy - su * sy) / (cnt * suu - su * su);
    double b = (sy - c * su) / cnt;
    // R^2
    double ss_res = 0, ss_tot = 0, ybar = sy / cnt;
    for (std::size_t i = 0; i < phi.x.size() && phi.x[i] <= cut; ++i) {
        double t = std::exp(phi.x[i] - phi.scale);
        double u = t * std::log(1.0 / t);
        double y = phi.log_inv(t);
        double e = y - (c * u + b);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    double r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 0.0;
    if (r2 < 0.99) throw PoorFit("cstar_fit R^2 = " + std::to_string(r2));
    phi.c_star = c;
    return {c, r2};
}

std::vector<double> xi_star_samples(const OffspringLaw& law, int n_large, int trials,
                                    std::uint64_t seed, const PhiTable& phi, Mode mode)
{
    std::vector<double> out;
    out.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        Generation gen = Generation::root(law.lattice);
        for (int k = 1; k <= n_large && !gen.extinct(); ++k)
            gen = step_generation(law, gen, seed, t, mode);
        KahanSum xi; // -log W* = sum of log(1/phi(e^{-V}))
        for (double v : gen.positions) {
            double arg = std::exp(-v);
            if (arg > 0.0) xi.add(phi.log_inv(arg)); // phi(0+) = 1 contributes 0
        }
        out.push_back(xi.value());
    }
    return out;
}

} // namespace brw
