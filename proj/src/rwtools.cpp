#include "brw/rwtools.hpp"

#include <cmath>
#include <map>

namespace brw {

namespace {

constexpr std::uint64_t kWalkLane = 0x77a1c0ffULL;

// aggregate the tilted step table to (integer lattice offset -> probability)
std::map<long long, double> lattice_step_pmf(const OffspringLaw& law,
                                             const SpineStepLaw& sl)
{
    std::map<long long, double> pmf;
    for (const auto& o : sl.table) {
        long long k = std::llround(o.dS / law.lat_h);
        if (std::abs(k * law.lat_h - o.dS) > 1e-9)
            throw DomainError("stay_positive: displacement off the lattice");
        pmf[k] += o.prob;
    }
    return pmf;
}

} // namespace

RandomWalkPath sample_walk(const OffspringLaw& law, int n, std::uint64_t seed,
                           std::uint64_t trial)
{
    auto sl = spine_step_law(law);
    RandomWalkPath p;
    p.steps.assign(1, 0.0);
    p.steps.reserve(n + 1);
    Rng rng(seed, trial, 0, kWalkLane);
    std::vector<double> sib;
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
        s += sl.sample(rng, sib);
        p.steps.push_back(s);
        if (s < p.running_min) {
            p.running_min = s;
            p.argmin = k;
        }
    }
    return p;
}

std::pair<double, double> stay_positive(const OffspringLaw& law, int n, int trials,
                                        std::uint64_t seed)
{
    if (n <= 0) return {1.0, 0.0}; // empty constraint
    auto sl = spine_step_law(law);

    if (!sl.gaussian && law.lattice && sl.table.size() <= 64 && n <= 24) {
        // exact convolution on the lattice, killing at positions <= 0
        auto pmf = lattice_step_pmf(law, sl);
        // cur[i] = P(S_k = (base+i)*h, all of S_1..S_k > 0)
        std::vector<double> cur(1, 1.0);
        long long base = 0; // cur[i] is position (base + i)
        for (int k = 1; k <= n; ++k) {
            std::map<long long, double> next;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                if (cur[i] == 0.0) continue;
                for (const auto& [dk, pr] : pmf) {
                    long long pos = base + static_cast<long long>(i) + dk;
                    if (pos > 0) next[pos] += cur[i] * pr;
                }
            }
            if (next.empty()) return {0.0, 0.0};
            base = next.begin()->first;
            cur.assign(next.rbegin()->first - base + 1, 0.0);
            for (const auto& [pos, pr] : next) cur[pos - base] = pr;
        }
        double p = 0.0;
        for (double v : cur) p += v;
        return {p, 0.0};
    }

    // Monte Carlo
    int hits = 0;
    std::vector<double> sib;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed, t, 0, kWalkLane);
        double s = 0.0;
        bool ok = true;
        for (int k = 1; k <= n; ++k) {
            s += sl.sample(rng, sib);
            if (!(s > 0.0)) {
                ok = false;
                break;
            }
        }
        if (ok) ++hits;
    }
    double p = static_cast<double>(hits) / trials;
    return {p, std::sqrt(p * (1.0 - p) / trials)};
}

std::pair<double, double> min_exp_moment(const OffspringLaw& law, double b, int n,
                                         int trials, std::uint64_t seed)
{
    if (b < 0.0) throw DomainError("min_exp_moment: b must be nonnegative");
    if (b == 0.0 || n == 0) return {1.0, 0.0}; // min = S_0 = 0 or weight 1
    auto sl = spine_step_law(law);
    KahanSum s1, s2;
    std::vector<double> sib;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed, t, 0, kWalkLane);
        double s = 0.0, mn = 0.0;
        for (int k = 1; k <= n; ++k) {
            s += sl.sample(rng, sib);
            if (s < mn) mn = s;
        }
        double v = std::exp(b * mn);
        s1.add(v);
        s2.add(v * v);
    }
    double m = s1.value() / trials;
    double var = std::max(0.0, s2.value() / trials - m * m);
    return {m, std::sqrt(var / trials)};
}

RegressFit exponent_regress(const std::vector<std::pair<double, double>>& pairs)
{
    if (pairs.size() < 3)
        throw DomainError("exponent_regress: need at least 3 pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pairs.size());
    for (const auto& [nn, stat] : pairs) {
        if (!(nn > 0.0) || !(stat > 0.0))
            throw NonPositiveStatistic("exponent_regress: nonpositive value");
        double x = std::log(nn), y = std::log(stat);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    RegressFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (const auto& [nn, stat] : pairs) {
        double x = std::log(nn), y = std::log(stat);
        double e = y - (fit.slope * x + fit.intercept);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace brw
