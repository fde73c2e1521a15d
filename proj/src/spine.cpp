#include "brw/spine.hpp"

#include <algorithm>
#include <cmath>

namespace brw {

double SpineStepLaw::sample(Rng& rng, std::vector<double>& siblings_out) const
{
    siblings_out.clear();
    if (gaussian) {
        double ds = spine_mean + std::sqrt(spine_var) * rng.normal();
        siblings_out.push_back(sib_mu + std::sqrt(sib_sigma2) * rng.normal());
        return ds;
    }
    const SpineOutcome& o = table[rng.pick(cum)];
    siblings_out = o.siblings;
    return o.dS;
}

double SpineStepLaw::mean_step() const
{
    if (gaussian) return spine_mean;
    double m = 0.0;
    for (const auto& o : table) m += o.prob * o.dS;
    return m;
}

SpineStepLaw spine_step_law(const OffspringLaw& law, double tol)
{
    if (std::abs(psi(law, 1.0)) > tol)
        throw NotBoundary("psi(1) != 0: the e^{-V} tilt is not a probability");

    SpineStepLaw out;
    if (law.kind == LawKind::GaussianBinary) {
        out.gaussian = true;
        out.spine_mean = law.mu - law.sigma2;
        out.spine_var = law.sigma2;
        out.sib_mu = law.mu;
        out.sib_sigma2 = law.sigma2;
        return out;
    }

    // size-biased brood, then the spine child within the brood, each
    // proportional to e^{-V(child)}; total mass is E sum e^{-V} = 1
    double total = 0.0;
    for (const auto& b : brood_outcomes(law)) {
        for (std::size_t i = 0; i < b.disp.size(); ++i) {
            SpineOutcome o;
            o.dS = b.disp[i];
            o.prob = b.prob * std::exp(-b.disp[i]);
            for (std::size_t j = 0; j < b.disp.size(); ++j)
                if (j != i) o.siblings.push_back(b.disp[j]);
            total += o.prob;
            out.table.push_back(std::move(o));
        }
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw NotBoundary("spine outcome table mass " + std::to_string(total));
    double acc = 0.0;
    for (const auto& o : out.table) {
        acc += o.prob;
        out.cum.push_back(acc);
    }
    return out;
}

SpineSample sample_spine(const OffspringLaw& law, int n, std::uint64_t seed,
                         std::uint64_t trial, bool decorate, Mode mode,
                         const std::vector<double>& betas)
{
    if (n < 0) throw DomainError("sample_spine: n must be >= 0");
    SpineStepLaw step = spine_step_law(law);
    SpineSample s;
    s.path.push_back(0.0);
    std::vector<double> sib;
    for (int k = 1; k <= n; ++k) {
        Rng rng(seed, trial, static_cast<std::uint64_t>(k), 0);
        double ds = step.sample(rng, sib);
        for (double& d : sib) d += s.path.back(); // brothers' absolute positions
        s.path.push_back(s.path.back() + ds);
        s.sibling_sets.push_back(sib);
    }
    if (!decorate) return s;

    // Q-tree: generation j holds the spine vertex S_j plus, for every level
    // k <= j, the depth (j-k) descendants of the level-k brothers
    std::vector<std::vector<double>> genpos(n + 1);
    for (int j = 0; j <= n; ++j) genpos[j].push_back(s.path[j]);
    for (int k = 1; k <= n; ++k) {
        const auto& sibs = s.sibling_sets[k - 1];
        for (std::size_t si = 0; si < sibs.size(); ++si) {
            // independent P-subtree rooted at the brother, depth n-k
            std::uint64_t sub = Rng(seed, trial, 0x5u * k + 1, 77 + si).next_u64();
            Generation g;
            g.index = 0;
            g.positions = {sibs[si]};
            genpos[k].push_back(sibs[si]);
            for (int d = 1; d <= n - k; ++d) {
                g = step_generation(law, g, sub, 0, mode);
                for (double v : g.positions) genpos[k + d].push_back(v);
                if (g.extinct()) break;
            }
        }
    }
    TrialStats st;
    st.betas = betas;
    for (int j = 0; j <= n; ++j) {
        Generation g;
        g.index = j;
        g.positions = genpos[j];
        st.gens.push_back(record_generation(g, law, betas));
    }
    s.decorated_stats = std::move(st);
    return s;
}

std::pair<double, double> many_to_one(const OffspringLaw& law, int n,
                                      const PathFunctional& f, int trials,
                                      std::uint64_t seed)
{
    if (n == 0) return {f(std::vector<double>{0.0}), 0.0};
    SpineStepLaw step = spine_step_law(law);
    std::vector<double> path, sib;
    KahanSum s, s2;
    for (int t = 0; t < trials; ++t) {
        path.assign(1, 0.0);
        for (int k = 1; k <= n; ++k) {
            Rng rng(seed, t, static_cast<std::uint64_t>(k), 0);
            path.push_back(path.back() + step.sample(rng, sib));
        }
        double z = std::exp(path.back()) * f(path);
        s.add(z);
        s2.add(z * z);
    }
    double mean = s.value() / trials;
    double var = std::max(0.0, s2.value() / trials - mean * mean);
    return {mean, std::sqrt(var / trials)};
}

namespace {

// exact enumeration of the Q-tree of depth n built from the spinal
// decomposition: spine outcomes at each level, brothers rooting independent
// P-subtrees truncated at the horizon
struct QEnumerator {
    const OffspringLaw& law;
    const SpineStepLaw& step;
    int n;
    std::size_t max_outcomes;
    const TreeFunctional& g;
    std::vector<std::vector<double>> gens;
    double acc = 0.0;

    void level(int k, double S, double prob)
    {
        if (k == n) {
            acc += prob * g(gens);
            return;
        }
        for (const auto& o : step.table) {
            gens[k + 1].push_back(S + o.dS);
            sibling(k, o, 0, S, prob * o.prob);
            gens[k + 1].pop_back();
        }
    }

    void sibling(int k, const SpineOutcome& o, std::size_t si, double S, double prob)
    {
        if (si == o.siblings.size()) {
            level(k + 1, S + o.dS, prob);
            return;
        }
        double root = S + o.siblings[si];
        // each brother's subtree, all outcomes, rooted at depth k+1
        enumerate_trees(
            law, n - (k + 1),
            [&](double pr, const std::vector<std::vector<double>>& sub) {
                std::vector<std::size_t> marks;
                for (int d = 0; d < static_cast<int>(sub.size()); ++d) {
                    marks.push_back(gens[k + 1 + d].size());
                    for (double v : sub[d]) gens[k + 1 + d].push_back(root + v);
                }
                sibling(k, o, si + 1, S, prob * pr);
                for (int d = 0; d < static_cast<int>(sub.size()); ++d)
                    gens[k + 1 + d].resize(marks[d]);
            },
            max_outcomes);
    }
};

} // namespace

std::pair<double, double> q_vs_p_consistency(const OffspringLaw& law, int n,
                                             const TreeFunctional& g,
                                             std::size_t max_outcomes)
{
    // P side: E[W_n g]
    double lhs = 0.0;
    enumerate_trees(
        law, n,
        [&](double prob, const std::vector<std::vector<double>>& gens) {
            KahanSum w;
            for (double v : gens[n]) w.add(std::exp(-v));
            lhs += prob * w.value() * g(gens);
        },
        max_outcomes);

    // Q side: spinal construction
    SpineStepLaw step = spine_step_law(law);
    if (step.gaussian) throw DomainError("q_vs_p_consistency needs a discrete law");
    QEnumerator qe{law, step, n, max_outcomes, g, {}, 0.0};
    qe.gens.assign(n + 1, {});
    qe.gens[0] = {0.0};
    qe.level(0, 0.0, 1.0);
    return {lhs, qe.acc};
}

} // namespace brw
