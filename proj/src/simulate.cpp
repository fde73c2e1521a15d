#include "brw/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace brw {

std::string Mode::describe() const
{
    if (is_exact()) return "exact";
    std::ostringstream os;
    if (prune_delta) os << "prune(" << *prune_delta << ")";
    if (cap_n) {
        if (prune_delta) os << "+";
        os << "cap(" << *cap_n << ")";
    }
    return os.str();
}

namespace {

// drop the particles flagged in `kill`, adding their e^{-V} weight to the bound
void apply_kill(Generation& g, const std::vector<char>& kill)
{
    KahanSum dropped;
    std::size_t out = 0;
    const bool has_lat = !g.lat.empty();
    for (std::size_t i = 0; i < g.positions.size(); ++i) {
        if (kill[i]) {
            dropped.add(std::exp(-g.positions[i]));
        } else {
            g.positions[out] = g.positions[i];
            if (has_lat) g.lat[out] = g.lat[i];
            ++out;
        }
    }
    g.positions.resize(out);
    if (has_lat) g.lat.resize(out);
    g.dropped_mass_bound += dropped.value();
}

} // namespace

Generation step_generation(const OffspringLaw& law, const Generation& gen,
                           std::uint64_t master, std::uint64_t trial, Mode mode)
{
    Generation next;
    next.index = gen.index + 1;
    next.dropped_mass_bound = gen.dropped_mass_bound;
    if (gen.extinct()) return next;

    const bool use_lat = law.lattice && !gen.lat.empty();
    std::vector<double> brood;
    std::vector<std::int64_t> lbrood;
    for (std::size_t i = 0; i < gen.positions.size(); ++i) {
        Rng rng(master, trial, static_cast<std::uint64_t>(next.index), i);
        if (use_lat) {
            law.sample_brood_lattice(rng, lbrood);
            for (std::int64_t dj : lbrood) {
                std::int64_t j = gen.lat[i] + dj;
                next.lat.push_back(j);
                next.positions.push_back(static_cast<double>(j) * law.lat_h);
            }
        } else {
            law.sample_brood(rng, brood);
            for (double dv : brood) next.positions.push_back(gen.positions[i] + dv);
        }
        if (next.positions.size() > kHardPopulationLimit)
            throw PopulationOverflow("generation exceeds hard population limit");
    }
    if (next.positions.empty()) return next;

    if (mode.prune_delta) {
        double lo = *std::min_element(next.positions.begin(), next.positions.end());
        double cut = lo + *mode.prune_delta;
        std::vector<char> kill(next.positions.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < next.positions.size(); ++i)
            if (next.positions[i] > cut) kill[i] = 1, any = true;
        if (any) apply_kill(next, kill);
    }
    if (mode.cap_n && next.positions.size() > *mode.cap_n) {
        const std::size_t N = *mode.cap_n;
        std::vector<std::size_t> idx(next.positions.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::nth_element(idx.begin(), idx.begin() + N, idx.end(),
                         [&](std::size_t a, std::size_t b) {
                             return next.positions[a] < next.positions[b];
                         });
        std::vector<char> kill(next.positions.size(), 0);
        for (std::size_t r = N; r < idx.size(); ++r) kill[idx[r]] = 1;
        apply_kill(next, kill);
    }
    return next;
}

GenRecord record_generation(const Generation& gen, const OffspringLaw& law,
                            const std::vector<double>& betas)
{
    (void)law;
    GenRecord r;
    r.k = gen.index;
    r.count = gen.positions.size();
    r.survived = r.count > 0;
    r.dropped_mass_bound = gen.dropped_mass_bound;
    r.w_beta.assign(betas.size(), 0.0);
    if (!r.survived) {
        r.min_v = r.max_v = 0.0; // Sum over empty set := 0 convention
        return r;
    }
    r.min_v = *std::min_element(gen.positions.begin(), gen.positions.end());
    r.max_v = *std::max_element(gen.positions.begin(), gen.positions.end());
    KahanSum w;
    std::vector<KahanSum> wb(betas.size());
    for (double v : gen.positions) {
        w.add(std::exp(-v));
        for (std::size_t b = 0; b < betas.size(); ++b) {
            if (betas[b] == 1.0)
                wb[b].add(std::exp(-v)); // keep w_beta[1] bit-identical to w
            else
                wb[b].add(std::exp(-betas[b] * v));
        }
    }
    r.w = w.value();
    for (std::size_t b = 0; b < betas.size(); ++b) r.w_beta[b] = wb[b].value();
    return r;
}

TrialStats run_trial(const OffspringLaw& law, int n, std::uint64_t seed,
                     std::uint64_t trial, Mode mode, const std::vector<double>& betas)
{
    if (n < 0) throw DomainError("run_trial: n must be >= 0");
    TrialStats st;
    st.betas = betas;
    Generation gen = Generation::root(law.lattice);
    st.gens.push_back(record_generation(gen, law, betas));
    for (int k = 1; k <= n; ++k) {
        gen = step_generation(law, gen, seed, trial, mode);
        st.gens.push_back(record_generation(gen, law, betas));
        if (gen.extinct()) break;
    }
    return st;
}

std::vector<BroodChoice> brood_outcomes(const OffspringLaw& law)
{
    std::vector<BroodChoice> out;
    switch (law.kind) {
    case LawKind::JointAtoms:
        for (const auto& b : law.broods)
            if (b.prob > 0.0) out.push_back({b.disp, b.prob});
        break;
    case LawKind::DiscreteAtoms:
        for (const auto& [k, pk] : law.offspring_pmf) {
            if (pk <= 0.0) continue;
            // expand atoms^k
            std::vector<double> disp(k, 0.0);
            std::vector<std::size_t> pick(k, 0);
            while (true) {
                double pr = pk;
                for (int i = 0; i < k; ++i) {
                    disp[i] = law.atoms[pick[i]].v;
                    pr *= law.atoms[pick[i]].prob;
                }
                if (pr > 0.0) out.push_back({disp, pr});
                int i = k - 1;
                while (i >= 0 && ++pick[i] == law.atoms.size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
        break;
    default:
        throw DomainError("enumeration requires a discrete law kind");
    }
    return out;
}

namespace {

struct Enumerator {
    const std::vector<BroodChoice>& choices;
    int n;
    std::size_t budget;
    std::size_t used = 0;
    std::vector<std::vector<double>> gens;
    const std::function<void(double, const std::vector<std::vector<double>>&)>& visit;

    void descend(int depth, double prob)
    {
        if (depth == n || gens[depth].empty()) {
            if (++used > budget) throw TooLarge("enumeration outcome budget exceeded");
            // extinction is absorbing: pad empty generations to depth n
            for (int d = depth + 1; d <= n; ++d) gens[d].clear();
            visit(prob, gens);
            return;
        }
        assign(depth, 0, prob);
    }

    // choose a brood for each particle of generation `depth` in turn
    void assign(int depth, std::size_t particle, double prob)
    {
        if (particle == gens[depth].size()) {
            descend(depth + 1, prob);
            return;
        }
        double base = gens[depth][particle];
        auto& child = gens[depth + 1];
        std::size_t mark = child.size();
        for (const auto& c : choices) {
            for (double dv : c.disp) child.push_back(base + dv);
            assign(depth, particle + 1, prob * c.prob);
            child.resize(mark);
        }
    }
};

} // namespace

void enumerate_trees(const OffspringLaw& law, int n,
                     const std::function<void(double, const std::vector<std::vector<double>>&)>& visit,
                     std::size_t max_outcomes)
{
    if (n < 0) throw DomainError("enumerate_trees: n must be >= 0");
    auto choices = brood_outcomes(law);
    Enumerator e{choices, n, max_outcomes, 0, {}, visit};
    e.gens.assign(n + 1, {});
    e.gens[0] = {0.0};
    e.descend(0, 1.0);
}

std::vector<std::pair<double, TrialStats>>
enumerate_exact(const OffspringLaw& law, int n, const std::vector<double>& betas,
                std::size_t max_outcomes)
{
    std::vector<std::pair<double, TrialStats>> out;
    enumerate_trees(
        law, n,
        [&](double prob, const std::vector<std::vector<double>>& gens) {
            TrialStats st;
            st.betas = betas;
            for (int k = 0; k <= n; ++k) {
                Generation g;
                g.index = k;
                g.positions = gens[k];
                st.gens.push_back(record_generation(g, law, betas));
                if (g.extinct()) break;
            }
            out.emplace_back(prob, std::move(st));
        },
        max_outcomes);
    return out;
}

} // namespace brw
