#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "brw/simulate.hpp"

namespace brw {

struct NotBoundary : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// one outcome of the tilted spine step: spine displacement plus the
// displacements of the spine vertex's brothers
struct SpineOutcome {
    double dS = 0.0;
    std::vector<double> siblings;
    double prob = 0.0;
};

// One-step law of (Delta S, sibling multiset) under the size-biased measure.
// Atom laws carry an explicit outcome table; gaussian-binary uses the
// closed-form tilt (spine step is Gaussian with mean mu - sigma2, same
// variance; one sibling with the untilted displacement law).
struct SpineStepLaw {
    bool gaussian = false;
    double spine_mean = 0.0;
    double spine_var = 0.0;
    double sib_mu = 0.0;
    double sib_sigma2 = 0.0;
    std::vector<SpineOutcome> table;
    std::vector<double> cum; // sampling cdf over table

    double sample(Rng& rng, std::vector<double>& siblings_out) const;
    double mean_step() const;
};

SpineStepLaw spine_step_law(const OffspringLaw& law, double tol = 1e-9);

struct SpineSample {
    std::vector<double> path;                       // S_0 .. S_n
    std::vector<std::vector<double>> sibling_sets;  // level k -> brothers at k
    std::optional<TrialStats> decorated_stats;      // full Q-tree when decorated
};

SpineSample sample_spine(const OffspringLaw& law, int n, std::uint64_t seed,
                         std::uint64_t trial, bool decorate = false,
                         Mode mode = Mode::exact(),
                         const std::vector<double>& betas = {});

// Monte Carlo estimate of E[sum over |u|=n of f(V(u_1)..V(u_n))] through the
// tilted walk: mean of e^{S_n} f(path). f receives the path with path[k] = S_k.
using PathFunctional = std::function<double(const std::vector<double>&)>;
std::pair<double, double> many_to_one(const OffspringLaw& law, int n,
                                      const PathFunctional& f, int trials,
                                      std::uint64_t seed);

// Exact two-sided check of the change of measure on enumerable laws:
// lhs = E_P[W_n g(tree)], rhs = E_Q[g(tree)], both by exhaustive enumeration.
// g sees the tree as generation position lists, g(gens), gens[k] = level k.
using TreeFunctional = std::function<double(const std::vector<std::vector<double>>&)>;
std::pair<double, double> q_vs_p_consistency(const OffspringLaw& law, int n,
                                             const TreeFunctional& g,
                                             std::size_t max_outcomes = 10000000);

} // namespace brw
