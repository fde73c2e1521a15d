#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "brw/model.hpp"

namespace brw {

struct PopulationOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kahan compensated accumulator
class KahanSum {
public:
    void add(double x)
    {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

// Population control. Cap and prune compose: pruning by the window applies
// first, then the N lowest survivors are kept. exact() leaves everything.
struct Mode {
    std::optional<std::size_t> cap_n;
    std::optional<double> prune_delta;

    static Mode exact() { return {}; }
    static Mode cap(std::size_t n)
    {
        Mode m;
        m.cap_n = n;
        return m;
    }
    static Mode prune(double delta)
    {
        Mode m;
        m.prune_delta = delta;
        return m;
    }
    static Mode prune_cap(double delta, std::size_t n)
    {
        Mode m;
        m.prune_delta = delta;
        m.cap_n = n;
        return m;
    }
    bool is_exact() const { return !cap_n && !prune_delta; }
    std::string describe() const;
};

// hard limit on a single generation's size, any mode
inline constexpr std::size_t kHardPopulationLimit = 100000000;

struct Generation {
    int index = 0;
    std::vector<double> positions;
    // integer lattice coordinates, parallel to positions, for lattice laws
    std::vector<std::int64_t> lat;
    double dropped_mass_bound = 0.0;

    static Generation root(bool lattice_coords)
    {
        Generation g;
        g.positions = {0.0};
        if (lattice_coords) g.lat = {0};
        return g;
    }
    bool extinct() const { return positions.empty(); }
};

struct GenRecord {
    int k = 0;
    std::size_t count = 0;
    double min_v = 0.0;
    double max_v = 0.0;
    double w = 0.0;
    std::vector<double> w_beta; // parallel to the betas list of the run
    bool survived = false;
    double dropped_mass_bound = 0.0;
};

struct TrialStats {
    std::vector<double> betas;
    std::vector<GenRecord> gens; // gens[k] is generation k (until extinction)
    const GenRecord& at(std::size_t k) const { return gens.at(k); }
    const GenRecord& last() const { return gens.back(); }
};

// advance one generation; rng streams are keyed by
// (master, trial, child generation index, parent particle index)
Generation step_generation(const OffspringLaw& law, const Generation& gen,
                           std::uint64_t master, std::uint64_t trial, Mode mode);

GenRecord record_generation(const Generation& gen, const OffspringLaw& law,
                            const std::vector<double>& betas);

TrialStats run_trial(const OffspringLaw& law, int n, std::uint64_t seed,
                     std::uint64_t trial, Mode mode,
                     const std::vector<double>& betas = {});

// one fully expanded brood outcome of a discrete law
struct BroodChoice {
    std::vector<double> disp;
    double prob = 0.0;
};

// expand a discrete law into its finite list of whole-brood outcomes
std::vector<BroodChoice> brood_outcomes(const OffspringLaw& law);

// Exhaustive weighted enumeration of all tree outcomes to depth n for discrete
// laws. visit receives (probability, generations) where generations[k] holds
// the positions of generation k. Throws TooLarge past the outcome budget.
void enumerate_trees(const OffspringLaw& law, int n,
                     const std::function<void(double, const std::vector<std::vector<double>>&)>& visit,
                     std::size_t max_outcomes = 10000000);

std::vector<std::pair<double, TrialStats>>
enumerate_exact(const OffspringLaw& law, int n, const std::vector<double>& betas = {},
                std::size_t max_outcomes = 10000000);

} // namespace brw
