#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "brw/rng.hpp"

namespace brw {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotSupercritical : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LawKind { GaussianBinary, DiscreteAtoms, JointAtoms };

// single displacement atom (value, probability)
struct Atom {
    double v = 0.0;
    double prob = 0.0;
};

// one whole-brood outcome for joint laws
struct BroodOutcome {
    std::vector<double> disp;
    double prob = 0.0;
};

// Reproduction point process: offspring count law x displacement law.
// Three kinds:
//   gaussian-binary(mu, sigma2): always 2 children, i.i.d. N(mu, sigma2) steps
//   discrete-atoms: count pmf on 0..K, each child's step i.i.d. on finite atoms
//   joint-atoms: explicit list of whole-brood outcomes (allows dependence)
class OffspringLaw {
public:
    LawKind kind = LawKind::DiscreteAtoms;

    double mu = 0.0;
    double sigma2 = 0.0;

    std::vector<std::pair<int, double>> offspring_pmf; // (count, prob)
    std::vector<Atom> atoms;

    std::vector<BroodOutcome> broods;

    // declared lower bound on a single displacement; -inf = unbounded
    double d_min = -std::numeric_limits<double>::infinity();

    // lattice structure: all displacements equal to step*lat_h for integer step
    bool lattice = false;
    double lat_h = 0.0;

    std::string name; // optional label for reports

    static OffspringLaw gaussian_binary(double mu, double sigma2);
    static OffspringLaw discrete_atoms(std::vector<std::pair<int, double>> pmf,
                                       std::vector<Atom> atoms);
    static OffspringLaw joint_atoms(std::vector<BroodOutcome> broods);

    // the two named lattice test laws plus the boundary Gaussian law
    static OffspringLaw discrete_binary(); // 2 children, +-h, h = arccosh(2)
    static OffspringLaw gw_atoms();        // offspring {0:1/4, 2:3/4}, +-arccosh(3/2)
    static OffspringLaw gauss_boundary();  // gaussian-binary(2 ln 2, 2 ln 2)

    double mean_offspring() const;
    int max_offspring() const;
    // offspring generating function E[s^N]
    double pgf(double s) const;

    // draw one brood of displacements
    void sample_brood(Rng& rng, std::vector<double>& out) const;
    // lattice variant: integer steps (requires lattice == true)
    void sample_brood_lattice(Rng& rng, std::vector<std::int64_t>& out) const;

    void validate_construction() const; // throws DomainError on malformed input

private:
    void detect_lattice();
    // cached cumulative tables for sampling
    std::vector<double> cum_offspring_;
    std::vector<double> cum_atoms_;
    std::vector<double> cum_broods_;
    friend OffspringLaw finish_law(OffspringLaw law);
};

struct AssumptionReport {
    double psi0 = 0.0;
    double psi1 = 0.0;
    double psi1_prime = 0.0;
    bool moment_1_plus_delta_finite = false;
    bool exp_moments_finite = false;
    bool passes_boundary = false;
    double tolerance = 0.0;
};

double psi(const OffspringLaw& law, double t);
double psi_prime(const OffspringLaw& law, double t);

AssumptionReport validate_assumptions(const OffspringLaw& law, double tolerance = 1e-9);

struct BoundaryResult {
    double t_star = 0.0;
    OffspringLaw law;
};

// Solve t psi'(t) = psi(t) on the bracket and rescale the law to the
// boundary normalization V -> t* V + psi(t*) per generation.
BoundaryResult boundary_normalize(const OffspringLaw& law,
                                  std::pair<double, double> t_bracket = {1e-3, 50.0},
                                  double tol = 1e-10);

double extinction_prob(const OffspringLaw& law, double tol = 1e-12);

} // namespace brw
