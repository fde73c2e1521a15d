#pragma once

#include <cstdint>
#include <vector>

#include "brw/interp.hpp"
#include "brw/model.hpp"
#include "brw/simulate.hpp"

namespace brw {

struct PhiRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PoorFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double t_lo = 1e-8;
    double t_hi = 1e4;
    int points = 400;        // generic path only
    int lattice_subdiv = 128; // grid points per lattice step for lattice laws
};

// Tabulated Laplace-transform fixed point phi of the smoothing transform,
// normalized so phi(1) = 1/2 by an argument rescaling t -> e^{scale} t.
// Interpolation works in (log t, log log(1/phi)) to keep relative precision
// near t = 0 where log(1/phi) ~ c* t log(1/t).
class PhiTable {
public:
    std::vector<double> x;   // solver grid in log t (unscaled)
    std::vector<double> phi; // phi values on the grid
    double scale = 0.0;      // normalization shift in log t
    double q = 0.0;          // extinction probability = phi(inf)
    double c_star = 0.0;     // filled by cstar_fit
    double tol = 0.0;
    double residual = 0.0;
    // below-grid extension 1 - phi(t) = t (A - B log t) in unscaled coords
    double ext_A = 0.0, ext_B = 0.0;
    // above-grid extension phi(t) = q + C t^{-r} in unscaled coords
    double ext_C = 0.0, ext_r = 0.0;

    void finalize(); // builds the interpolant and the tail fits

    double t_lo() const { return std::exp(x.front() - scale); }
    double t_hi() const { return std::exp(x.back() - scale); }

    double eval(double t) const;          // phi(t)
    double log_inv(double t) const;       // log(1/phi(t)), relative precision
    double one_minus(double t) const;     // 1 - phi(t), relative precision

    bool ready() const { return !x.empty(); }

private:
    MonotoneCubic zfit_; // log log(1/phi) vs x
};

// E[prod over children of phi(t e^{-V(child)})]: exact finite sum for atom
// laws, Gauss-Hermite quadrature (64 nodes) per child for gaussian-binary
double smoothing_operator(const OffspringLaw& law, const PhiTable& phi, double t);

PhiTable solve_phi(const OffspringLaw& law, GridSpec grid = {}, double tol = 1e-6,
                   int max_iter = 20000);

// least-squares fit of log(1/phi(t)) against t log(1/t) over the lowest
// decade of the grid; returns (c_star, R^2) and stores c_star in the table
std::pair<double, double> cstar_fit(PhiTable& phi);

// -log W_n* samples at n = n_large as approximate xi* draws; extinct trials
// give W* = 1 (empty product), i.e. samples equal to 0
std::vector<double> xi_star_samples(const OffspringLaw& law, int n_large, int trials,
                                    std::uint64_t seed, const PhiTable& phi,
                                    Mode mode = Mode::exact());

} // namespace brw
