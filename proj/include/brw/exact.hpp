#pragma once

#include <map>
#include <vector>

#include "brw/fixedpoint.hpp"

namespace brw {

// Closed-form lattice recursions for the two-atom binary law (2 children at
// +-h, h = arccosh 2). Because every displacement lives on the h-lattice and
// the tree is binary, the laws of min V, W_{n,beta} and W_n* admit exact
// one-dimensional recursions; these serve as reference values for the Monte
// Carlo estimators, which at desk scale are bias-limited by pruning/capping.
namespace exact {

// interpolated medians of the minimal position at the requested generations
std::map<int, double> min_medians(const std::vector<int>& ns, double q = 0.5);

// chi_n(t) = E exp(-t W_{n,beta}), evaluated by the ray recursion: the
// argument lattice t e^{j beta h} closes under the one-step branching map
std::vector<double> chi(int n, const std::vector<double>& t0, double beta);

// P(W_{n,beta} <= w) via Gaver-Stehfest inversion of chi (M terms)
double gs_cdf(int n, double w, double beta, int M = 12);

// quantile of W_{n,beta} by bisection on gs_cdf
double gs_quantile(int n, double beta, double q = 0.5, int M = 12);

// E[W_{n,beta}^r] for r in (0,1):
// r / Gamma(1-r) * Integral (1 - chi(e^x)) e^{-r x} dx, trapezoid rule
double frac_moment(int n, double beta, double r, double x_lo, double x_hi,
                   double dx = 0.25);

// E[(W_n*)^s] from the solved fixed-point table via the lattice recursion on
// G(a) = 1 - E[(W_n*)^s | spine at a]; converges to phi(s) as n grows
double wstar_moment(const PhiTable& tab, double s, int n, int J = 560);

} // namespace exact
} // namespace brw
