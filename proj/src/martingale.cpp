#include "brw/martingale.hpp"

#include <cmath>

namespace brw {

double additive(const std::vector<double>& positions)
{
    KahanSum s;
    for (double v : positions) s.add(std::exp(-v));
    return s.value();
}

double partition(const std::vector<double>& positions, double beta)
{
    if (!(beta > 0.0)) throw DomainError("partition: beta must be positive");
    if (beta == 1.0) return additive(positions);
    KahanSum s;
    for (double v : positions) s.add(std::exp(-beta * v));
    return s.value();
}

double multiplicative(const std::vector<double>& positions, const PhiTable& phi)
{
    KahanSum logw; // accumulates -log phi terms
    for (double v : positions) {
        double arg = std::exp(-v);
        if (arg > 0.0) logw.add(phi.log_inv(arg));
    }
    return std::exp(-logw.value());
}

namespace {

std::vector<double> w_samples(const OffspringLaw& law, int n, int trials,
                              std::uint64_t seed, Mode mode)
{
    std::vector<double> w(trials);
    for (int t = 0; t < trials; ++t) {
        auto st = run_trial(law, n, seed, t, mode);
        w[t] = (st.gens.size() > static_cast<std::size_t>(n)) ? st.gens[n].w : 0.0;
    }
    return w;
}

} // namespace

NormingEstimate estimate_lambda(const OffspringLaw& law, int n, int trials,
                                std::uint64_t seed, Mode mode)
{
    if (trials <= 0) throw DegenerateSample("estimate_lambda: need trials > 0");
    auto w = w_samples(law, n, trials, seed, mode);
    KahanSum s, s2;
    for (double v : w) {
        double r = std::sqrt(v);
        s.add(r);
        s2.add(v); // r^2 = v
    }
    double m = s.value() / trials;
    if (m <= 0.0) throw DegenerateSample("all trials extinct");
    double var = std::max(0.0, s2.value() / trials - m * m);
    double se_m = std::sqrt(var / trials);
    NormingEstimate est;
    est.n = n;
    est.lambda_n = 1.0 / (m * m);
    est.std_error = 2.0 * se_m / (m * m * m); // delta method for m^{-2}
    est.trials = trials;
    return est;
}

std::vector<double> conditioned_samples(const OffspringLaw& law, int n, int trials,
                                        std::uint64_t seed, Mode mode)
{
    auto w = w_samples(law, n, trials, seed, mode);
    KahanSum s;
    for (double v : w) s.add(std::sqrt(v));
    double m = s.value() / trials;
    if (m <= 0.0) throw DegenerateSample("all trials extinct");
    double lambda = 1.0 / (m * m);
    std::vector<double> out;
    for (double v : w)
        if (v > 0.0) out.push_back(lambda * v);
    if (out.empty()) throw DegenerateSample("no surviving trials");
    return out;
}

} // namespace brw
