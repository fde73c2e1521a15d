#include "brw/model.hpp"

#include <algorithm>
#include <cmath>

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_log(double x)
{
    if (x <= 0.0) return -kInf;
    return std::log(x);
}

std::vector<double> cumulate(const std::vector<double>& w)
{
    std::vector<double> c(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        c[i] = acc;
    }
    return c;
}

} // namespace

OffspringLaw finish_law(OffspringLaw law)
{
    law.validate_construction();
    law.detect_lattice();
    switch (law.kind) {
    case LawKind::DiscreteAtoms: {
        std::vector<double> wo, wa;
        for (auto& [k, pr] : law.offspring_pmf) wo.push_back(pr);
        for (auto& a : law.atoms) wa.push_back(a.prob);
        law.cum_offspring_ = cumulate(wo);
        law.cum_atoms_ = cumulate(wa);
        break;
    }
    case LawKind::JointAtoms: {
        std::vector<double> wb;
        for (auto& b : law.broods) wb.push_back(b.prob);
        law.cum_broods_ = cumulate(wb);
        break;
    }
    case LawKind::GaussianBinary:
        break;
    }
    return law;
}

OffspringLaw OffspringLaw::gaussian_binary(double mu, double sigma2)
{
    OffspringLaw law;
    law.kind = LawKind::GaussianBinary;
    law.mu = mu;
    law.sigma2 = sigma2;
    law.d_min = -kInf;
    law.name = "gaussian-binary";
    return finish_law(std::move(law));
}

OffspringLaw OffspringLaw::discrete_atoms(std::vector<std::pair<int, double>> pmf,
                                          std::vector<Atom> atoms)
{
    OffspringLaw law;
    law.kind = LawKind::DiscreteAtoms;
    law.offspring_pmf = std::move(pmf);
    law.atoms = std::move(atoms);
    double lo = kInf;
    for (auto& a : law.atoms) lo = std::min(lo, a.v);
    law.d_min = lo;
    law.name = "discrete-atoms";
    return finish_law(std::move(law));
}

OffspringLaw OffspringLaw::joint_atoms(std::vector<BroodOutcome> broods)
{
    OffspringLaw law;
    law.kind = LawKind::JointAtoms;
    law.broods = std::move(broods);
    double lo = kInf;
    for (auto& b : law.broods)
        for (double v : b.disp) lo = std::min(lo, v);
    law.d_min = lo;
    law.name = "joint-atoms";
    return finish_law(std::move(law));
}

OffspringLaw OffspringLaw::discrete_binary()
{
    // two children, displacements independently +h with prob p, -h otherwise,
    // h = arccosh(2), p = (2+sqrt(3))/4; this puts psi(1) = psi'(1) = 0 exactly
    const double h = std::log(2.0 + std::sqrt(3.0));
    const double p = (2.0 + std::sqrt(3.0)) / 4.0;
    std::vector<BroodOutcome> b = {
        {{+h, +h}, p * p},
        {{+h, -h}, p * (1.0 - p)},
        {{-h, +h}, (1.0 - p) * p},
        {{-h, -h}, (1.0 - p) * (1.0 - p)},
    };
    OffspringLaw law = joint_atoms(std::move(b));
    law.name = "discrete-binary";
    return law;
}

OffspringLaw OffspringLaw::gw_atoms()
{
    // offspring {0:1/4, 2:3/4}; +-h' with cosh h' = 3/2 and p' = e^{h'}/3
    // keeps the boundary normalization with a nontrivial extinction prob 1/3
    const double hp = std::acosh(1.5);
    const double pp = std::exp(hp) / 3.0;
    OffspringLaw law = discrete_atoms({{0, 0.25}, {2, 0.75}},
                                      {{+hp, pp}, {-hp, 1.0 - pp}});
    law.name = "gw-atoms";
    return law;
}

OffspringLaw OffspringLaw::gauss_boundary()
{
    const double l2 = std::log(2.0);
    OffspringLaw law = gaussian_binary(2.0 * l2, 2.0 * l2);
    law.name = "gauss-boundary";
    return law;
}

void OffspringLaw::validate_construction() const
{
    auto check_pmf = [](double total, const char* what) {
        if (std::abs(total - 1.0) > 1e-12)
            throw DomainError(std::string(what) + " probabilities sum to " +
                              std::to_string(total) + ", expected 1");
    };
    switch (kind) {
    case LawKind::GaussianBinary:
        if (!(sigma2 > 0.0)) throw DomainError("gaussian-binary needs sigma2 > 0");
        break;
    case LawKind::DiscreteAtoms: {
        double so = 0.0, sa = 0.0;
        for (auto& [k, pr] : offspring_pmf) {
            if (k < 0 || pr < 0.0) throw DomainError("bad offspring pmf entry");
            so += pr;
        }
        for (auto& a : atoms) {
            if (a.prob < 0.0) throw DomainError("negative atom probability");
            sa += a.prob;
        }
        check_pmf(so, "offspring");
        check_pmf(sa, "displacement");
        break;
    }
    case LawKind::JointAtoms: {
        double sb = 0.0;
        for (auto& b : broods) {
            if (b.prob < 0.0) throw DomainError("negative brood probability");
            sb += b.prob;
        }
        check_pmf(sb, "brood");
        break;
    }
    }
    if (std::isfinite(d_min)) {
        if (kind == LawKind::GaussianBinary)
            throw DomainError("gaussian-binary has unbounded displacements");
        // verified against atoms in detect path below
    }
}

void OffspringLaw::detect_lattice()
{
    lattice = false;
    lat_h = 0.0;
    if (kind == LawKind::GaussianBinary) return;
    std::vector<double> vals;
    if (kind == LawKind::DiscreteAtoms)
        for (auto& a : atoms) vals.push_back(a.v);
    else
        for (auto& b : broods)
            for (double v : b.disp) vals.push_back(v);
    if (vals.empty()) return;
    double h = 0.0;
    for (double v : vals)
        if (std::abs(v) > 1e-14) h = (h == 0.0) ? std::abs(v) : std::min(h, std::abs(v));
    if (h == 0.0) {
        // all displacements are zero: degenerate lattice with unit spacing
        lattice = true;
        lat_h = 1.0;
        return;
    }
    for (double v : vals) {
        double r = v / h;
        if (std::abs(r - std::round(r)) > 1e-9) return;
    }
    lattice = true;
    lat_h = h;
}

double OffspringLaw::mean_offspring() const
{
    switch (kind) {
    case LawKind::GaussianBinary:
        return 2.0;
    case LawKind::DiscreteAtoms: {
        double m = 0.0;
        for (auto& [k, pr] : offspring_pmf) m += k * pr;
        return m;
    }
    case LawKind::JointAtoms: {
        double m = 0.0;
        for (auto& b : broods) m += static_cast<double>(b.disp.size()) * b.prob;
        return m;
    }
    }
    return 0.0;
}

int OffspringLaw::max_offspring() const
{
    switch (kind) {
    case LawKind::GaussianBinary:
        return 2;
    case LawKind::DiscreteAtoms: {
        int m = 0;
        for (auto& [k, pr] : offspring_pmf)
            if (pr > 0.0) m = std::max(m, k);
        return m;
    }
    case LawKind::JointAtoms: {
        std::size_t m = 0;
        for (auto& b : broods)
            if (b.prob > 0.0) m = std::max(m, b.disp.size());
        return static_cast<int>(m);
    }
    }
    return 0;
}

double OffspringLaw::pgf(double s) const
{
    switch (kind) {
    case LawKind::GaussianBinary:
        return s * s;
    case LawKind::DiscreteAtoms: {
        double acc = 0.0;
        for (auto& [k, pr] : offspring_pmf) acc += pr * std::pow(s, k);
        return acc;
    }
    case LawKind::JointAtoms: {
        double acc = 0.0;
        for (auto& b : broods) acc += b.prob * std::pow(s, static_cast<double>(b.disp.size()));
        return acc;
    }
    }
    return 0.0;
}

void OffspringLaw::sample_brood(Rng& rng, std::vector<double>& out) const
{
    out.clear();
    switch (kind) {
    case LawKind::GaussianBinary: {
        double sd = std::sqrt(sigma2);
        out.push_back(mu + sd * rng.normal());
        out.push_back(mu + sd * rng.normal());
        break;
    }
    case LawKind::DiscreteAtoms: {
        int n = offspring_pmf[rng.pick(cum_offspring_)].first;
        for (int i = 0; i < n; ++i) out.push_back(atoms[rng.pick(cum_atoms_)].v);
        break;
    }
    case LawKind::JointAtoms: {
        const auto& b = broods[rng.pick(cum_broods_)];
        out.assign(b.disp.begin(), b.disp.end());
        break;
    }
    }
}

void OffspringLaw::sample_brood_lattice(Rng& rng, std::vector<std::int64_t>& out) const
{
    out.clear();
    switch (kind) {
    case LawKind::DiscreteAtoms: {
        int n = offspring_pmf[rng.pick(cum_offspring_)].first;
        for (int i = 0; i < n; ++i) {
            double v = atoms[rng.pick(cum_atoms_)].v;
            out.push_back(std::llround(v / lat_h));
        }
        break;
    }
    case LawKind::JointAtoms: {
        const auto& b = broods[rng.pick(cum_broods_)];
        for (double v : b.disp) out.push_back(std::llround(v / lat_h));
        break;
    }
    default:
        throw DomainError("lattice sampling on a non-lattice law");
    }
}

double psi(const OffspringLaw& law, double t)
{
    switch (law.kind) {
    case LawKind::GaussianBinary:
        // log(2 E e^{-t X}) with X ~ N(mu, sigma2)
        return std::log(2.0) - t * law.mu + 0.5 * t * t * law.sigma2;
    case LawKind::DiscreteAtoms: {
        double mgf = 0.0;
        for (auto& a : law.atoms) mgf += a.prob * std::exp(-t * a.v);
        return checked_log(law.mean_offspring() * mgf);
    }
    case LawKind::JointAtoms: {
        double s = 0.0;
        for (auto& b : law.broods)
            for (double v : b.disp) s += b.prob * std::exp(-t * v);
        return checked_log(s);
    }
    }
    throw DomainError("unknown law kind");
}

double psi_prime(const OffspringLaw& law, double t)
{
    switch (law.kind) {
    case LawKind::GaussianBinary:
        return -law.mu + t * law.sigma2;
    case LawKind::DiscreteAtoms: {
        double num = 0.0, den = 0.0;
        for (auto& a : law.atoms) {
            double w = a.prob * std::exp(-t * a.v);
            den += w;
            num += a.v * w;
        }
        if (den <= 0.0) throw DomainError("psi'(t) undefined: zero mass");
        return -num / den;
    }
    case LawKind::JointAtoms: {
        double num = 0.0, den = 0.0;
        for (auto& b : law.broods)
            for (double v : b.disp) {
                double w = b.prob * std::exp(-t * v);
                den += w;
                num += v * w;
            }
        if (den <= 0.0) throw DomainError("psi'(t) undefined: zero mass");
        return -num / den;
    }
    }
    throw DomainError("unknown law kind");
}

AssumptionReport validate_assumptions(const OffspringLaw& law, double tolerance)
{
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
    AssumptionReport rep;
    rep.tolerance = tolerance;
    rep.psi0 = psi(law, 0.0);
    // finite offspring support (or fixed count 2) and atom/Gaussian displacements
    // give every moment required; these are structural for the supported kinds
    rep.moment_1_plus_delta_finite = true;
    rep.exp_moments_finite = true;
    if (!std::isfinite(rep.psi0)) {
        rep.psi1 = -kInf;
        rep.psi1_prime = 0.0;
        rep.passes_boundary = false;
        return rep;
    }
    rep.psi1 = psi(law, 1.0);
    rep.psi1_prime = psi_prime(law, 1.0);
    rep.passes_boundary = rep.psi0 > 0.0 && std::abs(rep.psi1) <= tolerance &&
                          std::abs(rep.psi1_prime) <= tolerance &&
                          rep.moment_1_plus_delta_finite && rep.exp_moments_finite;
    return rep;
}

namespace {

OffspringLaw rescale_law(const OffspringLaw& law, double t_star, double shift)
{
    // V-hat = t* V + psi(t*) per generation step
    switch (law.kind) {
    case LawKind::GaussianBinary:
        return OffspringLaw::gaussian_binary(t_star * law.mu + shift,
                                             t_star * t_star * law.sigma2);
    case LawKind::DiscreteAtoms: {
        std::vector<Atom> atoms = law.atoms;
        for (auto& a : atoms) a.v = t_star * a.v + shift;
        return OffspringLaw::discrete_atoms(law.offspring_pmf, std::move(atoms));
    }
    case LawKind::JointAtoms: {
        std::vector<BroodOutcome> broods = law.broods;
        for (auto& b : broods)
            for (double& v : b.disp) v = t_star * v + shift;
        return OffspringLaw::joint_atoms(std::move(broods));
    }
    }
    throw DomainError("unknown law kind");
}

} // namespace

BoundaryResult boundary_normalize(const OffspringLaw& law,
                                  std::pair<double, double> t_bracket, double tol)
{
    auto [lo, hi] = t_bracket;
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("bad bracket");
    auto g = [&](double t) { return t * psi_prime(law, t) - psi(law, t); };

    double a = lo, b = hi;
    double ga = g(a), gb = g(b);
    if (ga * gb > 0.0) {
        // scan log-spaced probes for a sign change before giving up
        const int probes = 200;
        double prev_t = a, prev_g = ga;
        bool found = false;
        for (int i = 1; i <= probes; ++i) {
            double t = a * std::pow(b / a, static_cast<double>(i) / probes);
            double gt = g(t);
            if (prev_g * gt <= 0.0) {
                a = prev_t;
                b = t;
                ga = prev_g;
                found = true;
                break;
            }
            prev_t = t;
            prev_g = gt;
        }
        if (!found)
            throw NoSolution("t psi'(t) - psi(t) keeps one sign over the bracket");
    }
    while (b - a > tol) {
        double mid = 0.5 * (a + b);
        double gm = g(mid);
        if (ga * gm <= 0.0) {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    double t_star = 0.5 * (a + b);
    BoundaryResult res;
    res.t_star = t_star;
    res.law = rescale_law(law, t_star, psi(law, t_star));
    res.law.name = law.name.empty() ? "boundary" : law.name + "-boundary";
    return res;
}

double extinction_prob(const OffspringLaw& law, double tol)
{
    if (law.mean_offspring() <= 1.0 + 1e-12)
        throw NotSupercritical("mean offspring <= 1");
    double q = 0.0;
    for (int it = 0; it < 100000; ++it) {
        double next = law.pgf(q);
        if (std::abs(next - q) < tol * 0.1) {
            q = next;
            break;
        }
        q = next;
    }
    return q;
}

} // namespace brw
