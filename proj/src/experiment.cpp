#include "brw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "brw/fixedpoint.hpp"

namespace brw {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& key)
{
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + s);
    }
}

long long parse_int(const std::string& s, const std::string& key)
{
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": " + s);
    }
}

double summarize(std::vector<double> v, const std::string& kind, double p)
{
    if (kind == "mean") {
        KahanSum s;
        for (double x : v) s.add(x);
        return s.value() / v.size();
    }
    double q = (kind == "median") ? 0.5 : p;
    std::sort(v.begin(), v.end());
    // interpolated order statistic
    double idx = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    double frac = idx - lo;
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1 - frac) + v[lo + 1] * frac;
}

} // namespace

void ExperimentConfig::validate() const
{
    static const std::vector<std::string> laws = {"discrete-binary", "gw-atoms",
                                                  "gauss-boundary", "gaussian-binary"};
    if (std::find(laws.begin(), laws.end(), law_name) == laws.end())
        throw ConfigError("unknown law: " + law_name);
    if (law_name == "gaussian-binary" && !(law_sigma2 > 0.0))
        throw ConfigError("gaussian-binary needs law.sigma2 > 0");
    if (n_list.empty()) throw ConfigError("n_list must not be empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw ConfigError("n_list must be strictly increasing");
    if (n_list.front() < 0) throw ConfigError("horizons must be nonnegative");
    if (trials < 100) throw ConfigError("trials must be >= 100");
    static const std::vector<std::string> modes = {"exact", "cap", "prune", "prune_cap"};
    if (std::find(modes.begin(), modes.end(), mode_name) == modes.end())
        throw ConfigError("unknown mode: " + mode_name);
    if ((mode_name == "cap" || mode_name == "prune_cap") && cap_size == 0)
        throw ConfigError("mode.cap must be positive");
    if ((mode_name == "prune" || mode_name == "prune_cap") && !(prune_delta > 0.0))
        throw ConfigError("mode.delta must be positive");
    static const std::vector<std::string> stats = {"min_v", "w", "w_beta", "w_star",
                                                   "lambda_w"};
    if (std::find(stats.begin(), stats.end(), statistic) == stats.end())
        throw ConfigError("unknown statistic: " + statistic);
    if (statistic == "w_beta" && !(beta > 0.0))
        throw ConfigError("beta must be positive");
    static const std::vector<std::string> sums = {"mean", "median", "quantile"};
    if (std::find(sums.begin(), sums.end(), summary) == sums.end())
        throw ConfigError("unknown summary: " + summary);
    if (summary == "quantile" && !(quantile_p > 0.0 && quantile_p < 1.0))
        throw ConfigError("summary.p must lie in (0,1)");
    if (conditioning != "all" && conditioning != "survived")
        throw ConfigError("conditioning must be all or survived");
    if (has_bounds && !(slope_lo <= slope_hi))
        throw ConfigError("bounds.slope_lo must not exceed bounds.slope_hi");

    if (statistic == "min_v" && mode_name != "exact" && !allow_biased_min) {
        OffspringLaw law = make_law();
        if (law.d_min < 0.0)
            throw ConfigError(
                "min_v under pruning/capping is biased for laws with negative "
                "displacements; pass --allow-biased-min to override");
    }
}

OffspringLaw ExperimentConfig::make_law() const
{
    OffspringLaw law;
    if (law_name == "discrete-binary")
        law = OffspringLaw::discrete_binary();
    else if (law_name == "gw-atoms")
        law = OffspringLaw::gw_atoms();
    else if (law_name == "gauss-boundary")
        law = OffspringLaw::gauss_boundary();
    else
        law = OffspringLaw::gaussian_binary(law_mu, law_sigma2);
    if (normalize) law = boundary_normalize(law).law;
    return law;
}

Mode ExperimentConfig::make_mode() const
{
    if (mode_name == "cap") return Mode::cap(cap_size);
    if (mode_name == "prune") return Mode::prune(prune_delta);
    if (mode_name == "prune_cap") return Mode::prune_cap(prune_delta, cap_size);
    return Mode::exact();
}

std::string ExperimentConfig::canonical() const
{
    std::ostringstream os;
    os << "law=" << law_name << "\n";
    if (law_name == "gaussian-binary")
        os << "law.mu=" << fmt(law_mu) << "\nlaw.sigma2=" << fmt(law_sigma2) << "\n";
    os << "law.normalize=" << (normalize ? "true" : "false") << "\n";
    os << "n_list=";
    for (std::size_t i = 0; i < n_list.size(); ++i)
        os << (i ? "," : "") << n_list[i];
    os << "\ntrials=" << trials << "\nseed=" << seed << "\n";
    os << "mode=" << mode_name << "\n";
    if (cap_size) os << "mode.cap=" << cap_size << "\n";
    if (mode_name == "prune" || mode_name == "prune_cap")
        os << "mode.delta=" << fmt(prune_delta) << "\n";
    if (statistic == "w_beta") os << "beta=" << fmt(beta) << "\n";
    os << "statistic=" << statistic << "\nsummary=" << summary << "\n";
    if (summary == "quantile") os << "summary.p=" << fmt(quantile_p) << "\n";
    os << "conditioning=" << conditioning << "\n";
    if (has_bounds)
        os << "bounds.slope_lo=" << fmt(slope_lo)
           << "\nbounds.slope_hi=" << fmt(slope_hi) << "\n";
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (key == "law")
            cfg.law_name = val;
        else if (key == "law.mu")
            cfg.law_mu = parse_double(val, key);
        else if (key == "law.sigma2")
            cfg.law_sigma2 = parse_double(val, key);
        else if (key == "law.normalize")
            cfg.normalize = (val == "true" || val == "1");
        else if (key == "n_list") {
            cfg.n_list.clear();
            std::istringstream ns(val);
            std::string tok;
            while (std::getline(ns, tok, ','))
                cfg.n_list.push_back(static_cast<int>(parse_int(trim(tok), key)));
        } else if (key == "trials")
            cfg.trials = static_cast<int>(parse_int(val, key));
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(parse_int(val, key));
        else if (key == "mode")
            cfg.mode_name = val;
        else if (key == "mode.cap")
            cfg.cap_size = static_cast<std::size_t>(parse_int(val, key));
        else if (key == "mode.delta")
            cfg.prune_delta = parse_double(val, key);
        else if (key == "beta")
            cfg.beta = parse_double(val, key);
        else if (key == "statistic")
            cfg.statistic = val;
        else if (key == "summary")
            cfg.summary = val;
        else if (key == "summary.p")
            cfg.quantile_p = parse_double(val, key);
        else if (key == "conditioning")
            cfg.conditioning = val;
        else if (key == "bounds.slope_lo") {
            cfg.slope_lo = parse_double(val, key);
            cfg.has_bounds = true;
        } else if (key == "bounds.slope_hi") {
            cfg.slope_hi = parse_double(val, key);
            cfg.has_bounds = true;
        } else
            throw ConfigError("unknown key: " + key);
    }
    return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    OffspringLaw law = cfg.make_law();
    Mode mode = cfg.make_mode();
    ExperimentResult res;
    res.config = cfg;
    res.config_hash = cfg.hash();

    PhiTable phi;
    if (cfg.statistic == "w_star") phi = solve_phi(law);

    std::vector<std::vector<double>> resampled(cfg.n_list.size());
    const int B = 1000; // bootstrap resamples

    for (std::size_t ci = 0; ci < cfg.n_list.size(); ++ci) {
        int n = cfg.n_list[ci];
        std::vector<double> vals;
        vals.reserve(cfg.trials);

        if (cfg.statistic == "lambda_w") {
            // inherently survival-conditioned by construction
            vals = conditioned_samples(law, n, cfg.trials, cfg.seed, mode);
        } else {
            std::vector<double> betas;
            if (cfg.statistic == "w_beta") betas.push_back(cfg.beta);
            for (int t = 0; t < cfg.trials; ++t) {
                double v = 0.0;
                bool survived = false;
                if (cfg.statistic == "w_star") {
                    Generation gen = Generation::root(law.lattice);
                    for (int k = 1; k <= n && !gen.extinct(); ++k)
                        gen = step_generation(law, gen, cfg.seed, t, mode);
                    survived = !gen.extinct();
                    v = multiplicative(gen.positions, phi);
                } else {
                    auto st = run_trial(law, n, cfg.seed, t, mode, betas);
                    survived = st.gens.size() > static_cast<std::size_t>(n) &&
                               st.gens[n].survived;
                    if (survived) {
                        const auto& rec = st.gens[n];
                        if (cfg.statistic == "min_v")
                            v = rec.min_v;
                        else if (cfg.statistic == "w")
                            v = rec.w;
                        else
                            v = rec.w_beta[0];
                    }
                }
                if (cfg.conditioning == "survived" && !survived) continue;
                vals.push_back(v);
            }
        }
        if (vals.empty())
            throw DegenerateSample("no surviving trials at n = " + std::to_string(n));

        CellSummary cell;
        cell.n = n;
        cell.used = static_cast<int>(vals.size());
        cell.value = summarize(vals, cfg.summary, cfg.quantile_p);

        // bootstrap percentile CI, deterministic resampling streams
        std::vector<double> boot(B), draw(vals.size());
        for (int b = 0; b < B; ++b) {
            Rng rng(cfg.seed, 0xB007u, static_cast<std::uint64_t>(n), b);
            for (std::size_t i = 0; i < vals.size(); ++i)
                draw[i] = vals[static_cast<std::size_t>(rng.uniform() * vals.size()) %
                               vals.size()];
            boot[b] = summarize(draw, cfg.summary, cfg.quantile_p);
        }
        resampled[ci] = boot;
        std::sort(boot.begin(), boot.end());
        cell.ci_lo = boot[static_cast<std::size_t>(0.025 * (B - 1))];
        cell.ci_hi = boot[static_cast<std::size_t>(0.975 * (B - 1))];
        if (cell.ci_lo > cell.value) cell.ci_lo = cell.value;
        if (cell.ci_hi < cell.value) cell.ci_hi = cell.value;
        res.cells.push_back(cell);
    }

    // regression over (n, summary)
    if (res.cells.size() >= 3) {
        const bool semilog = (cfg.statistic == "min_v");
        auto fit = [&](const std::vector<double>& ys) {
            if (semilog) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                double k = static_cast<double>(ys.size());
                for (std::size_t i = 0; i < ys.size(); ++i) {
                    double x = std::log(static_cast<double>(cfg.n_list[i]));
                    sx += x;
                    sy += ys[i];
                    sxx += x * x;
                    sxy += x * ys[i];
                }
                RegressFit f;
                f.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
                f.intercept = (sy - f.slope * sx) / k;
                double ss_res = 0, ss_tot = 0, yb = sy / k;
                for (std::size_t i = 0; i < ys.size(); ++i) {
                    double x = std::log(static_cast<double>(cfg.n_list[i]));
                    double e = ys[i] - (f.slope * x + f.intercept);
                    ss_res += e * e;
                    ss_tot += (ys[i] - yb) * (ys[i] - yb);
                }
                f.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
                return f;
            }
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t i = 0; i < ys.size(); ++i)
                pairs.push_back({static_cast<double>(cfg.n_list[i]), ys[i]});
            return exponent_regress(pairs);
        };
        std::vector<double> point;
        for (const auto& c : res.cells) point.push_back(c.value);
        auto f = fit(point);
        res.slope = f.slope;
        res.intercept = f.intercept;
        res.r2 = f.r2;
        res.has_regression = true;

        // slope CI from the paired bootstrap replicates
        std::vector<double> slopes;
        slopes.reserve(B);
        std::vector<double> ys(res.cells.size());
        for (int b = 0; b < B; ++b) {
            bool ok = true;
            for (std::size_t i = 0; i < res.cells.size(); ++i) {
                ys[i] = resampled[i][b];
                if (!semilog && !(ys[i] > 0.0)) ok = false;
            }
            if (ok) slopes.push_back(fit(ys).slope);
        }
        std::sort(slopes.begin(), slopes.end());
        if (!slopes.empty()) {
            res.slope_ci_lo = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
            res.slope_ci_hi = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
        }
        if (cfg.has_bounds)
            res.bounds_pass = (res.slope >= cfg.slope_lo && res.slope <= cfg.slope_hi);
    } else if (cfg.has_bounds) {
        res.bounds_pass = false;
    }
    return res;
}

std::string report(const ExperimentResult& r, const std::string& format)
{
    std::ostringstream os;
    if (format == "csv") {
        os << "# config_hash=" << std::hex << r.config_hash << std::dec
           << " seed=" << r.config.seed << " version=" << r.version << "\n";
        os << "n,value,ci_lo,ci_hi,used\n";
        for (const auto& c : r.cells)
            os << c.n << "," << fmt(c.value) << "," << fmt(c.ci_lo) << ","
               << fmt(c.ci_hi) << "," << c.used << "\n";
        if (r.has_regression)
            os << "regression,slope,slope_ci_lo,slope_ci_hi,intercept,r2\n"
               << "regression," << fmt(r.slope) << "," << fmt(r.slope_ci_lo) << ","
               << fmt(r.slope_ci_hi) << "," << fmt(r.intercept) << "," << fmt(r.r2)
               << "\n";
        if (r.config.has_bounds)
            os << "bounds," << fmt(r.config.slope_lo) << "," << fmt(r.config.slope_hi)
               << "," << (r.bounds_pass ? "pass" : "fail") << "\n";
        return os.str();
    }
    if (format != "markdown") throw ConfigError("unknown report format: " + format);
    os << "## Experiment report\n\n";
    os << "config hash: `" << std::hex << r.config_hash << std::dec << "`  \n";
    os << "seed: " << r.config.seed << ", statistic: " << r.config.statistic
       << ", summary: " << r.config.summary << ", conditioning: "
       << r.config.conditioning << "\n\n";
    os << "| n | value | 95% CI | trials used |\n|---|---|---|---|\n";
    for (const auto& c : r.cells)
        os << "| " << c.n << " | " << fmt(c.value) << " | [" << fmt(c.ci_lo) << ", "
           << fmt(c.ci_hi) << "] | " << c.used << " |\n";
    if (r.has_regression) {
        os << "\nregression: slope " << fmt(r.slope) << " (95% CI ["
           << fmt(r.slope_ci_lo) << ", " << fmt(r.slope_ci_hi) << "]), intercept "
           << fmt(r.intercept) << ", R^2 " << fmt(r.r2) << "\n";
    }
    if (r.config.has_bounds)
        os << "\nbound slope in [" << fmt(r.config.slope_lo) << ", "
           << fmt(r.config.slope_hi) << "]: " << (r.bounds_pass ? "PASS" : "FAIL")
           << "\n";
    return os.str();
}

ExperimentResult parse_report_csv(const std::string& text)
{
    ExperimentResult r;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            std::size_t hp = s.find("config_hash=");
            if (hp != std::string::npos)
                r.config_hash = std::stoull(s.substr(hp + 12), nullptr, 16);
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ls(s);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (f.empty()) continue;
        if (f[0] == "n" || (f[0] == "regression" && f.size() > 1 && f[1] == "slope"))
            continue; // header rows
        if (f[0] == "regression") {
            if (f.size() != 6) throw ConfigError("bad regression row");
            r.slope = std::stod(f[1]);
            r.slope_ci_lo = std::stod(f[2]);
            r.slope_ci_hi = std::stod(f[3]);
            r.intercept = std::stod(f[4]);
            r.r2 = std::stod(f[5]);
            r.has_regression = true;
            continue;
        }
        if (f[0] == "bounds") {
            if (f.size() != 4) throw ConfigError("bad bounds row");
            r.config.has_bounds = true;
            r.config.slope_lo = std::stod(f[1]);
            r.config.slope_hi = std::stod(f[2]);
            r.bounds_pass = (f[3] == "pass");
            continue;
        }
        if (f.size() != 5) throw ConfigError("bad data row: " + s);
        CellSummary c;
        c.n = static_cast<int>(std::stoll(f[0]));
        c.value = std::stod(f[1]);
        c.ci_lo = std::stod(f[2]);
        c.ci_hi = std::stod(f[3]);
        c.used = static_cast<int>(std::stoll(f[4]));
        r.cells.push_back(c);
    }
    return r;
}

} // namespace brw
