#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "brw/exact.hpp"
#include "brw/experiment.hpp"

using namespace brw;

namespace {

std::string slurp(const std::string& path)
{
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void emit(const std::string& out, const std::string& text)
{
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

OffspringLaw law_by_name(const std::string& name, double mu, double sigma2,
                         bool normalize)
{
    ExperimentConfig c;
    c.law_name = name;
    c.law_mu = mu;
    c.law_sigma2 = sigma2;
    c.normalize = normalize;
    return c.make_law();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"branching random walk simulation and estimation toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    bool allow_biased_min = false;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads,
                   "worker threads (accepted for compatibility; execution is serial)");
    app.add_option("--out", out, "output file, - for stdout");
    app.add_flag("--allow-biased-min", allow_biased_min,
                 "permit min-position statistics under pruning/capping");

    std::string law_name = "discrete-binary";
    double law_mu = 0.0, law_sigma2 = 0.0;
    bool normalize = false;
    auto add_law_opts = [&](CLI::App* cmd) {
        cmd->add_option("--law", law_name,
                        "discrete-binary | gw-atoms | gauss-boundary | gaussian-binary");
        cmd->add_option("--mu", law_mu, "gaussian-binary mean");
        cmd->add_option("--sigma2", law_sigma2, "gaussian-binary variance");
        cmd->add_flag("--normalize", normalize, "boundary-normalize the law first");
    };

    // validate
    auto* c_val = app.add_subcommand("validate", "check the boundary assumptions");
    add_law_opts(c_val);

    // simulate
    int n = 10, trials = 100;
    std::string mode_name = "exact";
    double delta = 30.0;
    std::size_t cap = 0;
    double beta = 2.0;
    auto add_mode_opts = [&](CLI::App* cmd) {
        cmd->add_option("--mode", mode_name, "exact | cap | prune | prune_cap");
        cmd->add_option("--delta", delta, "pruning window");
        cmd->add_option("--cap", cap, "population cap");
    };
    auto* c_sim = app.add_subcommand("simulate", "run trials, emit per-trial rows");
    add_law_opts(c_sim);
    add_mode_opts(c_sim);
    c_sim->add_option("-n", n, "horizon");
    c_sim->add_option("--trials", trials, "trial count");
    c_sim->add_option("--beta", beta, "inverse temperature for the w_beta column");

    // spine
    auto* c_spn = app.add_subcommand("spine", "sample tilted spine walks");
    add_law_opts(c_spn);
    c_spn->add_option("-n", n, "steps");
    c_spn->add_option("--trials", trials, "walk count");

    // fixedpoint
    double fp_tol = 1e-6;
    auto* c_fp = app.add_subcommand("fixedpoint", "solve the smoothing-transform fixed point");
    add_law_opts(c_fp);
    c_fp->add_option("--tol", fp_tol, "residual tolerance");

    // experiment
    std::string cfg_path, format = "csv";
    auto* c_exp = app.add_subcommand("experiment", "run a configured experiment");
    c_exp->add_option("--config", cfg_path, "key=value config file, - for stdin")
        ->required();
    c_exp->add_option("--format", format, "csv | markdown");

    // regress
    std::string data_path;
    auto* c_reg = app.add_subcommand("regress", "log-log regression of n,stat CSV");
    c_reg->add_option("--data", data_path, "CSV with n,stat rows, - for stdin")
        ->required();

    // report
    std::string report_path;
    auto* c_rep = app.add_subcommand("report", "reformat a CSV report as markdown");
    c_rep->add_option("--in", report_path, "CSV report path, - for stdin")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::ostringstream os;
        if (c_val->parsed()) {
            auto law = law_by_name(law_name, law_mu, law_sigma2, normalize);
            auto rep = validate_assumptions(law);
            os << "psi0=" << fmt(rep.psi0) << "\npsi1=" << fmt(rep.psi1)
               << "\npsi1_prime=" << fmt(rep.psi1_prime) << "\nboundary="
               << (rep.passes_boundary ? "yes" : "no") << "\nsupercritical="
               << (rep.psi0 > 0.0 ? "yes" : "no") << "\n";
            emit(out, os.str());
            return rep.passes_boundary ? 0 : 2;
        }
        if (c_sim->parsed()) {
            auto law = law_by_name(law_name, law_mu, law_sigma2, normalize);
            ExperimentConfig guard;
            Mode mode = Mode::exact();
            if (mode_name == "cap")
                mode = Mode::cap(cap);
            else if (mode_name == "prune")
                mode = Mode::prune(delta);
            else if (mode_name == "prune_cap")
                mode = Mode::prune_cap(delta, cap);
            else if (mode_name != "exact")
                throw ConfigError("unknown mode: " + mode_name);
            if (!mode.is_exact() && law.d_min < 0.0 && !allow_biased_min)
                std::cerr << "note: min_v column is a lower-bound proxy under "
                             "pruning for this law (see --allow-biased-min)\n";
            os << "trial,survived,k,count,min_v,w,w_beta\n";
            for (int t = 0; t < trials; ++t) {
                auto st = run_trial(law, n, seed, t, mode, {beta});
                const auto& rec = st.gens.back(); // last generation alive
                bool sv = st.gens.size() > static_cast<std::size_t>(n) && rec.survived;
                os << t << "," << (sv ? 1 : 0) << "," << rec.k << "," << rec.count
                   << "," << fmt(rec.min_v) << "," << fmt(rec.w) << ","
                   << fmt(rec.w_beta[0]) << "\n";
            }
            emit(out, os.str());
            return 0;
        }
        if (c_spn->parsed()) {
            auto law = law_by_name(law_name, law_mu, law_sigma2, normalize);
            os << "trial,S_n,min_S,argmin\n";
            for (int t = 0; t < trials; ++t) {
                auto w = sample_walk(law, n, seed, t);
                os << t << "," << fmt(w.steps.back()) << "," << fmt(w.running_min)
                   << "," << w.argmin << "\n";
            }
            emit(out, os.str());
            return 0;
        }
        if (c_fp->parsed()) {
            auto law = law_by_name(law_name, law_mu, law_sigma2, normalize);
            auto tab = solve_phi(law, {}, fp_tol);
            auto [cstar, r2] = cstar_fit(tab);
            os << "# q=" << fmt(tab.q) << " c_star=" << fmt(cstar) << " r2=" << fmt(r2)
               << " tol=" << fmt(tab.tol) << " residual=" << fmt(tab.residual)
               << " scale=" << fmt(tab.scale) << "\n";
            os << "t,phi\n";
            for (std::size_t i = 0; i < tab.x.size(); ++i)
                os << fmt(std::exp(tab.x[i] - tab.scale)) << "," << fmt(tab.phi[i])
                   << "\n";
            emit(out, os.str());
            return 0;
        }
        if (c_exp->parsed()) {
            auto cfg = parse_config(slurp(cfg_path));
            if (app.count("--seed")) cfg.seed = seed;
            cfg.allow_biased_min = allow_biased_min;
            auto res = run_experiment(cfg);
            emit(out, report(res, format));
            return (!cfg.has_bounds || res.bounds_pass) ? 0 : 2;
        }
        if (c_reg->parsed()) {
            std::istringstream is(slurp(data_path));
            std::string line;
            std::vector<std::pair<double, double>> pairs;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
                double a, b;
                if (std::sscanf(line.c_str(), "%lf,%lf", &a, &b) == 2)
                    pairs.push_back({a, b});
            }
            auto f = exponent_regress(pairs);
            os << "slope,intercept,r2\n"
               << fmt(f.slope) << "," << fmt(f.intercept) << "," << fmt(f.r2) << "\n";
            emit(out, os.str());
            return 0;
        }
        if (c_rep->parsed()) {
            auto res = parse_report_csv(slurp(report_path));
            emit(out, report(res, "markdown"));
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
