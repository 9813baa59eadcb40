// tbdyn: simulate, analyse and sweep the generalized Truscott-Brindley
// plankton model. Subcommands: simulate, stability, sweep, roots.
//
// Exit codes: 0 success, 2 usage/validation error, 3 dynamical terminal
// failure (ArgumentDomainError / IntegrationError), with output files still
// written.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tbdyn/tbdyn.hpp"

namespace fs = std::filesystem;
using namespace tbdyn;

namespace {

struct ModelFlags {
    double alpha = 1.9, lambda = 0.057, beta = 1.3, gamma = 0.5, mu = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "growth/predation ratio r/omega");
        cmd->add_option("--lambda", lambda, "shape ratio a/K");
        cmd->add_option("--beta", beta, "biomass conversion ratio");
        cmd->add_option("--gamma", gamma, "removal/predation ratio eta/omega");
        cmd->add_option("--mu", mu, "generalization exponent (>= 0)");
    }

    ModelParams params() const {
        ModelParams p{alpha, lambda, beta, gamma, mu};
        p.validate();
        return p;
    }
};

std::string default_outdir() {
    if (const char* env = std::getenv("TBDYN_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

void print_equilibrium_summary(const ModelParams& p) {
    const StabilityReport rep = stability_report(p);
    std::cout << "equilibria:\n";
    std::cout << "  E0 = (0, 0)  " << to_string(rep.origin.local.kind) << "\n";
    std::cout << "  E1 = (1, 0)  " << to_string(rep.phyto_only.numeric.kind) << "\n";
    for (size_t i = 0; i < rep.interior.size(); ++i) {
        const auto& e = rep.interior[i];
        std::cout << "  E* = (" << io::format_sig(e.state.x, 10) << ", "
                  << io::format_sig(e.state.y, 10) << ")  "
                  << to_string(rep.interior_classification[i].numeric.kind) << "\n";
    }
    if (rep.interior.empty()) std::cout << "  (no interior equilibrium)\n";
}

int run_simulate(const ModelFlags& mf, double x0, double y0, double t_end, double rel_tol,
                 double abs_tol, const std::string& method, int n0, double t_m_override,
                 int quad_nodes, bool consistent, const std::string& outdir, int points) {
    const ModelParams p = mf.params();
    fs::create_directories(outdir);

    const Trajectory traj = integrate(p, {x0, y0}, t_end, rel_tol, abs_tol);
    const PhasePortraitData data = phase_portrait_data(traj, points);
    io::write_file(outdir + "/timeseries.csv", io::timeseries_csv(data));
    io::write_file(outdir + "/orbit.csv", io::orbit_csv(data));

    const auto eqs = equilibria(p);
    std::string label;
    try {
        label = to_string(classify(traj, p, eqs).kind);
    } catch (const inconclusive_error& e) {
        label = "Inconclusive";
        std::cout << "note: " << e.what() << "\n";
    }

    int rc = (label == "ArgumentDomainError" || label == "IntegrationError") ? 3 : 0;

    if (method == "bpes") {
        BpesConfig cfg;
        cfg.n0 = n0;
        cfg.x0 = x0;
        cfg.y0 = y0;
        cfg.t_m = t_m_override;
        cfg.quadrature_nodes = quad_nodes;
        cfg.consistent_scaling = consistent;
        try {
            const BpesSolution sol = solve(p, cfg);
            PhasePortraitData bdata;
            double dev = 0.0;
            const int npts = 501;
            for (int i = 0; i < npts; ++i) {
                const double t = sol.t_m * i / (npts - 1);
                const State s = sol.evaluate(t);
                bdata.t.push_back(t);
                bdata.series.push_back(s);
                const State r = traj.sample(t);
                dev = std::max(dev, std::max(std::abs(s.x - r.x), std::abs(s.y - r.y)));
            }
            io::write_file(outdir + "/bpes_timeseries.csv", io::timeseries_csv(bdata));
            io::write_file(outdir + "/bpes_solution.json", solution_to_json(sol).dump(2) + "\n");
            std::cout << "bpes: n0=" << n0 << " t_m=" << io::format_sig(sol.t_m, 10)
                      << " objective=" << io::format_sig(sol.objective_value, 6)
                      << " iterations=" << sol.diagnostics.iterations << "\n";
            std::cout << "bpes max-abs deviation from reference on [0, t_m]: "
                      << io::format_sig(dev, 6) << "\n";
        } catch (const argument_domain_error& e) {
            std::cout << "bpes: ArgumentDomainError (" << e.what() << ")\n";
            rc = 3;
        }
    }

    std::cout << "regime: " << label << "\n";
    print_equilibrium_summary(p);
    std::cout << "wrote " << outdir << "/timeseries.csv, " << outdir << "/orbit.csv\n";
    return rc;
}

int run_stability(const ModelFlags& mf, int samples, double domain_hi,
                  const std::string& out) {
    const ModelParams p = mf.params();
    StabilityReport rep = stability_report(p);
    if (rep.series_supported && (samples != 10001 || domain_hi != 1.0)) {
        rep.global.clear();
        for (const auto& e : rep.interior)
            rep.global.push_back(global_condition(p, e, {0.0, domain_hi}, samples));
    }
    const std::string text = stability_report_to_json(rep).dump(2) + "\n";
    if (!out.empty())
        io::write_file(out, text);
    else
        std::cout << text;
    return 0;
}

int run_sweep(const ModelFlags& mf, double x0, double y0, double t_end, double rel_tol,
              const std::string& vary, double from, double to, int npoints,
              const std::string& config_path, const std::string& outdir,
              const std::string& outfile) {
    SweepSpec spec;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw validation_error("cannot open config file " + config_path);
        json j = json::parse(f);
        if (j.contains("sweep")) j = j.at("sweep");
        spec = j.get<SweepSpec>();
    } else {
        if (npoints < 1) throw validation_error("--points must be >= 1");
        if (npoints > 1 && !(to > from))
            throw validation_error("--to must exceed --from for multi-point sweeps");
        spec.base = mf.params();
        spec.initial = {x0, y0};
        spec.varying = varying_from_string(vary);
        spec.t_end = t_end;
        spec.rel_tol = rel_tol;
        for (int i = 0; i < npoints; ++i)
            spec.grid.push_back(npoints == 1 ? from : from + (to - from) * i / (npoints - 1));
    }
    const SweepResult result = sweep(spec);
    fs::create_directories(outdir);
    const std::string path = outdir + "/" + outfile;
    io::write_file(path, io::sweep_csv(result));

    // contiguous same-label runs, mirroring the interval lists in the tables
    std::cout << "sweep over " << to_string(spec.varying) << " (" << spec.grid.size()
              << " points):\n";
    size_t i = 0;
    while (i < result.rows.size()) {
        size_t j = i;
        while (j + 1 < result.rows.size() && result.rows[j + 1].label == result.rows[i].label)
            ++j;
        std::cout << "  " << result.rows[i].label << ": "
                  << io::format_sig(result.rows[i].value, 6) << " .. "
                  << io::format_sig(result.rows[j].value, 6) << "  (" << (j - i + 1)
                  << " points)\n";
        i = j + 1;
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int run_roots(int q_max, const std::string& out) {
    if (q_max < 1) throw validation_error("--q-max must be >= 1");
    RootTable table(q_max);
    for (const auto& [q, v] : table.entries()) {
        const double resid = std::abs(boubaker_value(4 * q, v).first);
        if (resid > 1e-6)
            throw evaluation_error("root revalidation failed for q = " + std::to_string(q));
    }
    const std::string text = io::roots_csv(table);
    if (!out.empty())
        io::write_file(out, text);
    else
        std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Truscott-Brindley plankton model toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory and classify it");
    ModelFlags sim_mf;
    sim_mf.attach(sim);
    double x0 = 0.9, y0 = 0.5, t_end = 500.0, rel_tol = 1e-9, abs_tol = 1e-12;
    std::string method = "reference";
    int n0 = 20, quad_nodes = 257, points = 2001;
    double t_m_override = 0.0;
    bool consistent = false;
    std::string outdir = default_outdir();
    sim->add_option("--x0", x0, "initial phytoplankton density");
    sim->add_option("--y0", y0, "initial zooplankton density");
    sim->add_option("--t-end", t_end, "integration horizon");
    sim->add_option("--rel-tol", rel_tol, "relative tolerance");
    sim->add_option("--abs-tol", abs_tol, "absolute tolerance");
    sim->add_option("--method", method, "reference | bpes")
        ->check(CLI::IsMember({"reference", "bpes"}));
    sim->add_option("--n0", n0, "BPES truncation order");
    sim->add_option("--t-m", t_m_override, "override characteristic time (0 = formula)");
    sim->add_option("--quadrature-nodes", quad_nodes, "BPES quadrature nodes (odd)");
    sim->add_flag("--consistent-scaling", consistent, "uniform 1/(2 N0) residual scaling");
    sim->add_option("--out", outdir, "output directory");
    sim->add_option("--points", points, "resample points for CSV output");

    // stability
    auto* stab = app.add_subcommand("stability", "equilibria and stability report (JSON)");
    ModelFlags stab_mf;
    stab_mf.attach(stab);
    int samples = 10001;
    double domain_hi = 1.0;
    std::string stab_out;
    stab->add_option("--samples", samples, "global-condition sample count");
    stab->add_option("--domain-hi", domain_hi, "global-condition domain upper end");
    stab->add_option("--out", stab_out, "write JSON to file instead of stdout");

    // sweep
    auto* sw = app.add_subcommand("sweep", "classify a grid of parameter values");
    ModelFlags sw_mf;
    sw_mf.attach(sw);
    double sw_x0 = 0.9, sw_y0 = 0.5, sw_t_end = 500.0, sw_rel_tol = 1e-9;
    std::string vary = "gamma", config_path;
    double from = 0.1, to = 1.0;
    int npoints = 10;
    std::string sw_outdir = default_outdir(), sw_outfile = "sweep.csv";
    sw->add_option("--x0", sw_x0, "initial phytoplankton density");
    sw->add_option("--y0", sw_y0, "initial zooplankton density");
    sw->add_option("--t-end", sw_t_end, "integration horizon");
    sw->add_option("--rel-tol", sw_rel_tol, "relative tolerance");
    sw->add_option("--vary", vary, "parameter to vary: alpha|lambda|beta|gamma");
    sw->add_option("--from", from, "grid start");
    sw->add_option("--to", to, "grid end");
    sw->add_option("--points", npoints, "grid size");
    sw->add_option("--config", config_path, "JSON sweep spec (overrides flags)");
    sw->add_option("--out", sw_outdir, "output directory");
    sw->add_option("--outfile", sw_outfile, "sweep CSV filename");

    // roots
    auto* rt = app.add_subcommand("roots", "minimal positive roots v_q of B_{4q} (CSV)");
    int q_max = 10;
    std::string rt_out;
    rt->add_option("--q-max", q_max, "largest q");
    rt->add_option("--out", rt_out, "write CSV to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_mf, x0, y0, t_end, rel_tol, abs_tol, method, n0,
                                t_m_override, quad_nodes, consistent, outdir, points);
        if (stab->parsed()) return run_stability(stab_mf, samples, domain_hi, stab_out);
        if (sw->parsed())
            return run_sweep(sw_mf, sw_x0, sw_y0, sw_t_end, sw_rel_tol, vary, from, to,
                             npoints, config_path, sw_outdir, sw_outfile);
        if (rt->parsed()) return run_roots(q_max, rt_out);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const unsupported_exponent& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 2;
    } catch (const argument_domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
