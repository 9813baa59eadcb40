#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tbdyn/tbdyn.hpp"

using namespace tbdyn;
namespace fs = std::filesystem;

namespace {

const ModelParams kBaseline{1.9, 0.057, 1.3, 0.5, 0.0};

struct CommandResult {
    int exit_code;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    const std::string out_path =
        (fs::temp_directory_path() / "tbdyn_cli_out.txt").string();
    const std::string cmd = std::string(TBDYN_CLI_PATH) + " " + args + " > " + out_path +
                            " 2>&1";
    const int raw = std::system(cmd.c_str());
    std::ifstream f(out_path);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("csv formatting: significant digits and LF endings") {
    CHECK(io::format_sig(1.0 / 3.0, 12) == "0.333333333333");
    CHECK(io::format_sig(1.189207115002721, 15) == "1.18920711500272");
    PhasePortraitData data;
    data.t = {0.0, 1.0};
    data.series = {{0.9, 0.5}, {0.25, 0.125}};
    const std::string csv = io::timeseries_csv(data);
    CHECK(csv == "t,x,y\n0,0.9,0.5\n1,0.25,0.125\n");
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(io::orbit_csv(data) == "x,y\n0.9,0.5\n0.25,0.125\n");
}

TEST_CASE("sweep csv: header and quoted evidence json") {
    SweepSpec spec;
    spec.base = kBaseline;
    spec.initial = {0.9, 0.5};
    spec.varying = VaryingParam::Gamma;
    spec.grid = {2.0};
    spec.t_end = 200.0;
    const std::string csv = io::sweep_csv(sweep(spec));
    CHECK(csv.rfind("parameter,value,label,final_x,final_y,evidence_json\n", 0) == 0);
    CHECK(csv.find("gamma,2,Extinction,") != std::string::npos);
    CHECK(csv.find("\"{") != std::string::npos); // evidence is a quoted JSON object
}

TEST_CASE("model params json round-trip is exact") {
    const ModelParams p{1.9, 0.057, 1.3, 0.5, 0.5};
    const json j = p;
    const ModelParams q = j.get<ModelParams>();
    CHECK(q.alpha == p.alpha);
    CHECK(q.lambda == p.lambda);
    CHECK(q.beta == p.beta);
    CHECK(q.gamma == p.gamma);
    CHECK(q.mu == p.mu);
}

TEST_CASE("sweep spec json round-trip") {
    SweepSpec spec;
    spec.base = kBaseline;
    spec.initial = {0.9, 0.5};
    spec.varying = VaryingParam::Beta;
    spec.grid = {0.5, 0.7, 0.9};
    spec.t_end = 321.0;
    const json j = spec;
    const SweepSpec back = j.get<SweepSpec>();
    CHECK(back.varying == VaryingParam::Beta);
    CHECK(back.grid == spec.grid);
    CHECK(back.t_end == spec.t_end);
    CHECK(back.base.alpha == spec.base.alpha);
    CHECK(back.initial.x == spec.initial.x);
}

TEST_CASE("stability report json: params round-trip through the config parser") {
    const StabilityReport rep = stability_report(kBaseline);
    const json j = stability_report_to_json(rep);
    const ModelParams back = j.at("params").get<ModelParams>();
    CHECK(back.alpha == kBaseline.alpha);
    CHECK(j.at("origin").at("verdict").at("kind") == "Saddle");
    CHECK(j.at("interior").size() == 1);
    CHECK(j.at("interior")[0].at("global_condition").contains("holds"));

    ModelParams frac = kBaseline;
    frac.mu = 0.5;
    const json jf = stability_report_to_json(stability_report(frac));
    CHECK(jf.at("series_supported") == false);
    CHECK(jf.at("series_note") == "unsupported (non-integer mu)");
    CHECK(jf.at("interior")[0].at("global_condition") == "unsupported (non-integer mu)");
    CHECK(jf.at("interior")[0].at("verdict").contains("kind"));
}

TEST_CASE("cli: simulate baseline prints StableFocus and writes csv files") {
    const fs::path dir = fresh_dir("tbdyn_sim_baseline");
    const CommandResult r = run_cli(
        "simulate --mu 0 --alpha 1.9 --lambda 0.057 --beta 1.3 --gamma 0.5 "
        "--x0 0.9 --y0 0.5 --out " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("regime: StableFocus") != std::string::npos);
    CHECK(r.output.find("E0 = (0, 0)  Saddle") != std::string::npos);
    const std::string ts = slurp(dir / "timeseries.csv");
    CHECK(ts.rfind("t,x,y\n", 0) == 0);
    const std::string orbit = slurp(dir / "orbit.csv");
    CHECK(orbit.rfind("x,y\n", 0) == 0);
}

TEST_CASE("cli: validation failures exit 2") {
    CHECK(run_cli("simulate --gamma -1").exit_code == 2);
    CHECK(run_cli("stability --lambda 0").exit_code == 2);
    CHECK(run_cli("roots --q-max 0").exit_code == 2);
    CHECK(run_cli("simulate --method nonsense").exit_code == 2);
    CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("cli: bpes method surfaces ArgumentDomainError with exit 3") {
    const fs::path dir = fresh_dir("tbdyn_sim_domain");
    const CommandResult r = run_cli(
        "simulate --mu 0.5 --alpha 0.05 --lambda 0.057 --beta 1.3 --gamma 0.5 "
        "--x0 0.9 --y0 0.5 --t-end 100 --method bpes --out " + dir.string());
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("ArgumentDomainError") != std::string::npos);
    CHECK(fs::exists(dir / "timeseries.csv")); // reference output still written
}

TEST_CASE("cli: bpes on the baseline writes the series and a deviation summary") {
    const fs::path dir = fresh_dir("tbdyn_sim_bpes");
    const CommandResult r = run_cli(
        "simulate --mu 0 --alpha 1.9 --lambda 0.057 --beta 1.3 --gamma 0.5 "
        "--x0 0.9 --y0 0.5 --t-end 50 --method bpes --n0 10 --out " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("bpes max-abs deviation") != std::string::npos);
    CHECK(fs::exists(dir / "bpes_timeseries.csv"));
    const json sol = json::parse(slurp(dir / "bpes_solution.json"));
    CHECK(sol.at("config").at("n0") == 10);
    CHECK(sol.at("params").get<ModelParams>().alpha == 1.9);
}

TEST_CASE("cli: stability report is valid json with the mu=0.5 refusal path") {
    const CommandResult r = run_cli("stability --mu 0.5 --alpha 1.9 --lambda 0.057 "
                                    "--beta 1.3 --gamma 0.5");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.output);
    CHECK(j.at("series_supported") == false);
    CHECK(j.at("params").at("mu") == 0.5);
}

TEST_CASE("cli: baseline stability report carries the expected verdicts and x*") {
    const CommandResult r = run_cli("stability --mu 0 --alpha 1.9 --lambda 0.057 "
                                    "--beta 1.3 --gamma 0.5");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.output);
    CHECK(j.at("origin").at("verdict").at("kind") == "Saddle");
    CHECK(j.at("phyto_only").at("verdict").at("kind") == "Saddle");
    REQUIRE(j.at("interior").size() == 1);
    CHECK_THAT(j.at("interior")[0].at("x").get<double>(),
               Catch::Matchers::WithinAbs(0.0450625, 1e-6));
    CHECK(j.at("interior")[0].at("verdict").at("kind") == "StableFocus");
    CHECK(j.at("interior")[0].at("global_condition").at("worst_margin").is_number());
}

TEST_CASE("cli: roots emits csv with 15 significant digits and q_max rows") {
    const CommandResult r = run_cli("roots --q-max 3");
    CHECK(r.exit_code == 0);
    CHECK(r.output.rfind("q,v_q\n", 0) == 0);
    const size_t row1 = r.output.find("1,1.1892071150027");
    REQUIRE(row1 != std::string::npos);
    CHECK_THAT(std::stod(r.output.substr(row1 + 2)),
               Catch::Matchers::WithinAbs(std::pow(2.0, 0.25), 1e-12));
    CHECK(r.output.find("\n3,") != std::string::npos);
}

TEST_CASE("cli: single-point sweep produces one row; config json accepted") {
    const fs::path dir = fresh_dir("tbdyn_sweep");
    const CommandResult r = run_cli(
        "sweep --mu 0 --alpha 1.9 --lambda 0.057 --beta 1.3 --gamma 0.5 "
        "--x0 0.9 --y0 0.5 --t-end 200 --vary gamma --from 2.0 --to 2.0 --points 1 "
        "--out " + dir.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("parameter,value,label,final_x,final_y,evidence_json\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("Extinction") != std::string::npos);
    CHECK(r.output.find("Extinction: 2 .. 2  (1 points)") != std::string::npos);

    SweepSpec spec;
    spec.base = kBaseline;
    spec.initial = {0.9, 0.5};
    spec.varying = VaryingParam::Gamma;
    spec.grid = {2.0};
    spec.t_end = 200.0;
    const json cfgj = {{"sweep", json(spec)}};
    const fs::path cfg_path = dir / "config.json";
    io::write_file(cfg_path.string(), cfgj.dump(2));
    const CommandResult r2 =
        run_cli("sweep --config " + cfg_path.string() + " --out " + dir.string() +
                " --outfile sweep2.csv");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "sweep2.csv") == csv);
}

TEST_CASE("cli: identical invocations yield byte-identical files") {
    const fs::path d1 = fresh_dir("tbdyn_det1");
    const fs::path d2 = fresh_dir("tbdyn_det2");
    const std::string flags =
        "simulate --mu 0 --alpha 1.9 --lambda 0.057 --beta 1.3 --gamma 0.5 "
        "--x0 0.9 --y0 0.5 --t-end 100 --out ";
    CHECK(run_cli(flags + d1.string()).exit_code == 0);
    CHECK(run_cli(flags + d2.string()).exit_code == 0);
    CHECK(slurp(d1 / "timeseries.csv") == slurp(d2 / "timeseries.csv"));
    CHECK(slurp(d1 / "orbit.csv") == slurp(d2 / "orbit.csv"));
}
