#pragma once

// File formats: trajectory CSV `t,x,y` (12 significant digits), sweep CSV
// `parameter,value,label,final_x,final_y,evidence_json`, roots CSV `q,v_q`
// (15 significant digits), and the JSON config/report schema. All output is
// UTF-8 with LF line endings.

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tbdyn/bpes.hpp"
#include "tbdyn/dynamics.hpp"
#include "tbdyn/stability.hpp"

namespace tbdyn {

namespace io {

inline std::string format_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// RFC 4180 quoting for fields that may contain commas or quotes.
inline std::string csv_quote(const std::string& field) {
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace io

using nlohmann::json;

inline void to_json(json& j, const ModelParams& p) {
    j = json{{"alpha", p.alpha}, {"lambda", p.lambda}, {"beta", p.beta},
             {"gamma", p.gamma}, {"mu", p.mu}};
}

inline void from_json(const json& j, ModelParams& p) {
    j.at("alpha").get_to(p.alpha);
    j.at("lambda").get_to(p.lambda);
    j.at("beta").get_to(p.beta);
    j.at("gamma").get_to(p.gamma);
    p.mu = j.value("mu", 0.0);
}

inline void to_json(json& j, const State& s) { j = json{{"x", s.x}, {"y", s.y}}; }

inline void from_json(const json& j, State& s) {
    j.at("x").get_to(s.x);
    j.at("y").get_to(s.y);
}

inline void to_json(json& j, const BpesConfig& c) {
    j = json{{"n0", c.n0},
             {"t_m", c.t_m},
             {"x0", c.x0},
             {"y0", c.y0},
             {"quadrature_nodes", c.quadrature_nodes},
             {"max_iterations", c.max_iterations},
             {"step_tolerance", c.step_tolerance},
             {"residual_tolerance", c.residual_tolerance},
             {"consistent_scaling", c.consistent_scaling}};
}

inline void from_json(const json& j, BpesConfig& c) {
    c.n0 = j.value("n0", 20);
    c.t_m = j.value("t_m", 0.0);
    c.x0 = j.value("x0", 0.0);
    c.y0 = j.value("y0", 0.0);
    c.quadrature_nodes = j.value("quadrature_nodes", 257);
    c.max_iterations = j.value("max_iterations", 200);
    c.step_tolerance = j.value("step_tolerance", 1e-10);
    c.residual_tolerance = j.value("residual_tolerance", 1e-14);
    c.consistent_scaling = j.value("consistent_scaling", false);
}

inline void to_json(json& j, const SweepSpec& s) {
    j = json{{"base", s.base},
             {"initial", s.initial},
             {"varying", to_string(s.varying)},
             {"grid", s.grid},
             {"t_end", s.t_end},
             {"rel_tol", s.rel_tol},
             {"abs_tol", s.abs_tol}};
}

inline void from_json(const json& j, SweepSpec& s) {
    j.at("base").get_to(s.base);
    j.at("initial").get_to(s.initial);
    s.varying = varying_from_string(j.at("varying").get<std::string>());
    j.at("grid").get_to(s.grid);
    s.t_end = j.value("t_end", 500.0);
    s.rel_tol = j.value("rel_tol", 1e-9);
    s.abs_tol = j.value("abs_tol", 1e-12);
}

inline json evidence_to_json(const RegimeEvidence& ev) {
    json peaks = json::array();
    for (const auto& pk : ev.peaks) peaks.push_back({{"t", pk.time}, {"x", pk.value}});
    json j{{"min_x", ev.min_x},
           {"min_y", ev.min_y},
           {"amplitude_final_quarter", ev.amplitude_final_quarter},
           {"amplitude_trend", ev.amplitude_trend},
           {"peaks", peaks}};
    if (std::isfinite(ev.final_distance)) j["final_distance"] = ev.final_distance;
    return j;
}

inline json local_verdict_to_json(const LocalVerdict& v) {
    return json{{"kind", to_string(v.kind)},
                {"trace", v.trace},
                {"determinant", v.determinant},
                {"eigenvalues",
                 {{{"re", v.eig1.real()}, {"im", v.eig1.imag()}},
                  {{"re", v.eig2.real()}, {"im", v.eig2.imag()}}}}};
}

inline json inequality_to_json(const InequalityReport& r) {
    json j{{"verdict", to_string(r.verdict)}, {"agrees_with_numeric", r.agrees_with_numeric},
           {"lhs", r.lhs}};
    if (std::isfinite(r.rhs)) j["rhs"] = r.rhs;
    return j;
}

inline json stability_report_to_json(const StabilityReport& rep) {
    json j;
    j["params"] = rep.params;
    j["origin"] = {{"kind", "Origin"},
                   {"verdict", local_verdict_to_json(rep.origin.local)},
                   {"unstable_direction", "x-axis"},
                   {"stable_direction", "y-axis"}};
    j["phyto_only"] = {{"kind", "PhytoOnly"},
                       {"verdict", local_verdict_to_json(rep.phyto_only.numeric)},
                       {"printed_inequality", inequality_to_json(rep.phyto_only.printed)}};
    j["series_supported"] = rep.series_supported;
    if (!rep.series_supported)
        j["series_note"] = "unsupported (non-integer mu)";
    json interiors = json::array();
    for (size_t i = 0; i < rep.interior.size(); ++i) {
        json e{{"kind", "Interior"},
               {"x", rep.interior[i].state.x},
               {"y", rep.interior[i].state.y},
               {"verdict", local_verdict_to_json(rep.interior_classification[i].numeric)},
               {"printed_inequality",
                inequality_to_json(rep.interior_classification[i].printed)}};
        if (rep.series_supported) {
            const GlobalReport& g = rep.global[i];
            e["global_condition"] = {{"holds", g.holds},
                                     {"worst_margin", g.worst_margin},
                                     {"worst_x", g.worst_x},
                                     {"samples", g.samples},
                                     {"domain", {g.domain.lo, g.domain.hi}},
                                     {"c1", g.c1},
                                     {"c2", g.c2}};
        } else {
            e["global_condition"] = "unsupported (non-integer mu)";
        }
        interiors.push_back(std::move(e));
    }
    j["interior"] = interiors;
    return j;
}

inline json solution_to_json(const BpesSolution& sol) {
    return json{{"params", sol.params},
                {"config", sol.config},
                {"t_m", sol.t_m},
                {"roots", sol.roots},
                {"xi", sol.coeffs.xi},
                {"xi_prime", sol.coeffs.xi_prime},
                {"objective_value", sol.objective_value},
                {"diagnostics",
                 {{"iterations", sol.diagnostics.iterations},
                  {"converged", sol.diagnostics.converged},
                  {"stop_reason", sol.diagnostics.stop_reason},
                  {"lambda", sol.diagnostics.lambda_value},
                  {"lambda_prime", sol.diagnostics.lambda_prime_value},
                  {"lambda_other_convention", sol.diagnostics.lambda_other_convention},
                  {"objective_history", sol.diagnostics.objective_history}}}};
}

namespace io {

inline std::string timeseries_csv(const PhasePortraitData& data) {
    std::string out = "t,x,y\n";
    for (size_t i = 0; i < data.t.size(); ++i) {
        out += format_sig(data.t[i], 12);
        out += ',';
        out += format_sig(data.series[i].x, 12);
        out += ',';
        out += format_sig(data.series[i].y, 12);
        out += '\n';
    }
    return out;
}

inline std::string orbit_csv(const PhasePortraitData& data) {
    std::string out = "x,y\n";
    for (const State& s : data.series) {
        out += format_sig(s.x, 12);
        out += ',';
        out += format_sig(s.y, 12);
        out += '\n';
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::string out = "parameter,value,label,final_x,final_y,evidence_json\n";
    const char* name = to_string(result.spec.varying);
    for (const SweepRow& row : result.rows) {
        out += name;
        out += ',';
        out += format_sig(row.value, 12);
        out += ',';
        out += row.label;
        out += ',';
        out += format_sig(row.final_state.x, 12);
        out += ',';
        out += format_sig(row.final_state.y, 12);
        out += ',';
        out += csv_quote(evidence_to_json(row.evidence).dump());
        out += '\n';
    }
    return out;
}

inline std::string roots_csv(const RootTable& table) {
    std::string out = "q,v_q\n";
    for (const auto& [q, v] : table.entries()) {
        out += std::to_string(q);
        out += ',';
        out += format_sig(v, 15);
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
}

} // namespace io

} // namespace tbdyn
