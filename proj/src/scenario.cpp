#include "bbcu/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bbcu/report.hpp"

namespace bbcu {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": bad number '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(parse_number(item, line));
    }
    if (out.empty())
        throw ConfigError("config line " + std::to_string(line) + ": empty list");
    return out;
}

}  // namespace

ScenarioSpec parse_config_text(const std::string& text, const std::string& origin) {
    ScenarioSpec spec;
    spec.name = origin;
    spec.load.segments.clear();
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    bool x0_any = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("config line " + std::to_string(line) + ": unterminated section");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        auto num = [&] { return parse_number(val, line); };

        if (section == "plant") {
            if (key == "E_H") spec.plant.E_H = num();
            else if (key == "R_H") spec.plant.R_H = num();
            else if (key == "L") spec.plant.L = num();
            else if (key == "C_H") spec.plant.C_H = num();
            else if (key == "E_L") spec.plant.E_L = num();
            else if (key == "R_L") spec.plant.R_L = num();
            else if (key == "C_L") spec.plant.C_L = num();
            else throw ConfigError("config line " + std::to_string(line) + ": unknown plant key '" + key + "'");
        } else if (section == "statebox") {
            if (key == "x1_min") spec.box.x1_min = num();
            else if (key == "x1_max") spec.box.x1_max = num();
            else if (key == "x2_min") spec.box.x2_min = num();
            else if (key == "x2_max") spec.box.x2_max = num();
            else if (key == "x3_min") spec.box.x3_min = num();
            else if (key == "x3_max") spec.box.x3_max = num();
            else throw ConfigError("config line " + std::to_string(line) + ": unknown statebox key '" + key + "'");
        } else if (section == "controller") {
            if (key == "gamma1") spec.gamma1 = num();
            else if (key == "gamma2") spec.gamma2 = num();
            else if (key == "x1_ref") spec.x1_ref = num();
            else if (key == "K_max") spec.k_max = num();
            else if (key == "k0_policy") {
                if (val == "manifold") spec.k0_policy = InitialGainPolicy::Manifold;
                else if (val == "zero") spec.k0_policy = InitialGainPolicy::Zero;
                else if (val == "value") spec.k0_policy = InitialGainPolicy::Value;
                else throw ConfigError("config line " + std::to_string(line) + ": k0_policy must be manifold|zero|value");
            } else if (key == "k0") spec.k0_value = num();
            else throw ConfigError("config line " + std::to_string(line) + ": unknown controller key '" + key + "'");
        } else if (section == "supervisor") {
            if (key == "I_OL") spec.supervisor.I_OL_nominal = num();
            else if (key == "eta") spec.supervisor.eta = num();
            else if (key == "ramp_step") spec.supervisor.ramp_step = num();
            else if (key == "ramp_dwell") spec.supervisor.ramp_dwell = num();
            else if (key == "iol_ladder") spec.supervisor.iol_ladder = parse_list(val, line);
            else if (key == "rd_ladder") spec.supervisor.rd_ladder = parse_list(val, line);
            else if (key == "ig_filter_tau") spec.supervisor.ig_filter_tau = num();
            else if (key == "return_confirm") spec.supervisor.return_confirm = num();
            else if (key == "gate_policy") {
                if (val == "known_load") spec.supervisor.gate_policy = GatePolicy::KnownLoad;
                else if (val == "worst_case") spec.supervisor.gate_policy = GatePolicy::WorstCase;
                else throw ConfigError("config line " + std::to_string(line) + ": gate_policy must be known_load|worst_case");
            } else throw ConfigError("config line " + std::to_string(line) + ": unknown supervisor key '" + key + "'");
        } else if (section == "load") {
            if (key != "segment")
                throw ConfigError("config line " + std::to_string(line) + ": load section takes segment lines");
            const auto v = parse_list(val, line);
            if (v.size() != 3)
                throw ConfigError("config line " + std::to_string(line) + ": segment = t_start, t_end, R_D");
            spec.load.segments.push_back({v[0], v[1], v[2]});
        } else if (section == "sim") {
            if (key == "dt_plant") spec.sim.dt_plant = num();
            else if (key == "dt_control") spec.sim.dt_control = num();
            else if (key == "t_end") spec.sim.t_end = num();
            else if (key == "record_stride") spec.sim.record_stride = static_cast<int>(num());
            else throw ConfigError("config line " + std::to_string(line) + ": unknown sim key '" + key + "'");
        } else if (section == "initial") {
            if (key == "x1") { spec.x0.x1 = num(); x0_any = true; }
            else if (key == "x2") { spec.x0.x2 = num(); x0_any = true; }
            else if (key == "x3") { spec.x0.x3 = num(); x0_any = true; }
            else throw ConfigError("config line " + std::to_string(line) + ": unknown initial key '" + key + "'");
        } else if (section == "roa") {
            if (key == "seed") spec.roa.seed = static_cast<std::uint64_t>(num());
            else if (key == "grid_res") spec.roa.grid_res = static_cast<int>(num());
            else if (key == "n_random") spec.roa.n_random = static_cast<int>(num());
            else if (key == "levels") spec.roa.levels = static_cast<int>(num());
            else throw ConfigError("config line " + std::to_string(line) + ": unknown roa key '" + key + "'");
        } else if (section == "output") {
            if (key == "dir") spec.out_dir = val;
            else throw ConfigError("config line " + std::to_string(line) + ": unknown output key '" + key + "'");
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown section '" + section + "'");
        }
    }
    spec.x0_set = x0_any;
    validate(spec.box);
    validate(spec.sim);
    spec.load.validate_cover(spec.sim.t_end);
    for (const auto& seg : spec.load.segments) {
        PlantParams p = spec.plant;
        p.R_D = seg.r_d;
        validate(p);  // voltage margin must hold on every segment
    }
    return spec;
}

ScenarioSpec load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), std::filesystem::path(path).stem().string());
}

std::string write_config(const ScenarioSpec& spec) {
    std::ostringstream o;
    auto d = [](double v) { return format_double(v); };
    o << "[plant]\n";
    o << "E_H = " << d(spec.plant.E_H) << "\nR_H = " << d(spec.plant.R_H)
      << "\nL = " << d(spec.plant.L) << "\nC_H = " << d(spec.plant.C_H)
      << "\nE_L = " << d(spec.plant.E_L) << "\nR_L = " << d(spec.plant.R_L)
      << "\nC_L = " << d(spec.plant.C_L) << "\n\n";
    o << "[statebox]\nx1_min = " << d(spec.box.x1_min) << "\nx1_max = " << d(spec.box.x1_max)
      << "\nx2_min = " << d(spec.box.x2_min) << "\nx2_max = " << d(spec.box.x2_max)
      << "\nx3_min = " << d(spec.box.x3_min) << "\nx3_max = " << d(spec.box.x3_max) << "\n\n";
    o << "[controller]\ngamma1 = " << d(spec.gamma1) << "\ngamma2 = " << d(spec.gamma2)
      << "\nx1_ref = " << d(spec.x1_ref) << "\nK_max = " << d(spec.k_max) << "\nk0_policy = "
      << (spec.k0_policy == InitialGainPolicy::Manifold
              ? "manifold"
              : spec.k0_policy == InitialGainPolicy::Zero ? "zero" : "value");
    if (spec.k0_policy == InitialGainPolicy::Value)
        o << "\nk0 = " << d(spec.k0_value);
    o << "\n\n[supervisor]\nI_OL = " << d(spec.supervisor.I_OL_nominal)
      << "\neta = " << d(spec.supervisor.eta) << "\nramp_step = " << d(spec.supervisor.ramp_step)
      << "\nramp_dwell = " << d(spec.supervisor.ramp_dwell) << "\niol_ladder = ";
    for (std::size_t i = 0; i < spec.supervisor.iol_ladder.size(); ++i)
        o << (i ? ", " : "") << d(spec.supervisor.iol_ladder[i]);
    o << "\nrd_ladder = ";
    for (std::size_t i = 0; i < spec.supervisor.rd_ladder.size(); ++i)
        o << (i ? ", " : "") << d(spec.supervisor.rd_ladder[i]);
    o << "\ngate_policy = "
      << (spec.supervisor.gate_policy == GatePolicy::KnownLoad ? "known_load" : "worst_case")
      << "\nig_filter_tau = " << d(spec.supervisor.ig_filter_tau)
      << "\nreturn_confirm = " << d(spec.supervisor.return_confirm) << "\n\n[load]\n";
    for (const auto& s : spec.load.segments)
        o << "segment = " << d(s.t_start) << ", " << d(s.t_end) << ", " << d(s.r_d) << "\n";
    o << "\n[sim]\ndt_plant = " << d(spec.sim.dt_plant)
      << "\ndt_control = " << d(spec.sim.dt_control) << "\nt_end = " << d(spec.sim.t_end)
      << "\nrecord_stride = " << spec.sim.record_stride << "\n";
    if (spec.x0_set)
        o << "\n[initial]\nx1 = " << d(spec.x0.x1) << "\nx2 = " << d(spec.x0.x2)
          << "\nx3 = " << d(spec.x0.x3) << "\n";
    o << "\n[roa]\nseed = " << spec.roa.seed << "\ngrid_res = " << spec.roa.grid_res
      << "\nn_random = " << spec.roa.n_random << "\nlevels = " << spec.roa.levels << "\n";
    o << "\n[output]\ndir = " << spec.out_dir << "\n";
    return o.str();
}

ScenarioSpec builtin_scenario(const std::string& name) {
    ScenarioSpec spec;
    spec.name = name;
    if (name == "scenario1") {
        // stepwise load sweep 300 -> 15 ohm, 3 s per segment
        const std::vector<double> loads = {300, 230, 160, 90, 20, 19, 18, 17, 16.5, 16, 15.5, 15};
        double t = 0.0;
        for (double rd : loads) {
            spec.load.segments.push_back({t, t + 3.0, rd});
            t += 3.0;
        }
        spec.sim.t_end = t;
        spec.supervisor.gate_policy = GatePolicy::KnownLoad;
        spec.out_dir = "out/scenario1";
    } else if (name == "scenario2") {
        spec.load.segments = {{0, 5, 300}, {5, 10, 200}, {10, 15, 17}, {15, 20, 15}, {20, 25, 300}};
        spec.sim.t_end = 25.0;
        spec.supervisor.gate_policy = GatePolicy::WorstCase;
        spec.out_dir = "out/scenario2";
    } else {
        throw ConfigError("unknown builtin scenario: " + name);
    }
    return spec;
}

bool is_builtin(const std::string& name) {
    return name == "scenario1" || name == "scenario2";
}

ScenarioSpec resolve_spec(const std::string& arg) {
    return is_builtin(arg) ? builtin_scenario(arg) : load_config(arg);
}

PlantState default_initial_state(const ScenarioSpec& spec) {
    if (spec.x0_set)
        return spec.x0;
    // converter idle: no inductor current, HV node loaded by R_D only,
    // battery voltage on the LV capacitor
    PlantParams p = spec.plant;
    p.R_D = spec.load.segments.front().r_d;
    const DerivedParams d = derive(p);
    return {0.0, d.R_DH / p.R_H * p.E_H, p.E_L};
}

double initial_gain_for(const ScenarioSpec& spec, const PlantState& x0) {
    switch (spec.k0_policy) {
    case InitialGainPolicy::Manifold:
        return initial_gain(x0);
    case InitialGainPolicy::Zero:
        return 0.0;
    case InitialGainPolicy::Value:
        return spec.k0_value;
    }
    return 0.0;
}

CachingRoaProvider::CachingRoaProvider(const ScenarioSpec& spec) : spec_(spec) {}

const RoaEstimate* CachingRoaProvider::get(double rd, double iol) {
    const std::pair<long, long> key{std::lround(rd * 1000.0), std::lround(iol * 1000.0)};
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        PlantParams p = spec_.plant;
        p.R_D = rd;
        CertificationParams cp = spec_.roa;
        cp.seed = spec_.roa.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(
                                        key.first * 131071 + key.second));
        it = cache_.emplace(key, roa_estimate(p, iol, spec_.gamma2, spec_.box, spec_.k_max, cp))
                 .first;
    }
    return it->second.certified() ? &it->second : nullptr;
}

SimResult simulate(const ScenarioSpec& spec, CachingRoaProvider& roas) {
    PlantParams base = spec.plant;
    base.R_D = spec.load.segments.front().r_d;
    validate(base);
    SupervisorConfig sc = spec.supervisor;
    sc.mode1_x1_ref = spec.x1_ref;
    sc.gamma1 = spec.gamma1;
    sc.gamma2 = spec.gamma2;
    Supervisor sup(sc, base, &roas);
    const PlantState x0 = default_initial_state(spec);
    ControllerState cs;
    cs.k = initial_gain_for(spec, x0);
    cs.k_max = spec.k_max;
    return run_closed_loop(base, spec.load, cs, sup, spec.sim, x0);
}

namespace {

void write_trace_csv(const std::string& path, const SimTrace& trace) {
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path);
    f << "t,x1,x2,x3,u,sigma,k,Ig,mode,IOL\n";
    char buf[320];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%d,%.10g,%.10g,%.10g,%d,%.10g\n",
                      r.t, r.x1, r.x2, r.x3, r.u, r.sigma, r.k, r.I_g, r.mode, r.I_OL_active);
        f << buf;
    }
}

void write_modes_csv(const std::string& path, const std::vector<ModeEvent>& ev) {
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path);
    f << "t,from_mode,to_mode,reason,I_OL_active,gate_verdict\n";
    char buf[256];
    for (const auto& e : ev) {
        std::snprintf(buf, sizeof buf, "%.10g,%d,%d,%s,%.10g,%d\n", e.t, e.from_mode,
                      e.to_mode, e.reason.c_str(), e.I_OL_active, e.gate_contains ? 1 : 0);
        f << buf;
    }
}

}  // namespace

ScenarioArtifacts run_scenario(const ScenarioSpec& spec) {
    std::filesystem::create_directories(spec.out_dir);
    CachingRoaProvider roas(spec);
    ScenarioArtifacts art;
    art.result = simulate(spec, roas);
    art.trace_path = spec.out_dir + "/trace.csv";
    art.modes_path = spec.out_dir + "/modes.csv";
    art.report_path = spec.out_dir + "/analysis.txt";
    write_trace_csv(art.trace_path, art.result.trace);
    write_modes_csv(art.modes_path, art.result.mode_events);
    write_text_file(art.report_path, analysis_report(spec));
    if (spec.supervisor.gate_policy == GatePolicy::KnownLoad)
        for (const auto& e : art.result.mode_events)
            if (e.to_mode == 2 && e.from_mode == 1 && !e.gate_contains)
                throw AssertionBreach("mode-2 activation outside the certified region at t=" +
                                      std::to_string(e.t));
    return art;
}

}  // namespace bbcu
