#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "bbcu/roa.hpp"
#include "bbcu/sim.hpp"
#include "bbcu/supervisor.hpp"

namespace bbcu {

enum class InitialGainPolicy { Manifold, Zero, Value };

struct ScenarioSpec {
    std::string name = "custom";
    PlantParams plant;                 // R_D field unused; the profile drives it
    StateBox box;
    double gamma1 = 4.0;
    double gamma2 = 4.0;
    double x1_ref = 10.0;
    double k_max = 0.25;
    InitialGainPolicy k0_policy = InitialGainPolicy::Manifold;
    double k0_value = 0.0;
    SupervisorConfig supervisor;
    LoadProfile load;
    SimConfig sim;
    PlantState x0;
    bool x0_set = false;               // default: converter-idle state of the first segment
    CertificationParams roa;
    std::string out_dir = "out";
};

// key = value within [section] blocks; '#' comments; repeated `segment`
// lines build the load profile. Throws ConfigError with a line diagnostic.
ScenarioSpec parse_config_text(const std::string& text, const std::string& origin);
ScenarioSpec load_config(const std::string& path);
std::string write_config(const ScenarioSpec& spec);

// Built-in studies: `scenario1` sweeps the load 300->15 ohm in 3 s segments
// with known-load gating; `scenario2` runs the abrupt unknown-load profile
// with worst-case gating.
ScenarioSpec builtin_scenario(const std::string& name);
bool is_builtin(const std::string& name);

// Resolves a CLI argument: builtin name or config path.
ScenarioSpec resolve_spec(const std::string& arg);

PlantState default_initial_state(const ScenarioSpec& spec);
double initial_gain_for(const ScenarioSpec& spec, const PlantState& x0);

// Lazily computes and caches certified estimates per (R_D, I_OL).
class CachingRoaProvider : public RoaProvider {
  public:
    CachingRoaProvider(const ScenarioSpec& spec);
    const RoaEstimate* get(double rd, double iol) override;
    const std::map<std::pair<long, long>, RoaEstimate>& table() const { return cache_; }

  private:
    ScenarioSpec spec_;
    std::map<std::pair<long, long>, RoaEstimate> cache_;
};

struct ScenarioArtifacts {
    SimResult result;
    std::string trace_path;
    std::string modes_path;
    std::string report_path;
};

class AssertionBreach : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Runs the closed loop and writes trace.csv, modes.csv and analysis.txt into
// spec.out_dir. Throws AssertionBreach when a known-load Mode-2 activation
// happens outside its certified region.
ScenarioArtifacts run_scenario(const ScenarioSpec& spec);

// In-memory run without artifacts (shared by tests and the runner).
SimResult simulate(const ScenarioSpec& spec, CachingRoaProvider& roas);

}  // namespace bbcu
