#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decoyq/adversary_sim.hpp"
#include "decoyq/decoy_bounds.hpp"
#include "decoyq/source_model.hpp"

namespace decoyq {

enum class Mode { Bound, KeyRate, Sweep, Simulate, AppendixDemo };
enum class OutputFormat { Human, Csv, Jsonl };

Mode parse_mode(const std::string& s);             // throws config_error
OutputFormat parse_format(const std::string& s);   // throws config_error
const char* to_string(Mode m);
const char* to_string(OutputFormat f);

// Coherent-source description: intended intensities plus a relative error
// bound, and an upper bound on the vacuum-source intensity.
struct CoherentSpec {
    double mu_decoy = 0.0;
    double mu_signal = 0.0;
    double delta_m = 0.0;
    double mu_vacuum_max = 0.0;

    SourceBounds to_bounds() const;
};

struct AppendixParams {
    double lambda_d = 0.01;
    double lambda_s = 0.05;
    int m_photons = 10;
    double eps = 0.01;
    double eta_ratio = 5.0;
};

// Parsed and validated run configuration. Exactly one of {coherent spec,
// explicit bounds} describes the sources, and exactly one of {counts, rates,
// tally file} supplies the tallies, for the modes that need them.
struct RunConfig {
    Mode mode = Mode::Bound;
    std::optional<CoherentSpec> coherent;
    std::optional<SourceBounds> explicit_bounds;
    std::optional<ObservedTallies> tallies;
    std::string tallies_file; // analysis input: tally CSV path
    double sigma_mult = 10.0;
    int grid_n = 1001;
    OutputFormat format = OutputFormat::Human;
    std::uint64_t seed = 1;
    bool halved_ns = false;
    std::vector<double> delta_m_list; // sweep columns
    std::vector<double> vacuum_caps;  // sweep rows
    // simulate-mode extras
    std::uint64_t sim_pulses = 0;
    std::uint64_t block_len = 0;
    double sim_p0 = 0.0, sim_p = 0.0, sim_pp = 0.0;
    double mu_vacuum = 0.0;
    double eta_strong = 0.0;
    double eta_weak = 0.0;
    double dark_rate = 0.0;
    std::string tallies_out = "tallies.csv";
    AppendixParams appendix;

    SourceBounds resolve_bounds() const;       // throws config_error if absent
    ObservedTallies resolve_tallies() const;   // reads tallies_file if needed
    SimScenario resolve_scenario() const;      // throws config_error if incomplete
};

// Plain key = value text, '#' comments, comma-separated lists. Percent signs
// are rejected everywhere: all fractions are plain decimals. Every error
// names the offending key.
RunConfig parse_config(const std::string& path);

// Tally CSV: header "source,count", one row per source, then meta_* rows for
// the pulse total and the selection probabilities.
void write_tally_csv(const std::string& path, const ObservedTallies& tallies);
ObservedTallies read_tally_csv(const std::string& path);

} // namespace decoyq
