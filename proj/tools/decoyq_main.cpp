// decoyq: certified single-photon fraction bounds and key rates for
// 3-intensity decoy-state QKD with source errors, plus the adversarial
// pulse-level simulator that cross-checks them.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "decoyq/adversary_sim.hpp"
#include "decoyq/config.hpp"
#include "decoyq/decoy_bounds.hpp"
#include "decoyq/errors.hpp"
#include "decoyq/key_rate.hpp"
#include "decoyq/source_model.hpp"

namespace {

using nlohmann::json;

// Fixed-precision number rendering so identical runs emit identical bytes.
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void print_condition_report(const decoyq::ConditionReport& report) {
    std::cout << "conditions: vacuum-ratio " << decoyq::to_string(report.vacuum_ratio)
              << ", signal-decoy-ratio " << decoyq::to_string(report.signal_decoy_ratio)
              << "\n";
    if (!report.ok()) std::cout << "  " << report.diagnostic << "\n";
}

int run_bound(const decoyq::RunConfig& cfg) {
    const decoyq::SourceBounds bounds = cfg.resolve_bounds();
    const decoyq::ObservedTallies tallies = cfg.resolve_tallies();
    const decoyq::ConditionReport report = decoyq::validate_conditions(bounds);
    if (cfg.format == decoyq::OutputFormat::Human) print_condition_report(report);
    if (!report.ok()) throw decoyq::condition_error(report.diagnostic);

    const decoyq::ExpectationIntervals ivs =
        decoyq::expectation_intervals(tallies, bounds, cfg.sigma_mult);
    const decoyq::FractionBound at_lo =
        decoyq::delta1_nonasymptotic(tallies, bounds, cfg.sigma_mult, ivs.d0.lo);
    const decoyq::FractionBound at_hi =
        decoyq::delta1_nonasymptotic(tallies, bounds, cfg.sigma_mult, ivs.d0.hi);
    const decoyq::FractionBound& worst =
        at_lo.delta1_signal_lo <= at_hi.delta1_signal_lo ? at_lo : at_hi;

    switch (cfg.format) {
        case decoyq::OutputFormat::Human:
            std::cout << "d0 interval: [" << num(ivs.d0.lo) << ", " << num(ivs.d0.hi) << "]\n"
                      << "delta1_signal >= " << num(worst.delta1_signal_lo)
                      << "   (worst case at d0 = " << num(worst.d0_used) << ")\n"
                      << "delta1_decoy  >= " << num(worst.delta1_decoy_lo) << "\n"
                      << "n1s_observed  >= " << num(worst.n1s_obs_lo) << "\n";
            break;
        case decoyq::OutputFormat::Csv:
            std::cout << "d0_lo,d0_hi,d0_worst,delta1_signal_lo,delta1_decoy_lo,n1s_obs_lo\n"
                      << num(ivs.d0.lo) << ',' << num(ivs.d0.hi) << ','
                      << num(worst.d0_used) << ',' << num(worst.delta1_signal_lo) << ','
                      << num(worst.delta1_decoy_lo) << ',' << num(worst.n1s_obs_lo) << "\n";
            break;
        case decoyq::OutputFormat::Jsonl: {
            json j{{"record", "bound"},
                   {"d0_lo", ivs.d0.lo},
                   {"d0_hi", ivs.d0.hi},
                   {"d0_worst", worst.d0_used},
                   {"delta1_signal_lo", worst.delta1_signal_lo},
                   {"delta1_decoy_lo", worst.delta1_decoy_lo},
                   {"n1s_obs_lo", worst.n1s_obs_lo}};
            std::cout << j.dump() << "\n";
            break;
        }
    }
    return 0;
}

void print_rate_report(const decoyq::RateReport& r, decoyq::OutputFormat format) {
    switch (format) {
        case decoyq::OutputFormat::Human:
            std::cout << "rate (final bits per signal pulse): " << num(r.rate) << "\n"
                      << "rate per signal count: " << num(r.rate_per_count) << "\n"
                      << "worst-case d0: " << num(r.d0_worst) << "\n"
                      << "delta1 = " << num(r.delta1_used) << ", t1 = " << num(r.t1_used)
                      << ", t = " << num(r.t_used) << "\n"
                      << "grid points evaluated: " << r.grid_points << "\n";
            break;
        case decoyq::OutputFormat::Csv:
            std::cout << "rate,rate_per_count,d0_worst,delta1,t1,t,grid_points\n"
                      << num(r.rate) << ',' << num(r.rate_per_count) << ','
                      << num(r.d0_worst) << ',' << num(r.delta1_used) << ','
                      << num(r.t1_used) << ',' << num(r.t_used) << ',' << r.grid_points
                      << "\n";
            break;
        case decoyq::OutputFormat::Jsonl: {
            json j{{"record", "keyrate"},
                   {"rate", r.rate},
                   {"rate_per_count", r.rate_per_count},
                   {"d0_worst", r.d0_worst},
                   {"delta1", r.delta1_used},
                   {"t1", r.t1_used},
                   {"t", r.t_used},
                   {"grid_points", r.grid_points}};
            std::cout << j.dump() << "\n";
            break;
        }
    }
}

int run_keyrate(const decoyq::RunConfig& cfg) {
    const decoyq::RateReport report =
        decoyq::worst_case_rate(cfg.resolve_tallies(), cfg.resolve_bounds(),
                                cfg.sigma_mult, {cfg.grid_n, cfg.halved_ns});
    print_rate_report(report, cfg.format);
    return 0;
}

int run_sweep(const decoyq::RunConfig& cfg) {
    if (!cfg.coherent) {
        throw decoyq::config_error("sweep mode needs mu_decoy/mu_signal "
                                   "(the columns rebuild coherent bounds per delta_m)");
    }
    std::vector<double> delta_ms = cfg.delta_m_list;
    if (delta_ms.empty()) delta_ms = {cfg.coherent->delta_m};
    std::vector<double> caps = cfg.vacuum_caps;
    if (caps.empty()) caps = {cfg.coherent->mu_vacuum_max};

    const decoyq::SweepTable table = decoyq::sweep_delta_m(
        cfg.resolve_tallies(), cfg.coherent->mu_decoy, cfg.coherent->mu_signal,
        delta_ms, caps, cfg.sigma_mult, {cfg.grid_n, cfg.halved_ns});

    switch (cfg.format) {
        case decoyq::OutputFormat::Human: {
            std::printf("%-6s", "row");
            for (double dm : table.delta_m) std::printf(" %12s", ("dm=" + num(dm)).c_str());
            std::printf("\n");
            for (const auto& row : table.rows) {
                std::printf("%-6s", row.label.c_str());
                for (const auto& cell : row.cells) std::printf(" %12.4e", cell.rate);
                std::printf("\n");
            }
            break;
        }
        case decoyq::OutputFormat::Csv:
            std::cout << "row,delta_m,vacuum_cap,asymptotic,rate,rate_per_count,d0_worst,"
                         "delta1,t1\n";
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.cells.size(); ++i) {
                    const auto& c = row.cells[i];
                    std::cout << row.label << ',' << num(table.delta_m[i]) << ','
                              << num(row.vacuum_cap) << ',' << (row.asymptotic ? 1 : 0) << ','
                              << num(c.rate) << ',' << num(c.rate_per_count) << ','
                              << num(c.d0_worst) << ',' << num(c.delta1_used) << ','
                              << num(c.t1_used) << "\n";
                }
            }
            break;
        case decoyq::OutputFormat::Jsonl:
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.cells.size(); ++i) {
                    const auto& c = row.cells[i];
                    json j{{"record", "sweep-cell"},
                           {"row", row.label},
                           {"delta_m", table.delta_m[i]},
                           {"vacuum_cap", row.vacuum_cap},
                           {"asymptotic", row.asymptotic},
                           {"rate", c.rate},
                           {"rate_per_count", c.rate_per_count},
                           {"d0_worst", c.d0_worst},
                           {"delta1", c.delta1_used},
                           {"t1", c.t1_used}};
                    std::cout << j.dump() << "\n";
                }
            }
            break;
    }
    return 0;
}

int run_simulate(const decoyq::RunConfig& cfg) {
    const decoyq::SimScenario scenario = cfg.resolve_scenario();
    const decoyq::SimOutcome outcome = decoyq::run_simulation(scenario);
    decoyq::write_tally_csv(cfg.tallies_out, outcome.tallies);
    const decoyq::VerificationReport v =
        decoyq::verify_bound(outcome, cfg.resolve_bounds(), cfg.sigma_mult);

    switch (cfg.format) {
        case decoyq::OutputFormat::Human:
            std::cout << "tallies written to " << cfg.tallies_out
                      << " (analyze with tallies_file = " << cfg.tallies_out << ")\n"
                      << "counts: n0 = " << num(outcome.tallies.n0)
                      << ", nd = " << num(outcome.tallies.nd)
                      << ", ns = " << num(outcome.tallies.ns) << "\n"
                      << "verification: " << (v.pass ? "PASS" : "FAIL")
                      << " (bound = " << num(v.bound) << ", truth = " << num(v.truth)
                      << ", margin = " << num(v.margin) << ", d0 = " << num(v.d0_used)
                      << ")\n";
            break;
        case decoyq::OutputFormat::Csv:
            std::cout << "n0,nd,ns,pass,bound,truth,margin,d0_used\n"
                      << num(outcome.tallies.n0) << ',' << num(outcome.tallies.nd) << ','
                      << num(outcome.tallies.ns) << ',' << (v.pass ? 1 : 0) << ','
                      << num(v.bound) << ',' << num(v.truth) << ',' << num(v.margin) << ','
                      << num(v.d0_used) << "\n";
            break;
        case decoyq::OutputFormat::Jsonl: {
            json j{{"record", "simulate"},
                   {"tallies_out", cfg.tallies_out},
                   {"n0", outcome.tallies.n0},
                   {"nd", outcome.tallies.nd},
                   {"ns", outcome.tallies.ns},
                   {"pass", v.pass},
                   {"bound", v.bound},
                   {"truth", v.truth},
                   {"margin", v.margin},
                   {"d0_used", v.d0_used}};
            std::cout << j.dump() << "\n";
            break;
        }
    }
    return 0;
}

int run_appendix(const decoyq::RunConfig& cfg) {
    const decoyq::AppendixParams& a = cfg.appendix;
    const double ratio = decoyq::appendix_yield_ratio(a.lambda_d, a.lambda_s, a.m_photons,
                                                      a.eps, a.eta_ratio);
    switch (cfg.format) {
        case decoyq::OutputFormat::Human:
            std::cout << "block-attack yield ratio for m-photon pulses attenuated to 1\n"
                      << "lambda_d = " << num(a.lambda_d) << ", lambda_s = " << num(a.lambda_s)
                      << ", m = " << a.m_photons << ", eps = " << num(a.eps)
                      << ", eta_ratio = " << num(a.eta_ratio) << "\n"
                      << "Y_d / Y_s = " << num(ratio) << "\n";
            break;
        case decoyq::OutputFormat::Csv:
            std::cout << "lambda_d,lambda_s,m,eps,eta_ratio,ratio\n"
                      << num(a.lambda_d) << ',' << num(a.lambda_s) << ',' << a.m_photons
                      << ',' << num(a.eps) << ',' << num(a.eta_ratio) << ',' << num(ratio)
                      << "\n";
            break;
        case decoyq::OutputFormat::Jsonl: {
            json j{{"record", "appendix-demo"},
                   {"lambda_d", a.lambda_d},
                   {"lambda_s", a.lambda_s},
                   {"m", a.m_photons},
                   {"eps", a.eps},
                   {"eta_ratio", a.eta_ratio},
                   {"ratio", ratio}};
            std::cout << j.dump() << "\n";
            break;
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified decoy-state single-photon bounds, key rates and "
                 "an adversarial channel simulator"};
    std::string config_path;
    std::string mode_override;
    std::string format_override;
    double sigma_override = -1.0;
    int grid_override = 0;
    std::int64_t seed_override = -1;

    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--mode", mode_override,
                   "override mode: bound|keyrate|sweep|simulate|appendix-demo");
    app.add_option("--sigma", sigma_override, "override sigma_mult");
    app.add_option("--grid", grid_override, "override grid_n");
    app.add_option("--seed", seed_override, "override seed");
    app.add_option("--format", format_override, "override format: human|csv|jsonl");

    CLI11_PARSE(app, argc, argv);

    try {
        decoyq::RunConfig cfg = decoyq::parse_config(config_path);
        if (!mode_override.empty()) cfg.mode = decoyq::parse_mode(mode_override);
        if (!format_override.empty()) cfg.format = decoyq::parse_format(format_override);
        if (sigma_override >= 0.0) cfg.sigma_mult = sigma_override;
        if (grid_override > 0) cfg.grid_n = grid_override;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

        switch (cfg.mode) {
            case decoyq::Mode::Bound: return run_bound(cfg);
            case decoyq::Mode::KeyRate: return run_keyrate(cfg);
            case decoyq::Mode::Sweep: return run_sweep(cfg);
            case decoyq::Mode::Simulate: return run_simulate(cfg);
            case decoyq::Mode::AppendixDemo: return run_appendix(cfg);
        }
        return 1;
    } catch (const decoyq::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const decoyq::condition_error& e) {
        std::cerr << "condition failure: " << e.what() << "\n";
        return 3;
    } catch (const decoyq::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
