#include "decoyq/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "decoyq/errors.hpp"

namespace decoyq {

Mode parse_mode(const std::string& s) {
    if (s == "bound") return Mode::Bound;
    if (s == "keyrate") return Mode::KeyRate;
    if (s == "sweep") return Mode::Sweep;
    if (s == "simulate") return Mode::Simulate;
    if (s == "appendix-demo") return Mode::AppendixDemo;
    throw config_error("mode: unknown value '" + s +
                       "' (expected bound|keyrate|sweep|simulate|appendix-demo)");
}

OutputFormat parse_format(const std::string& s) {
    if (s == "human") return OutputFormat::Human;
    if (s == "csv") return OutputFormat::Csv;
    if (s == "jsonl") return OutputFormat::Jsonl;
    throw config_error("format: unknown value '" + s + "' (expected human|csv|jsonl)");
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Bound: return "bound";
        case Mode::KeyRate: return "keyrate";
        case Mode::Sweep: return "sweep";
        case Mode::Simulate: return "simulate";
        case Mode::AppendixDemo: return "appendix-demo";
    }
    return "?";
}

const char* to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Human: return "human";
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Jsonl: return "jsonl";
    }
    return "?";
}

SourceBounds CoherentSpec::to_bounds() const {
    return coherent_bounds(IntensityInterval::relative(mu_decoy, delta_m),
                           IntensityInterval::relative(mu_signal, delta_m),
                           IntensityInterval{0.0, mu_vacuum_max});
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

class KeyValueFile {
public:
    explicit KeyValueFile(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file '" + path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos) {
                std::ostringstream os;
                os << path << ":" << lineno << ": expected 'key = value'";
                throw config_error(os.str());
            }
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) throw config_error(path + ": empty key");
            if (value.find('%') != std::string::npos) {
                throw config_error(key + ": percent signs are rejected; write plain "
                                   "decimals (0.0358, not 3.58%)");
            }
            if (!values_.emplace(key, value).second) {
                throw config_error(key + ": duplicate key");
            }
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string take_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) throw config_error(key + ": missing required key");
        consumed_.insert(key);
        return it->second;
    }

    std::string take_string(const std::string& key, const std::string& fallback) {
        return has(key) ? take_string(key) : fallback;
    }

    double take_number(const std::string& key) {
        return parse_number(key, take_string(key));
    }

    double take_number(const std::string& key, double fallback) {
        return has(key) ? take_number(key) : fallback;
    }

    std::vector<double> take_list(const std::string& key) {
        const std::string raw = take_string(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.push_back(parse_number(key, trim(item)));
        }
        if (out.empty()) throw config_error(key + ": empty list");
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& [key, value] : values_) {
            if (!consumed_.count(key)) {
                throw config_error(key + ": unknown key (or key not valid for this mode)");
            }
        }
    }

private:
    double parse_number(const std::string& key, const std::string& text) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw config_error(key + ": cannot parse '" + text + "' as a number");
        }
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

const char* const kBoundKeys[] = {"a0_lo", "a0_hi", "a1_lo", "a1_hi", "a2_lo", "a2_hi",
                                  "ap0_lo", "ap0_hi", "ap1_lo", "ap1_hi", "ap2_lo",
                                  "ap2_hi", "b0_lo"};

ObservedTallies tallies_from_counts(KeyValueFile& kv, double pulses) {
    ObservedTallies t;
    t.pulses = pulses;
    t.p0 = kv.take_number("p0");
    t.p = kv.take_number("p");
    t.pp = kv.take_number("pp");
    t.n0 = kv.take_number("n0");
    t.nd = kv.take_number("nd");
    t.ns = kv.take_number("ns");
    return t;
}

ObservedTallies tallies_from_rates(KeyValueFile& kv, double pulses) {
    ObservedTallies t;
    t.pulses = pulses;
    t.p0 = kv.take_number("p0");
    t.p = kv.take_number("p");
    t.pp = kv.take_number("pp");
    t.n0 = static_cast<double>(std::llround(kv.take_number("s0") * t.p0 * pulses));
    t.nd = static_cast<double>(std::llround(kv.take_number("s") * t.p * pulses));
    t.ns = static_cast<double>(std::llround(kv.take_number("sp") * t.pp * pulses));
    return t;
}

} // namespace

RunConfig parse_config(const std::string& path) {
    KeyValueFile kv(path);
    RunConfig cfg;

    cfg.mode = parse_mode(kv.take_string("mode", "bound"));
    cfg.format = parse_format(kv.take_string("format", "human"));
    cfg.sigma_mult = kv.take_number("sigma_mult", 10.0);
    cfg.grid_n = static_cast<int>(kv.take_number("grid_n", 1001));
    cfg.seed = static_cast<std::uint64_t>(kv.take_number("seed", 1));
    const std::string reading = kv.take_string("ns_prime_reading", "full");
    if (reading == "full") {
        cfg.halved_ns = false;
    } else if (reading == "half") {
        cfg.halved_ns = true;
    } else {
        throw config_error("ns_prime_reading: expected full|half, got '" + reading + "'");
    }

    // Source description: coherent intensities or explicit bounds, never both.
    const bool has_coherent = kv.has("mu_decoy") || kv.has("mu_signal");
    bool has_explicit = false;
    for (const char* key : kBoundKeys) has_explicit = has_explicit || kv.has(key);
    if (has_coherent && has_explicit) {
        throw config_error("mu_decoy/mu_signal conflict with explicit a*_lo/a*_hi keys: "
                           "give exactly one source description");
    }
    if (has_coherent) {
        CoherentSpec spec;
        spec.mu_decoy = kv.take_number("mu_decoy");
        spec.mu_signal = kv.take_number("mu_signal");
        spec.delta_m = kv.take_number("delta_m", 0.0);
        spec.mu_vacuum_max = kv.take_number("mu_vacuum_max", 0.0);
        cfg.coherent = spec;
    } else if (has_explicit) {
        SourceBounds b;
        b.a0_lo = kv.take_number("a0_lo");
        b.a0_hi = kv.take_number("a0_hi");
        b.a1_lo = kv.take_number("a1_lo");
        b.a1_hi = kv.take_number("a1_hi");
        b.a2_lo = kv.take_number("a2_lo");
        b.a2_hi = kv.take_number("a2_hi");
        b.ap0_lo = kv.take_number("ap0_lo");
        b.ap0_hi = kv.take_number("ap0_hi");
        b.ap1_lo = kv.take_number("ap1_lo");
        b.ap1_hi = kv.take_number("ap1_hi");
        b.ap2_lo = kv.take_number("ap2_lo");
        b.ap2_hi = kv.take_number("ap2_hi");
        b.b0_lo = kv.take_number("b0_lo");
        if (kv.has("tail_ratio_decoy")) b.tail_ratio_decoy = kv.take_number("tail_ratio_decoy");
        if (kv.has("tail_ratio_signal")) b.tail_ratio_signal = kv.take_number("tail_ratio_signal");
        cfg.explicit_bounds = b;
    }

    // Tallies: counts, rates, or a tally file from a previous simulate run.
    const bool has_counts = kv.has("n0") || kv.has("nd") || kv.has("ns");
    const bool has_rates = kv.has("s0") || kv.has("s") || kv.has("sp");
    if (has_counts && has_rates) {
        throw config_error("n0/nd/ns conflict with s0/s/sp: counts and rates are "
                           "mutually exclusive");
    }
    if (kv.has("tallies_file")) {
        if (has_counts || has_rates) {
            throw config_error("tallies_file conflicts with inline n0/nd/ns or s0/s/sp keys");
        }
        cfg.tallies_file = kv.take_string("tallies_file");
    } else if (has_counts || has_rates) {
        const double pulses = kv.take_number("m_pulses");
        ObservedTallies t = has_counts ? tallies_from_counts(kv, pulses)
                                       : tallies_from_rates(kv, pulses);
        t.t0_signal = kv.take_number("t0_signal", 0.0);
        t.t0_decoy = kv.take_number("t0_decoy", 0.0);
        cfg.tallies = t;
    }

    if (kv.has("delta_m_list")) cfg.delta_m_list = kv.take_list("delta_m_list");
    if (kv.has("vacuum_caps")) cfg.vacuum_caps = kv.take_list("vacuum_caps");

    if (cfg.mode == Mode::Simulate) {
        cfg.sim_pulses = static_cast<std::uint64_t>(kv.take_number("m_pulses", 0));
        cfg.block_len = static_cast<std::uint64_t>(kv.take_number("block_len", 0));
        cfg.mu_vacuum = kv.take_number("mu_vacuum", 0.0);
        cfg.eta_strong = kv.take_number("eta_strong", 0.0);
        cfg.eta_weak = kv.take_number("eta_weak", 0.0);
        cfg.dark_rate = kv.take_number("dark_rate", 0.0);
        if (cfg.tallies) {
            // p0/p/pp were consumed with the tallies block; reuse them below.
        } else {
            cfg.sim_p0 = kv.take_number("p0");
            cfg.sim_p = kv.take_number("p");
            cfg.sim_pp = kv.take_number("pp");
        }
    }
    cfg.tallies_out = kv.take_string("tallies_out", cfg.tallies_out);

    if (cfg.mode == Mode::AppendixDemo) {
        cfg.appendix.lambda_d = kv.take_number("lambda_d", cfg.appendix.lambda_d);
        cfg.appendix.lambda_s = kv.take_number("lambda_s", cfg.appendix.lambda_s);
        cfg.appendix.m_photons = static_cast<int>(kv.take_number("m_photons", cfg.appendix.m_photons));
        cfg.appendix.eps = kv.take_number("eps", cfg.appendix.eps);
        cfg.appendix.eta_ratio = kv.take_number("eta_ratio", cfg.appendix.eta_ratio);
    }

    kv.reject_unconsumed();
    return cfg;
}

SourceBounds RunConfig::resolve_bounds() const {
    if (coherent) return coherent->to_bounds();
    if (explicit_bounds) {
        explicit_bounds->validate();
        return *explicit_bounds;
    }
    throw config_error("no source description: give mu_decoy/mu_signal (+ delta_m, "
                       "mu_vacuum_max) or the explicit a*/ap*/b0_lo bound keys");
}

ObservedTallies RunConfig::resolve_tallies() const {
    if (tallies) {
        tallies->validate();
        return *tallies;
    }
    if (!tallies_file.empty()) {
        ObservedTallies t = read_tally_csv(tallies_file);
        t.validate();
        return t;
    }
    throw config_error("no tallies: give n0/nd/ns, s0/s/sp (+ m_pulses, p0, p, pp), "
                       "or tallies_file");
}

SimScenario RunConfig::resolve_scenario() const {
    if (!coherent) {
        throw config_error("simulate mode needs coherent source intensities "
                           "(mu_decoy, mu_signal; explicit bounds cannot drive a simulation)");
    }
    SimScenario sc;
    sc.pulses = sim_pulses;
    if (sc.pulses == 0) throw config_error("m_pulses: required (and positive) for simulate mode");
    sc.block_len = block_len != 0 ? block_len : sc.pulses;
    if (tallies) {
        sc.p0 = tallies->p0;
        sc.p = tallies->p;
        sc.pp = tallies->pp;
    } else {
        sc.p0 = sim_p0;
        sc.p = sim_p;
        sc.pp = sim_pp;
    }
    sc.vacuum = {mu_vacuum, coherent->delta_m};
    sc.decoy = {coherent->mu_decoy, coherent->delta_m};
    sc.signal = {coherent->mu_signal, coherent->delta_m};
    sc.eta_strong = eta_strong;
    sc.eta_weak = eta_weak;
    sc.dark_rate = dark_rate;
    sc.seed = seed;
    sc.validate();
    return sc;
}

void write_tally_csv(const std::string& path, const ObservedTallies& tallies) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open '" + path + "' for writing");
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "source,count\n";
    out << "vacuum," << num(tallies.n0) << "\n";
    out << "decoy," << num(tallies.nd) << "\n";
    out << "signal," << num(tallies.ns) << "\n";
    out << "meta_m," << num(tallies.pulses) << "\n";
    out << "meta_p0," << num(tallies.p0) << "\n";
    out << "meta_p," << num(tallies.p) << "\n";
    out << "meta_pp," << num(tallies.pp) << "\n";
}

ObservedTallies read_tally_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open tally file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "source,count") {
        throw config_error(path + ": expected header 'source,count'");
    }
    std::map<std::string, double> rows;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto comma = stripped.find(',');
        if (comma == std::string::npos) {
            throw config_error(path + ": malformed row '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, comma));
        try {
            rows[key] = std::stod(stripped.substr(comma + 1));
        } catch (const std::exception&) {
            throw config_error(path + ": cannot parse count in row '" + stripped + "'");
        }
    }
    auto get = [&](const char* key) {
        auto it = rows.find(key);
        if (it == rows.end()) {
            throw config_error(std::string(path) + ": missing row '" + key + "'");
        }
        return it->second;
    };
    ObservedTallies t;
    t.n0 = get("vacuum");
    t.nd = get("decoy");
    t.ns = get("signal");
    t.pulses = get("meta_m");
    t.p0 = get("meta_p0");
    t.p = get("meta_p");
    t.pp = get("meta_pp");
    return t;
}

} // namespace decoyq
