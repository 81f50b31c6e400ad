// End-to-end checks of the command-line tool: exit codes, byte-identical
// machine output, and the simulate -> bound round trip. Invoked by ctest as
//   decoyq_cli_e2e <path-to-decoyq> <path-to-configs-dir>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Returns the process exit code; stdout is captured into out_path.
int run(const std::string& cmd, const std::string& out_path) {
    const std::string full = cmd + " > " + out_path + " 2> " + out_path + ".err";
    const int status = std::system(full.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <decoyq-binary> <configs-dir>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const std::string configs = argv[2];
    const std::string ref = configs + "/reference_run.cfg";

    // Identical config + seed must give byte-identical machine output.
    const int rc1 = run(cli + " --config " + ref + " --mode sweep --format csv --grid 201",
                        "e2e_sweep_a.csv");
    const int rc2 = run(cli + " --config " + ref + " --mode sweep --format csv --grid 201",
                        "e2e_sweep_b.csv");
    check(rc1 == 0 && rc2 == 0, "sweep runs exit 0");
    check(slurp("e2e_sweep_a.csv") == slurp("e2e_sweep_b.csv"),
          "sweep output byte-identical across runs");
    check(slurp("e2e_sweep_a.csv").find("R1,") != std::string::npos,
          "sweep csv contains the R1 row");
    {
        // the error-free asymptotic cell of the reference run: row,delta_m,
        // vacuum_cap,asymptotic,rate,...
        const std::string sweep = slurp("e2e_sweep_a.csv");
        double rate_r0 = 0.0;
        std::istringstream lines(sweep);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.rfind("R,0,", 0) == 0) {
                std::size_t pos = 0;
                for (int field = 0; field < 4; ++field) pos = line.find(',', pos) + 1;
                rate_r0 = std::strtod(line.c_str() + pos, nullptr);
                break;
            }
        }
        check(std::abs(rate_r0 - 17.28e-6) <= 0.02 * 17.28e-6,
              "sweep (R, delta_m = 0) cell near 1.728e-5 bits per pulse");
    }

    // bound and keyrate modes on the same config
    check(run(cli + " --config " + ref + " --mode bound --format jsonl", "e2e_bound.jsonl") == 0,
          "bound mode exits 0");
    check(slurp("e2e_bound.jsonl").find("delta1_signal_lo") != std::string::npos,
          "bound jsonl carries the fraction bound");
    check(run(cli + " --config " + ref + " --mode keyrate --format csv --grid 201",
              "e2e_rate.csv") == 0,
          "keyrate mode exits 0");

    // appendix demo prints a ratio above the attack threshold
    write_file("e2e_appendix.cfg", "mode = appendix-demo\n");
    check(run(cli + " --config e2e_appendix.cfg --format csv", "e2e_appendix.csv") == 0,
          "appendix-demo exits 0");
    const std::string appendix_out = slurp("e2e_appendix.csv");
    const auto comma = appendix_out.rfind(',');
    check(comma != std::string::npos && std::strtod(appendix_out.c_str() + comma + 1, nullptr) > 1.0025,
          "appendix-demo ratio exceeds 1.0025");

    // simulate -> bound round trip with no manual edits: the same config
    // provides tallies_out for simulate and tallies_file for bound.
    write_file("e2e_sim.cfg",
               "mode = simulate\n"
               "m_pulses = 200000\nblock_len = 1000\n"
               "p0 = 0.1\np = 0.4\npp = 0.5\n"
               "mu_decoy = 0.2\nmu_signal = 0.6\ndelta_m = 0.01\n"
               "mu_vacuum = 0\nmu_vacuum_max = 0\n"
               "eta_strong = 0.2\neta_weak = 0.1\ndark_rate = 0\nseed = 12\n"
               "tallies_out = e2e_tallies.csv\n");
    check(run(cli + " --config e2e_sim.cfg --format human", "e2e_sim.out") == 0,
          "simulate exits 0");
    check(slurp("e2e_sim.out").find("PASS") != std::string::npos,
          "simulate verification passes");
    write_file("e2e_analyze.cfg",
               "mode = bound\n"
               "tallies_file = e2e_tallies.csv\n"
               "mu_decoy = 0.2\nmu_signal = 0.6\ndelta_m = 0.01\nmu_vacuum_max = 0\n");
    check(run(cli + " --config e2e_analyze.cfg --format jsonl", "e2e_analyze.jsonl") == 0,
          "bound ingests the simulate tallies unchanged");
    check(slurp("e2e_analyze.jsonl").find("\"record\":\"bound\"") != std::string::npos,
          "round-trip bound record emitted");

    // exit codes: 2 config error, 3 condition failure
    write_file("e2e_broken.cfg", "mode = bound\nt0_signal = 3.58%\n");
    check(run(cli + " --config e2e_broken.cfg", "e2e_broken.out") == 2,
          "percent sign in config exits 2");
    write_file("e2e_badcond.cfg",
               "mode = bound\n"
               "m_pulses = 1e6\np0 = 0.1\np = 0.4\npp = 0.5\n"
               "n0 = 10\nnd = 1000\nns = 2000\n"
               "mu_decoy = 0.6\nmu_signal = 0.2\n"); // overlap: decoy above signal
    check(run(cli + " --config e2e_badcond.cfg", "e2e_badcond.out") == 3,
          "failing admissibility conditions exit 3");
    write_file("e2e_baddomain.cfg",
               "mode = keyrate\n"
               "m_pulses = 1e6\np0 = 0.1\np = 0.4\npp = 0.5\n"
               "n0 = 10\nnd = 1000\nns = 2000\nt0_signal = 0.7\n"
               "mu_decoy = 0.2\nmu_signal = 0.6\n"); // QBER above 0.5
    check(run(cli + " --config e2e_baddomain.cfg", "e2e_baddomain.out") == 4,
          "numerical domain violation exits 4");

    if (failures != 0) {
        std::printf("%d e2e check(s) failed\n", failures);
        return 1;
    }
    std::printf("all e2e checks passed\n");
    return 0;
}
