// Runs the CLI end to end and prints one PASS/FAIL line per acceptance
// criterion. Usage: frel_acceptance <frel_cli> <fixtures dir> <scratch dir>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "frel/check_report.hpp"

namespace fs = std::filesystem;
using frel::json;

namespace {

std::string cli;
fs::path scratch;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Exit status of `cmd`, with stdout and stderr captured to `log`.
int shell(const std::string& cmd, const fs::path& log) {
    const int raw = std::system((cmd + " > " + quote(log.string()) + " 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

int run_cli(const std::string& args, const fs::path& outdir, const fs::path& log) {
    return shell("FREL_OUTPUT_DIR=" + quote(outdir.string()) + " " + quote(cli) + " " + args, log);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Rows {
    std::vector<json> all;

    std::vector<json> select(const std::function<bool(const json&)>& pred) const {
        std::vector<json> out;
        for (const auto& r : all)
            if (pred(r)) out.push_back(r);
        return out;
    }
    std::vector<json> named(const std::string& suite, const std::string& check) const {
        return select([&](const json& r) { return r["suite"] == suite && r["check"] == check; });
    }
};

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("missing: " + what);
        }
    }
    // Every asserted row passes; reports the worst measured/tolerance pair.
    void rows(const std::string& label, const std::vector<json>& rs, std::size_t expected = 0) {
        if (rs.empty() || (expected && rs.size() != expected)) {
            pass = false;
            notes.push_back(label + ": expected " + std::to_string(expected) + " rows, found " + std::to_string(rs.size()));
            return;
        }
        std::size_t failed = 0, asserted = 0;
        double worst = -INFINITY;
        const json* wr = nullptr;
        for (const auto& r : rs) {
            const auto& rep = r["report"];
            if (!rep["asserted"].get<bool>()) continue;
            ++asserted;
            if (!rep["pass"].get<bool>()) ++failed;
            const double tol = rep["tolerance"].get<double>();
            const double m = rep["measured"].is_number() ? rep["measured"].get<double>() : INFINITY;
            const double score = tol > 0.0 ? m / tol : m;
            if (score > worst) {
                worst = score;
                wr = &r;
            }
        }
        if (failed) pass = false;
        std::string n = label + " " + std::to_string(asserted - failed) + "/" + std::to_string(asserted);
        if (wr) n += " (worst " + fmt((*wr)["report"]["measured"].is_number() ? (*wr)["report"]["measured"].get<double>() : NAN) +
                     " vs " + fmt((*wr)["report"]["tolerance"].get<double>()) + ")";
        notes.push_back(n);
    }
    void runtime(const std::string& label, const std::vector<json>& rs, double limit) {
        double t = 0.0;
        for (const auto& r : rs) t += r["report"].value("wall_time", 0.0);
        if (!(t < limit)) pass = false;
        notes.push_back(label + " " + fmt(t) + " s < " + fmt(limit) + " s");
    }
};

void print(int k, const std::string& title, const Verdict& v, int& failures) {
    std::string line = "criterion " + std::to_string(k) + ": " + (v.pass ? "PASS" : "FAIL") + " | " + title + " | ";
    for (std::size_t i = 0; i < v.notes.size(); ++i) line += (i ? "; " : "") + v.notes[i];
    std::cout << line << std::endl;
    if (!v.pass) ++failures;
}

bool param_is(const json& r, const char* k, double v) {
    return r["parameters"].contains(k) && std::abs(r["parameters"][k].get<double>() - v) < 1e-12;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: frel_acceptance <frel_cli> <fixtures dir> <scratch dir>\n";
        return 2;
    }
    cli = argv[1];
    const fs::path fixtures = argv[2];
    scratch = argv[3];
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    const json cfg = {{"suite", "all"}, {"seed", 20261015u}, {"linear.lambda", 0.5}, {"quadratic.alpha", 1.0}};
    const fs::path cfg_path = scratch / "acceptance.json";
    std::ofstream(cfg_path) << cfg.dump(2) << '\n';

    const int code_a = run_cli("run " + quote(cfg_path.string()), scratch / "run-a", scratch / "run-a.log");
    std::cout << "full run: exit " << code_a << ", log " << (scratch / "run-a.log").string() << std::endl;
    Rows rows;
    try {
        const json bundle = json::parse(slurp(scratch / "run-a" / "report.json"));
        for (const auto& r : bundle["checks"]) rows.all.push_back(r);
    } catch (const std::exception& e) {
        std::cerr << "no report bundle: " << e.what() << '\n' << slurp(scratch / "run-a.log");
    }
    int failures = 0;

    {
        Verdict v;
        const auto rs = rows.select([](const json& r) {
            const std::string c = r["check"];
            return r["suite"] == "equivalence" && c.find("_vs_") != std::string::npos;
        });
        v.rows("pairs", rs, 27);
        for (double s : {0.3, 0.5, 0.7})
            for (double m : {0.5, 1.0, 2.0})
                v.require(!rows.select([&](const json& r) {
                               return r["check"] == "singular_vs_spectral" && param_is(r, "s", s) && param_is(r, "m", m);
                           }).empty(),
                          "s=" + fmt(s) + " m=" + fmt(m));
        v.runtime("runtime", rs, 30.0);
        print(1, "definition equivalence", v, failures);
    }
    {
        Verdict v;
        v.rows("K_1/2 closed form", rows.named("equivalence", "macdonald_half_closed_form"), 1);
        v.rows("small-z law", rows.named("equivalence", "macdonald_small_z_law"), 3);
        const auto large = rows.named("equivalence", "macdonald_large_z_law");
        v.rows("large-z law", large, 3);
        for (const auto& r : large)
            if (!r["report"]["asserted"].get<bool>())
                v.notes.push_back("report-only nu=" + fmt(r["parameters"]["nu"].get<double>()) + " deviation " +
                                  fmt(r["report"]["measured"].get<double>()) + " (" + r["report"]["note"].get<std::string>() + ")");
        print(2, "special functions", v, failures);
    }
    {
        Verdict v;
        v.rows("interior", rows.select([](const json& r) {
                   return r["check"] == "bessel_identity" && r["parameters"]["lambda"].get<double>() < 1.0;
               }), 12);
        v.rows("lambda=1", rows.select([](const json& r) {
                   return r["check"] == "bessel_identity" && r["parameters"]["lambda"].get<double>() == 1.0;
               }), 1);
        print(3, "Bessel identities", v, failures);
    }
    {
        Verdict v;
        v.rows("residual", rows.named("equivalence", "eigenfunction_residual"), 2);
        print(4, "eigenfunctions", v, failures);
    }
    {
        Verdict v;
        v.rows("explicit kernel", rows.named("heat", "explicit_kernel"), 2);
        v.rows("weighted L1", rows.named("heat", "weighted_l1_kernel"), 9);
        v.rows("mass decay", rows.named("heat", "kernel_mass"), 3);
        print(5, "kernel identities", v, failures);
    }
    {
        Verdict v;
        v.rows("energy identity", rows.named("heat", "energy_identity"), 3);
        v.rows("weighted decay", rows.named("heat", "weighted_decay"), 9);
        print(6, "energy identity and weighted decay", v, failures);
    }
    {
        Verdict v;
        const auto rs = rows.named("heat", "log_convexity");
        v.rows("sweeps", rs, 2);
        for (const auto& r : rs)
            v.require(r["report"]["quantities"].value("members", 0.0) == 100.0, "100 data per lambda");
        v.runtime("runtime", rs, 60.0);
        print(7, "log-convexity", v, failures);
    }
    {
        Verdict v;
        v.rows("constant potential", rows.named("heat", "constant_potential"), 3);
        v.rows("Picard contraction", rows.named("heat", "picard_contraction"), 20);
        print(8, "mild solution", v, failures);
    }
    {
        Verdict v;
        const auto led = rows.named("linear-carleman", "carleman_linear");
        v.rows("ledger", led);
        v.rows("Ddot bound", rows.named("linear-carleman", "ddot_lower_bound"));
        v.rows("tent identity", rows.named("linear-carleman", "tent_identity"), 1);
        v.rows("refinement", rows.select([](const json& r) {
                   const std::string c = r["check"];
                   return r["suite"] == "linear-carleman" && c.find("refinement") != std::string::npos;
               }), 2);
        for (const auto& r : led)
            v.require(r["report"]["quantities"].value("members", 0.0) >= 50.0, "50 trajectories per A");
        v.require(!led.empty() && param_is(led.front(), "s", 0.5) && param_is(led.front(), "m", 1.0) &&
                      param_is(led.front(), "lambda", 0.5),
                  "s=0.5 m=1 lambda=0.5");
        print(9, "linear Carleman", v, failures);
    }
    {
        Verdict v;
        v.rows("bracket FD", rows.named("symbol", "poisson_bracket_fd"), 1);
        v.rows("parabolic FD", rows.named("symbol", "parabolic_bracket_fd"), 1);
        v.rows("s=1 commutator", rows.named("symbol", "s1_commutator"), 2);
        v.rows("decomposition", rows.named("symbol", "decomposition_identity"), 2);
        v.rows("positivity", rows.named("symbol", "positivity_sweep"), 5);
        const auto fals = rows.named("symbol", "positivity_falsification");
        v.rows("falsification", fals, 1);
        for (const auto& r : fals) v.require(!r["report"]["witness"].empty(), "falsification witness");
        v.rows("Garding", rows.named("symbol", "garding_hypothesis"), 5);
        for (const auto& r : rows.named("symbol", "poisson_bracket_fd"))
            v.require(r["report"]["quantities"].value("points_used", 0.0) + r["report"]["quantities"].value("points_skipped_rho", 0.0) == 1000.0,
                      "1000 points");
        print(10, "symbol layer", v, failures);
    }
    {
        Verdict v;
        const auto rs = rows.select([](const json& r) {
            const std::string c = r["check"];
            return r["suite"] == "quadratic-carleman" && c.rfind("carleman_quadratic_", 0) == 0;
        });
        v.rows("inequality", rs, 18);
        for (const auto& [mode, s] : std::vector<std::pair<std::string, double>>{
                 {"elliptic", 0.5}, {"elliptic", 0.75}, {"parabolic", 0.75}}) {
            for (bool massive : {false, true}) {
                const auto hit = rows.select([&](const json& r) {
                    if (!(r["suite"] == "quadratic-carleman" && r["parameters"].value("mode", "") == mode &&
                          param_is(r, "s", s)))
                        return false;
                    const double m = r["parameters"]["m"].get<double>();
                    return massive ? m > 0.0 : m == 0.0;
                });
                v.require(!hit.empty(), mode + " s=" + fmt(s) + (massive ? " m=2alpha/R" : " m=0"));
                for (const auto& r : hit)
                    if (r["parameters"].contains("functions"))
                        v.require(r["parameters"]["functions"].get<int>() == 20, "20 functions");
            }
        }
        v.rows("refinement", rows.select([](const json& r) {
                   const std::string c = r["check"];
                   return r["suite"] == "quadratic-carleman" && c.find("refinement") != std::string::npos;
               }), 12);
        print(11, "quadratic Carleman", v, failures);
    }
    {
        Verdict v;
        v.rows("conjugation", rows.named("symbol", "appendix_conjugation"), 4);
        print(12, "matrix conjugation identity", v, failures);
    }
    {
        Verdict v;
        const int code_b = run_cli("run --threads 1 " + quote(cfg_path.string()), scratch / "run-b", scratch / "run-b.log");
        v.require(code_a == code_b, "same exit code for both runs");
        const bool csv_same = slurp(scratch / "run-a" / "checks.csv") == slurp(scratch / "run-b" / "checks.csv") &&
                              !slurp(scratch / "run-a" / "checks.csv").empty();
        v.require(csv_same, "byte-identical checks.csv");
        for (const char* mode : {"--csv", "--json"}) {
            const int ra = shell(quote(cli) + " report " + mode + " " + quote((scratch / "run-a").string()),
                                 scratch / (std::string("report-a") + mode));
            const int rb = shell(quote(cli) + " report " + mode + " " + quote((scratch / "run-b").string()),
                                 scratch / (std::string("report-b") + mode));
            const std::string a = slurp(scratch / (std::string("report-a") + mode));
            v.require(ra == 0 && rb == 0 && a == slurp(scratch / (std::string("report-b") + mode)) && !a.empty(),
                      std::string("identical report ") + mode);
        }
        v.notes.push_back(std::string("two runs ") + (csv_same ? "identical" : "differ"));

        const int pass = run_cli("run " + quote((fixtures / "pass.json").string()), scratch / "fx-pass", scratch / "fx-pass.log");
        const int fail = run_cli("run " + quote((fixtures / "fail.json").string()), scratch / "fx-fail", scratch / "fx-fail.log");
        const int bad = run_cli("run " + quote((fixtures / "malformed.json").string()), scratch / "fx-bad", scratch / "fx-bad.log");
        v.require(pass == 0, "pass fixture exits 0 (got " + std::to_string(pass) + ")");
        v.require(fail == 1, "fail fixture exits 1 (got " + std::to_string(fail) + ")");
        v.require(fs::exists(scratch / "fx-fail" / "report.json"), "fail fixture still writes its report");
        v.require(bad == 2, "malformed fixture exits 2 (got " + std::to_string(bad) + ")");
        v.require(slurp(scratch / "fx-bad.log").find("grid.n") != std::string::npos, "diagnostic names grid.n");
        v.notes.push_back("fixture exits " + std::to_string(pass) + "/" + std::to_string(fail) + "/" + std::to_string(bad));
        print(13, "CLI determinism and exit codes", v, failures);
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
