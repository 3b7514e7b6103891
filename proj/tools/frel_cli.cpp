#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "frel/suites.hpp"

namespace fs = std::filesystem;
using namespace frel;

namespace {

constexpr const char* kSchema = "frel-report/1";

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

double as_real(const json& v) { return v.is_number() ? v.get<double>() : std::nan(""); }

std::string csv_from_bundle(const json& bundle) {
    std::string out = "suite,check,parameters,measured,tolerance,pass,asserted\n";
    for (const auto& row : bundle.at("checks")) {
        const auto& r = row.at("report");
        out += csv_field(row.at("suite").get<std::string>()) + ',' + csv_field(row.at("check").get<std::string>()) +
               ',' + csv_field(row.at("parameters").dump()) + ',' + real(as_real(r.at("measured"))) + ',' +
               real(as_real(r.at("tolerance"))) + ',' + (r.at("pass").get<bool>() ? "true" : "false") + ',' +
               (r.at("asserted").get<bool>() ? "true" : "false") + '\n';
    }
    return out;
}

void strip_timing(json& j) {
    if (j.is_object()) {
        j.erase("wall_time");
        for (auto& [k, v] : j.items()) strip_timing(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_timing(v);
    }
}

fs::path output_dir(const RunConfig& c, const std::string& flag) {
    if (const char* env = std::getenv("FREL_OUTPUT_DIR"); env && *env) return env;
    if (!flag.empty()) return flag;
    return c.str("output.dir");
}

// A failed or near-failing report always carries a witness.
void ensure_witness(CheckReport& r) {
    if (r.has_witness()) return;
    const bool close = std::isfinite(r.measured) && r.tolerance > 0.0 && r.tolerance - r.measured < 10.0 * r.tolerance;
    if (!r.pass || close) r.witness = {{"measured", r.measured}, {"inputs", r.inputs}};
}

int cmd_run(const std::string& config_path, const std::string& out_flag, int threads) {
    const RunConfig c = load_config(config_path);
    if (threads <= 0) threads = static_cast<int>(c.integer("threads"));
    json table = json::object();
    fs::path table_path;
    if (needs_calibration(c)) {
        table_path = c.resolve("calibration.path");
        try {
            table = load_calibration(table_path);
        } catch (const std::exception& e) {
            throw ConfigError("calibration.path", e.what());
        }
    }
    Stopwatch sw;
    std::vector<CheckRow> rows;
    try {
        rows = run_suites(c, table, threads);
    } catch (const CalibrationError& e) {
        throw ConfigError("calibration.path", e.what());
    }
    long failures = 0, report_only = 0;
    json checks = json::array();
    for (auto& row : rows) {
        ensure_witness(row.report);
        if (row.report.counts_as_failure()) ++failures;
        if (!row.report.asserted) ++report_only;
        checks.push_back(to_json(row, true));
    }
    json bundle;
    bundle["schema"] = kSchema;
    bundle["config"] = c.to_json();
    if (!table_path.empty()) bundle["calibration"] = {{"path", table_path.string()}, {"provenance", table.at("provenance")}};
    bundle["summary"] = {{"checks", rows.size()}, {"failures", failures}, {"report_only", report_only},
                         {"pass", failures == 0}};
    bundle["checks"] = std::move(checks);
    bundle["wall_time"] = sw.seconds();

    const fs::path dir = output_dir(c, out_flag);
    write_atomically(dir / "report.json", bundle.dump(2) + "\n");
    write_atomically(dir / "checks.csv", csv_from_bundle(bundle));

    for (const auto& row : rows)
        if (row.report.counts_as_failure())
            std::cerr << "FAIL " << row.suite << '/' << row.check << ' ' << row.params.dump() << " measured "
                      << real(row.report.measured) << " tolerance " << real(row.report.tolerance)
                      << (row.report.note.empty() ? "" : " (" + row.report.note + ")") << '\n';
    std::cout << rows.size() << " checks, " << failures << " failed, " << report_only << " report-only; wrote "
              << (dir / "report.json").string() << '\n';
    return failures == 0 ? 0 : 1;
}

int cmd_calibrate(const std::string& config_path, const std::string& out_flag, const std::string& table_out,
                  int threads) {
    const RunConfig c = load_config(config_path);
    if (threads <= 0) threads = static_cast<int>(c.integer("threads"));
    const fs::path dir = output_dir(c, out_flag);
    try {
        const json t = calibrate_all(c, threads);
        const fs::path path = table_out.empty() ? dir / "calibration.json" : fs::path(table_out);
        write_atomically(path, t.dump(2) + "\n");
        std::cout << "wrote " << path.string() << '\n';
        return 0;
    } catch (const CalibrationError& e) {
        json failure = {{"error", e.what()}, {"witness", e.witness}};
        write_atomically(dir / "calibration_failure.json", failure.dump(2) + "\n");
        std::cerr << "calibration failed: " << e.what() << '\n' << e.witness.dump() << '\n';
        return 1;
    }
}

int cmd_report(const std::string& bundle_path, bool csv) {
    fs::path p = bundle_path;
    if (fs::is_directory(p)) p /= "report.json";
    std::ifstream in(p);
    if (!in) throw ConfigError("bundle", "cannot open " + p.string());
    json bundle;
    try {
        bundle = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("bundle", p.string() + " is not valid JSON: " + e.what());
    }
    if (bundle.value("schema", "") != kSchema) throw ConfigError("bundle", p.string() + " is not a report bundle");
    if (csv) {
        std::cout << csv_from_bundle(bundle);
    } else {
        strip_timing(bundle);
        std::cout << bundle.dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frel: verification runner for fractional relativistic operators"};
    app.require_subcommand(1);
    std::string config, out, table_out, bundle;
    int threads = 0;
    bool csv = false, as_json = false;

    auto* run = app.add_subcommand("run", "run the suites selected by a config");
    run->add_option("config", config, "config file")->required();
    run->add_option("--output", out, "output directory (FREL_OUTPUT_DIR wins)");
    run->add_option("--threads", threads, "worker threads, 0 = config value");

    auto* cal = app.add_subcommand("calibrate", "fit the calibration table");
    cal->add_option("config", config, "config file")->required();
    cal->add_option("--output", out, "output directory (FREL_OUTPUT_DIR wins)");
    cal->add_option("--table", table_out, "where to write the table");
    cal->add_option("--threads", threads, "worker threads, 0 = config value");

    auto* rep = app.add_subcommand("report", "print a report bundle");
    rep->add_option("bundle", bundle, "bundle directory or report.json")->required();
    auto* fcsv = rep->add_flag("--csv", csv, "CSV table");
    auto* fjson = rep->add_flag("--json", as_json, "JSON without timing");
    fcsv->excludes(fjson);

    auto* ref = app.add_subcommand("reference-config", "print every config key with its default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*run) return cmd_run(config, out, threads);
        if (*cal) return cmd_calibrate(config, out, table_out, threads);
        if (*rep) {
            if (!csv && !as_json) throw ConfigError("report", "one of --csv or --json is required");
            return cmd_report(bundle, csv);
        }
        if (*ref) {
            std::cout << reference_config().dump(2) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
