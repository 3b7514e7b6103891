#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace frel {

using json = nlohmann::ordered_json;

// Outcome of one verification. `measured` is the headline quantity compared
// against `tolerance`; `quantities` carries everything else worth keeping.
struct CheckReport {
    std::string name;
    json inputs = json::object();
    std::vector<std::pair<std::string, double>> quantities;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool asserted = true;  // report-only checks never fail a run
    json witness = json::object();
    double wall_time = 0.0;
    std::string note;

    CheckReport& set(const std::string& key, double v) {
        for (auto& q : quantities)
            if (q.first == key) {
                q.second = v;
                return *this;
            }
        quantities.emplace_back(key, v);
        return *this;
    }
    double get(const std::string& key) const {
        for (const auto& q : quantities)
            if (q.first == key) return q.second;
        return std::nan("");
    }
    bool has_witness() const { return !witness.empty(); }
    bool counts_as_failure() const { return asserted && !pass; }
};

inline json to_json(const CheckReport& r, bool with_timing = true) {
    json q = json::object();
    for (const auto& [k, v] : r.quantities) q[k] = v;
    json j;
    j["name"] = r.name;
    j["inputs"] = r.inputs;
    j["measured"] = r.measured;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["asserted"] = r.asserted;
    j["quantities"] = q;
    j["witness"] = r.witness;
    if (!r.note.empty()) j["note"] = r.note;
    if (with_timing) j["wall_time"] = r.wall_time;
    return j;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace frel
