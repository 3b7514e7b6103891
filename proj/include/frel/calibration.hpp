#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frel/config.hpp"
#include "frel/sweep.hpp"

namespace frel {

inline constexpr int kCalibrationVersion = 1;

class CalibrationError : public std::runtime_error {
  public:
    CalibrationError(const std::string& what, json witness = json::object())
        : std::runtime_error(what), witness(std::move(witness)) {}
    json witness;
};

inline json load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError("cannot open calibration table " + path.string());
    json t = json::parse(in);
    if (t.value("version", 0) != kCalibrationVersion)
        throw CalibrationError("calibration table " + path.string() + " has an unsupported version");
    for (const char* k : {"linear", "positivity", "garding", "quadratic"})
        if (!t.contains(k)) throw CalibrationError(std::string("calibration table lacks section '") + k + "'");
    return t;
}

// temp + rename so readers never see a partial file
inline void write_atomically(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << body;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// ---- linear --------------------------------------------------------------

inline const std::vector<double>& linear_deltas() {
    static const std::vector<double> d = {50.0, 20.0, 10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05};
    return d;
}

inline LinearCorpusSpec linear_spec(const RunConfig& c, std::size_t n, const std::string& stream) {
    LinearCorpusSpec s;
    s.p = {c.num("operator.s"), c.num("operator.m"), 1};
    s.lambda = c.num("linear.lambda");
    s.grid = {c.num("linear.L"), n};
    s.dt = c.num("linear.dt");
    s.seed = c.seed();
    s.stream = stream;
    s.random = static_cast<int>(c.integer("linear.trajectories"));
    s.stress = static_cast<int>(c.integer("linear.stress"));
    return s;
}

// Largest required C1 over the corpus at each A = -m^{2s} - delta.
inline json linear_need_sweep(const std::vector<std::vector<SliceIntegrals>>& corpus, const LinearCorpusSpec& spec,
                              int threads) {
    const double m2s = std::pow(spec.p.m, 2.0 * spec.p.s);
    json rows = json::array();
    for (double d : linear_deltas()) {
        const LinearWeight w{spec.lambda, -m2s - d};
        std::vector<double> need(corpus.size());
        parallel_for(corpus.size(), threads, [&](std::size_t i) { need[i] = required_C1(corpus[i], w, spec.p, spec.dt); });
        const auto it = std::max_element(need.begin(), need.end());
        rows.push_back({{"A", w.A}, {"need_C1", *it}, {"trajectory", it - need.begin()}});
    }
    return rows;
}

// C1 is twice the largest need, rounded up; A* is the largest swept A with a
// finite need, and C2 makes exactly A <= A* admissible.
inline json linear_constants(const json& sweep, const OperatorParams& p, double lambda) {
    double worst = 0.0, A_star = -INFINITY, A_min = INFINITY;
    for (const auto& r : sweep) {
        const double need = r.at("need_C1").get<double>(), A = r.at("A").get<double>();
        if (!std::isfinite(need)) continue;
        worst = std::max(worst, need);
        A_star = std::max(A_star, A);
        A_min = std::min(A_min, A);
    }
    if (!std::isfinite(A_star)) throw CalibrationError("linear calibration: no swept A admits a finite C1", sweep);
    const double g = weight_eigenvalue(lambda, p);
    const double C1 = std::max(1.0, round_up_sig(2.0 * worst, 2));
    const double C2 = round_down_sig((g - A_star) * (g - A_star) / std::pow(p.m, 4.0 * p.s), 3);
    return {{"C1", C1}, {"C2", C2}, {"A_star", A_star}, {"A_min", A_min}, {"max_need_C1", worst}};
}

inline json calibrate_linear(const RunConfig& c, int threads) {
    const std::size_t n = static_cast<std::size_t>(c.integer("linear.n"));
    auto at = [&](std::size_t nn) {
        const auto spec = linear_spec(c, nn, "calibration");
        const auto corpus = linear_corpus(spec, threads);
        const auto sweep = linear_need_sweep(corpus, spec, threads);
        json j = linear_constants(sweep, spec.p, spec.lambda);
        j["n"] = nn;
        j["corpus_hash"] = corpus_hash(corpus);
        j["sweep"] = sweep;
        return j;
    };
    json out = at(n);
    out["s"] = c.num("operator.s");
    out["m"] = c.num("operator.m");
    out["lambda"] = c.num("linear.lambda");
    out["L"] = c.num("linear.L");
    out["dt"] = c.num("linear.dt");
    out["trajectories"] = c.integer("linear.trajectories");
    out["stress"] = c.integer("linear.stress");
    if (c.flag("linear.refine")) {
        json r = at(2 * n);
        out["refinement"] = {{"n", r["n"]}, {"C1", r["C1"]}, {"C2", r["C2"]}, {"A_star", r["A_star"]},
                             {"max_need_C1", r["max_need_C1"]}, {"corpus_hash", r["corpus_hash"]}};
    }
    return out;
}

// A values exercised by the run: A*, two interior points and A_min.
inline std::vector<double> linear_run_A(const json& lin, const OperatorParams& p) {
    const double m2s = std::pow(p.m, 2.0 * p.s);
    std::vector<double> A = {lin.at("A_star").get<double>(), -m2s - 1.0, -m2s - 10.0, lin.at("A_min").get<double>()};
    std::sort(A.begin(), A.end(), std::greater<>());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    return A;
}

// ---- positivity ----------------------------------------------------------

struct PositivityTemplate {
    double s;
    double m_factor;  // m = m_factor * alpha / R
    PsiProfile psi;
};

inline const std::vector<PositivityTemplate>& positivity_templates() {
    static const std::vector<PositivityTemplate> t = {
        {0.75, 0.0, PsiProfile::reciprocal(3.0)},
        {0.75, 2.0, PsiProfile::oscillating(2.5, 0.5, 1.0)},
        {0.6, 1.0, PsiProfile::reciprocal(3.0)},
        {0.9, 0.0, PsiProfile::oscillating(2.5, 0.5, 1.0)},
        {0.75, 2.0, PsiProfile::reciprocal(3.0)},
    };
    return t;
}

inline json positivity_config_json(const QuadraticWeight& w, const OperatorParams& p) {
    return {{"s", p.s}, {"m", p.m}, {"weight", w.to_json()}};
}

// Smallest alpha (R = 1, bisection in log alpha) at which the sweep is
// positive and the correction terms are dominated; c_cal = 0 there.
inline json positivity_threshold(const PositivityTemplate& tp, const PositivitySweepSpec& base) {
    auto ok = [&](double a, CheckReport* out) {
        QuadraticWeight w{a, 1.0, tp.psi, 1.0};
        OperatorParams p{tp.s, tp.m_factor * a, 1};
        auto spec = base;
        spec.c_cal = 0.0;
        spec.c_floor = 0.0;
        auto r = positivity_sweep(w, p, spec);
        if (out) *out = r;
        return r.pass;
    };
    double lo = 1.0, hi = 1.0;
    if (ok(lo, nullptr)) {
        while (ok(lo, nullptr) && lo > 1e-6) lo *= 0.5;
        hi = 2.0 * lo;
    } else {
        while (!ok(hi, nullptr)) {
            hi *= 2.0;
            if (hi > 1e12) throw CalibrationError("positivity calibration: no alpha makes the sweep pass");
        }
        lo = hi * 0.5;
    }
    for (int it = 0; it < 14; ++it) {
        const double mid = std::sqrt(lo * hi);
        (ok(mid, nullptr) ? hi : lo) = mid;
    }
    CheckReport r;
    ok(hi, &r);
    return {{"s", tp.s}, {"m_factor", tp.m_factor}, {"psi", tp.psi.to_json()}, {"alpha", hi},
            {"hypothesis_ratio", r.get("hypothesis_ratio")}, {"min_ratio", r.get("min_ratio")}};
}

// alpha (R = 1) placing the hypothesis ratio at q
inline double alpha_for_ratio(double q, const PositivityTemplate& tp) {
    QuadraticWeight w{1.0, 1.0, tp.psi, 1.0};
    return std::pow(q * psi_size(w) / tp.s, 1.0 / (2.0 * tp.s - 1.0));
}

inline json calibrate_positivity(int threads) {
    const auto& T = positivity_templates();
    const PositivitySweepSpec base;
    std::vector<json> thr(T.size());
    parallel_for(T.size(), threads, [&](std::size_t i) { thr[i] = positivity_threshold(T[i], base); });
    double qmax = 0.0;
    for (const auto& t : thr) qmax = std::max(qmax, t.at("hypothesis_ratio").get<double>());
    const double c_cal = round_up_sig(qmax, 2);

    std::vector<json> cfg(T.size());
    std::vector<double> mins(T.size());
    parallel_for(T.size(), threads, [&](std::size_t i) {
        const double a = alpha_for_ratio(1.5 * c_cal, T[i]);
        QuadraticWeight w{a, 1.0, T[i].psi, 1.0};
        OperatorParams p{T[i].s, T[i].m_factor * a, 1};
        auto spec = base;
        spec.c_cal = c_cal;
        const auto r = positivity_sweep(w, p, spec);
        mins[i] = r.get("min_ratio");
        cfg[i] = positivity_config_json(w, p);
        cfg[i]["min_ratio"] = mins[i];
    });
    const double c_floor = round_down_sig(*std::min_element(mins.begin(), mins.end()), 2);

    const auto& f = T[1];
    QuadraticWeight wf{1.0, 1.0, f.psi, 1.0};
    OperatorParams pf{f.s, f.m_factor * 1.0, 1};
    json out;
    out["c_cal"] = c_cal;
    out["c_floor"] = c_floor;
    out["dominance"] = base.dominance;
    out["thresholds"] = thr;
    out["configs"] = cfg;
    out["falsification"] = positivity_config_json(wf, pf);
    return out;
}

// ---- Garding -------------------------------------------------------------

inline json calibrate_garding(const json& positivity, int threads) {
    const auto& cfgs = positivity.at("configs");
    std::vector<json> out(cfgs.size());
    parallel_for(cfgs.size(), threads, [&](std::size_t i) {
        const auto& c = cfgs[i];
        const auto w = QuadraticWeight::from_json(c.at("weight"));
        const OperatorParams p{c.at("s").get<double>(), c.at("m").get<double>(), 1};
        const auto r = garding_hypothesis_check(w, p);
        out[i] = positivity_config_json(w, p);
        out[i]["measured"] = r.measured;
        out[i]["C_ref"] = round_up_sig(2.0 * r.measured, 2);
    });
    return {{"configs", out}};
}

// ---- quadratic Carleman --------------------------------------------------

struct QuadraticCase {
    CarlemanMode mode;
    double s;
    double m_factor;  // m = m_factor * alpha_ref / R
};

inline const std::vector<QuadraticCase>& quadratic_cases() {
    static const std::vector<QuadraticCase> c = {
        {CarlemanMode::elliptic, 0.5, 0.0},  {CarlemanMode::elliptic, 0.5, 2.0},
        {CarlemanMode::elliptic, 0.75, 0.0}, {CarlemanMode::elliptic, 0.75, 2.0},
        {CarlemanMode::parabolic, 0.75, 0.0}, {CarlemanMode::parabolic, 0.75, 2.0},
    };
    return c;
}

inline const std::vector<double>& quadratic_alpha_factors() {
    static const std::vector<double> f = {1.0, 1.5, 2.0};
    return f;
}

inline QuadraticWeight quadratic_case_weight(const RunConfig& c, const QuadraticCase& q, double alpha) {
    if (q.mode == CarlemanMode::elliptic) return {alpha, c.num("quadratic.R"), PsiProfile::constant(3.0), 1.0};
    return {alpha, c.num("quadratic.parabolic_R"), PsiProfile::oscillating(2.5, 0.5, 1.0), 1.0};
}

inline Grid quadratic_grid(const QuadraticWeight& w, std::size_t n) { return {6.0 * w.R, n}; }

// Fitted (c1, c2) per alpha factor and their minimum, on one grid.
inline json quadratic_fit(const RunConfig& c, const QuadraticCase& q, std::size_t n, const std::string& stream,
                          int count, int threads) {
    const double a0 = c.num("quadratic.alpha");
    const auto w0 = quadratic_case_weight(c, q, a0);
    const OperatorParams p{q.s, q.m_factor * a0 / w0.R, 1};
    const auto g = quadratic_grid(w0, n);
    const auto fam = annulus_family(g, w0, q.mode, c.seed(), stream, count, static_cast<int>(c.integer("quadratic.nt")));
    double c1 = INFINITY, c2 = INFINITY;
    json per = json::array();
    Fnv64 h;
    for (double fa : quadratic_alpha_factors()) {
        const auto w = quadratic_case_weight(c, q, fa * a0);
        const auto T = family_terms(fam, w, p, q.mode, threads);
        for (const auto& t : T) {
            if (t.leak > 1e-12) throw CalibrationError("quadratic calibration: family leaks outside the annulus");
            for (double v : {t.rhs, t.grad, t.mass}) h.add(v);
        }
        const auto [f1, f2] = fit_carleman_constants(T);
        per.push_back({{"alpha", w.alpha}, {"c1", f1}, {"c2", f2}});
        c1 = std::min(c1, f1);
        c2 = std::min(c2, f2);
    }
    return {{"n", n}, {"functions", count}, {"c1", c1}, {"c2", c2}, {"per_alpha", per}, {"terms_hash", h.hex()}};
}

// Half the span infimum of rhs/grad and rhs/mass, minimized over the alpha
// factors; the infimum is re-evaluated on its argmin to absorb Gram roundoff.
inline json quadratic_span_fit(const RunConfig& c, const QuadraticCase& q, std::size_t n, int threads) {
    const double a0 = c.num("quadratic.alpha");
    const int nt = static_cast<int>(c.integer("quadratic.nt"));
    const auto w0 = quadratic_case_weight(c, q, a0);
    const OperatorParams p{q.s, q.m_factor * a0 / w0.R, 1};
    const auto g = quadratic_grid(w0, n);
    double rg = INFINITY, rm = INFINITY;
    json per = json::array();
    Fnv64 h;
    for (double fa : quadratic_alpha_factors()) {
        const auto w = quadratic_case_weight(c, q, fa * a0);
        const auto S = annulus_span_minimum(g, w0, w, p, q.mode, nt, threads);
        const auto Tg = quadratic_carleman_terms(annulus_function(g, w0, q.mode, S.grad_argmin, nt), w, p, q.mode);
        const auto Tm = quadratic_carleman_terms(annulus_function(g, w0, q.mode, S.mass_argmin, nt), w, p, q.mode);
        const double g_ratio = std::min(S.grad_ratio, Tg.rhs / Tg.grad);
        const double m_ratio = std::min(S.mass_ratio, Tm.rhs / Tm.mass);
        if (!(g_ratio > 0.0 && m_ratio > 0.0))
            throw CalibrationError("quadratic calibration: span infimum is not positive",
                                   {{"mode", to_string(q.mode)}, {"s", q.s}, {"alpha", w.alpha}});
        per.push_back({{"alpha", w.alpha}, {"grad_ratio", g_ratio}, {"mass_ratio", m_ratio},
                       {"grad_argmin", S.grad_argmin}});
        h.add(g_ratio);
        h.add(m_ratio);
        rg = std::min(rg, g_ratio);
        rm = std::min(rm, m_ratio);
    }
    return {{"n", n}, {"dimension", annulus_span_indices(q.mode).size()}, {"c1", 0.5 * rg}, {"c2", 0.5 * rm},
            {"per_alpha", per}, {"hash", h.hex()}};
}

inline json calibrate_quadratic(const RunConfig& c, double c_pos, int threads) {
    const std::size_t n = static_cast<std::size_t>(c.integer("quadratic.n"));
    const int count = static_cast<int>(c.integer("quadratic.calibration_functions"));
    const double a0 = c.num("quadratic.alpha");
    json out = json::array();
    for (const auto& q : quadratic_cases()) {
        const auto w0 = quadratic_case_weight(c, q, a0);
        json e;
        e["mode"] = to_string(q.mode);
        e["s"] = q.s;
        e["m_factor"] = q.m_factor;
        e["m"] = q.m_factor * a0 / w0.R;
        e["weight"] = w0.to_json();
        e["alphas"] = json::array();
        for (double fa : quadratic_alpha_factors()) e["alphas"].push_back(fa * a0);
        const json span = quadratic_span_fit(c, q, n, threads);
        // sampled members lie in the span, so their fit can only be larger
        const json sample = quadratic_fit(c, q, n, "calibration", count, threads);
        for (const char* k : {"c1", "c2"})
            if (span.at(k).get<double>() > sample.at(k).get<double>() * (1.0 + 1e-9))
                throw CalibrationError("quadratic calibration: span infimum exceeds a sampled ratio",
                                       {{"mode", to_string(q.mode)}, {"s", q.s}, {"key", k}});
        e["n"] = n;
        e["c1"] = round_down_sig(span.at("c1").get<double>(), 2);
        e["c2"] = round_down_sig(span.at("c2").get<double>(), 2);
        e["C"] = round_down_sig(std::pow(a0, 4.0 * q.s - 1.0) / std::pow(w0.R, 4.0 * q.s), 3);
        e["c_pos"] = q.mode == CarlemanMode::parabolic ? c_pos : 0.0;
        e["span"] = span;
        e["sample"] = sample;
        if (c.flag("quadratic.refine")) {
            const json r = quadratic_span_fit(c, q, 2 * n, threads);
            e["refinement"] = {{"n", 2 * n},
                               {"c1", round_down_sig(r.at("c1").get<double>(), 2)},
                               {"c2", round_down_sig(r.at("c2").get<double>(), 2)},
                               {"hash", r.at("hash")}};
        }
        out.push_back(e);
    }
    return out;
}

// ---- full table ----------------------------------------------------------

inline json calibrate_all(const RunConfig& c, int threads) {
    json t;
    t["version"] = kCalibrationVersion;
    json cfg = json::object();
    for (const auto& [k, v] : c.values.items())
        if (k == "seed" || k.rfind("operator.", 0) == 0 || k.rfind("linear.", 0) == 0 || k.rfind("quadratic.", 0) == 0)
            cfg[k] = v;
    t["provenance"] = {{"seed", c.seed()}, {"config", cfg}};
    t["linear"] = calibrate_linear(c, threads);
    t["positivity"] = calibrate_positivity(threads);
    t["garding"] = calibrate_garding(t["positivity"], threads);
    t["quadratic"] = calibrate_quadratic(c, t["positivity"]["c_cal"].get<double>(), threads);
    t["provenance"]["corpus_hash"] = {{"linear", t["linear"]["corpus_hash"]}};
    json qh = json::array();
    for (const auto& q : t["quadratic"]) qh.push_back(q["sample"]["terms_hash"]);
    t["provenance"]["corpus_hash"]["quadratic"] = qh;
    t["provenance"]["grid"] = {{"linear", {{"L", c.num("linear.L")}, {"n", c.integer("linear.n")}}},
                               {"quadratic", {{"L_over_R", 6.0}, {"n", c.integer("quadratic.n")}}}};
    return t;
}

}  // namespace frel
