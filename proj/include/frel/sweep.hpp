#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "frel/heat_solver.hpp"
#include "frel/linear_carleman.hpp"
#include "frel/rng.hpp"
#include "frel/symbol_calculus.hpp"

namespace frel {

inline unsigned worker_count(int requested, std::size_t work) {
    unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, work)));
}

// Runs fn(i) for i in [0, count). Results must go to slot i so that output
// order never depends on scheduling. The exception of the lowest failing
// index is rethrown.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    if (count == 0) return;
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = worker_count(threads, count);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// x rounded away from zero / toward zero to `digits` significant digits.
inline double round_up_sig(double x, int digits = 2) {
    if (!(x > 0.0) || !std::isfinite(x)) return x;
    const double q = std::pow(10.0, std::floor(std::log10(x)) - digits + 1);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits + 1, std::ceil(x / q - 1e-9) * q);
    return std::stod(buf);
}

inline double round_down_sig(double x, int digits = 2) {
    if (!(x > 0.0) || !std::isfinite(x)) return x;
    const double q = std::pow(10.0, std::floor(std::log10(x)) - digits + 1);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits + 1, std::floor(x / q + 1e-9) * q);
    return std::stod(buf);
}

class Fnv64 {
  public:
    void add(const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ull;
        }
    }
    void add(double v) { add(&v, sizeof v); }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

  private:
    std::uint64_t h_ = 1469598103934665603ull;
};

// ---- linear corpus -------------------------------------------------------

struct LinearCorpusSpec {
    OperatorParams p;
    double lambda = 0.5;
    Grid grid{60.0, 1024};
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::string stream = "trajectory";
    int random = 50;  // V u forcing only
    int stress = 20;  // V u plus an additive source
};

// Trajectory i of the corpus; indices >= random carry a source of amplitude
// drawn from [2, 10].
inline Trajectory linear_trajectory(const LinearCorpusSpec& c, int i) {
    const bool stressed = i >= c.random;
    Rng r(split_seed(c.seed, "linear-carleman", c.stream + (stressed ? "-stress" : ""),
                     static_cast<std::uint64_t>(stressed ? i - c.random : i)));
    const auto u0 = random_band_limited(c.grid, r);
    const auto V = random_potential(r, r.uniform(0.2, 1.0));
    if (!stressed) return make_trajectory(u0, V, c.p, 1.0, c.dt);
    const auto S = random_source(r, r.uniform(2.0, 10.0));
    return make_trajectory(u0, V, c.p, 1.0, c.dt, &S);
}

inline std::vector<std::vector<SliceIntegrals>> linear_corpus(const LinearCorpusSpec& c, int threads) {
    std::vector<std::vector<SliceIntegrals>> out(static_cast<std::size_t>(c.random + c.stress));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = slice_integrals(linear_trajectory(c, static_cast<int>(i)), c.lambda, c.p);
    });
    return out;
}

inline std::string corpus_hash(const std::vector<std::vector<SliceIntegrals>>& corpus) {
    Fnv64 h;
    for (const auto& traj : corpus)
        for (const auto& s : traj)
            for (double v : {s.t, s.mass, s.uLu, s.ut2, s.Hs, s.H2s, s.F2, s.uF}) h.add(v);
    return h.hex();
}

// ---- quadratic families --------------------------------------------------

inline std::vector<SpaceTimeFunction> annulus_family(const Grid& g, const QuadraticWeight& w, CarlemanMode mode,
                                                     std::uint64_t seed, const std::string& stream, int count,
                                                     int nt) {
    std::vector<SpaceTimeFunction> fam;
    for (int i = 0; i < count; ++i) {
        Rng r(split_seed(seed, "quadratic-carleman", stream, static_cast<std::uint64_t>(i)));
        fam.push_back(random_annulus_function(g, w, mode, r, nt));
    }
    return fam;
}

inline std::vector<QuadraticCarlemanTerms> family_terms(const std::vector<SpaceTimeFunction>& fam,
                                                        const QuadraticWeight& w, const OperatorParams& p,
                                                        CarlemanMode mode, int threads) {
    std::vector<QuadraticCarlemanTerms> out(fam.size());
    parallel_for(fam.size(), threads, [&](std::size_t i) { out[i] = quadratic_carleman_terms(fam[i], w, p, mode); });
    return out;
}

// Exact infimum of rhs/grad and rhs/mass over the linear span of the annulus
// functions (b_0 coefficients dropped, they multiply zero). The three terms
// are quadratic forms in the coefficients; Gram matrices come from
// polarization and the infimum is the smallest generalized eigenvalue.
struct SpanMinimum {
    double grad_ratio = 0.0, mass_ratio = 0.0;
    std::vector<double> grad_argmin, mass_argmin;
    std::string terms_hash;
};

inline std::vector<std::size_t> annulus_span_indices(CarlemanMode mode) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < annulus_coefficient_count(mode); ++i)
        if (i % kProfileCoefficients != 1) idx.push_back(i);
    return idx;
}

inline SpanMinimum annulus_span_minimum(const Grid& g, const QuadraticWeight& family_weight, const QuadraticWeight& w,
                                        const OperatorParams& p, CarlemanMode mode, int nt, int threads) {
    const auto idx = annulus_span_indices(mode);
    const std::size_t d = idx.size(), full = annulus_coefficient_count(mode);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) pairs.emplace_back(i, j);
    std::vector<QuadraticCarlemanTerms> T(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        std::vector<double> coef(full, 0.0);
        coef[idx[pairs[k].first]] += 1.0;
        coef[idx[pairs[k].second]] += 1.0;
        T[k] = quadratic_carleman_terms(annulus_function(g, family_weight, mode, coef, nt), w, p, mode);
        if (T[k].leak > 1e-12) throw SupportViolation("annulus span element leaks outside K");
    });
    // (i, i) holds Q(2 e_i) = 4 Q(e_i)
    Eigen::MatrixXd R(d, d), G(d, d), M(d, d);
    Fnv64 h;
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j, ++k) {
            for (double v : {T[k].rhs, T[k].grad, T[k].mass}) h.add(v);
            if (i == j) {
                R(i, i) = 0.25 * T[k].rhs;
                G(i, i) = 0.25 * T[k].grad;
                M(i, i) = 0.25 * T[k].mass;
            }
        }
    k = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j, ++k)
            if (i != j) {
                R(i, j) = R(j, i) = 0.5 * (T[k].rhs - R(i, i) - R(j, j));
                G(i, j) = G(j, i) = 0.5 * (T[k].grad - G(i, i) - G(j, j));
                M(i, j) = M(j, i) = 0.5 * (T[k].mass - M(i, i) - M(j, j));
            }
    auto lowest = [&](const Eigen::MatrixXd& B, double& ratio, std::vector<double>& argmin) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(R, B);
        if (es.info() != Eigen::Success) throw std::runtime_error("annulus span: generalized eigenproblem failed");
        ratio = es.eigenvalues()(0);
        argmin.assign(full, 0.0);
        const Eigen::VectorXd v = es.eigenvectors().col(0) / es.eigenvectors().col(0).norm();
        for (std::size_t i = 0; i < d; ++i) argmin[idx[i]] = v(static_cast<Eigen::Index>(i));
    };
    SpanMinimum out;
    lowest(G, out.grad_ratio, out.grad_argmin);
    lowest(M, out.mass_ratio, out.mass_argmin);
    out.terms_hash = h.hex();
    return out;
}

}  // namespace frel
