#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "frel/grid.hpp"

namespace frel {

namespace detail {

// The FFTW planner is not thread-safe; every plan is created under this lock.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// One r2c/c2r plan pair per transform length, built once and reused.
class FftPlans {
  public:
    struct Pair {
        std::size_t n = 0;
        double* real = nullptr;
        fftw_complex* spec = nullptr;
        fftw_plan fwd = nullptr;
        fftw_plan inv = nullptr;
        ~Pair() {
            if (fwd) fftw_destroy_plan(fwd);
            if (inv) fftw_destroy_plan(inv);
            if (real) fftw_free(real);
            if (spec) fftw_free(spec);
        }
    };

    static Pair& get(std::size_t n) {
        static FftPlans instance;
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto it = instance.plans_.find(n);
        if (it != instance.plans_.end()) return *it->second;
        auto p = std::make_unique<Pair>();
        p->n = n;
        p->real = fftw_alloc_real(n);
        p->spec = fftw_alloc_complex(n / 2 + 1);
        p->fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), p->real, p->spec, FFTW_ESTIMATE);
        p->inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), p->spec, p->real, FFTW_ESTIMATE);
        auto& ref = *p;
        instance.plans_.emplace(n, std::move(p));
        return ref;
    }

  private:
    std::map<std::size_t, std::unique_ptr<Pair>> plans_;
};

// Per-call aligned buffers; plans are shared, buffers are not, so transforms
// may run concurrently.
struct Buffers {
    double* real;
    fftw_complex* spec;
    explicit Buffers(std::size_t n) : real(fftw_alloc_real(n)), spec(fftw_alloc_complex(n / 2 + 1)) {}
    ~Buffers() {
        fftw_free(real);
        fftw_free(spec);
    }
    Buffers(const Buffers&) = delete;
    Buffers& operator=(const Buffers&) = delete;
};

}  // namespace detail

using Spectrum = std::vector<std::complex<double>>;

// Unnormalized forward DFT, modes k = 0..n/2.
inline Spectrum forward_dft(const GridFunction& f) {
    auto& p = detail::FftPlans::get(f.size());
    detail::Buffers b(f.size());
    std::memcpy(b.real, f.values.data(), f.size() * sizeof(double));
    fftw_execute_dft_r2c(p.fwd, b.real, b.spec);
    Spectrum out(f.size() / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {b.spec[k][0], b.spec[k][1]};
    return out;
}

// Inverse of forward_dft, including the 1/n factor.
inline GridFunction inverse_dft(const Grid& g, const Spectrum& c) {
    auto& p = detail::FftPlans::get(g.n);
    detail::Buffers b(g.n);
    for (std::size_t k = 0; k < c.size(); ++k) {
        b.spec[k][0] = c[k].real();
        b.spec[k][1] = c[k].imag();
    }
    // Nyquist and zero modes of a real signal are real.
    b.spec[0][1] = 0.0;
    b.spec[g.n / 2][1] = 0.0;
    fftw_execute_dft_c2r(p.inv, b.spec, b.real);
    GridFunction out(g);
    const double inv_n = 1.0 / static_cast<double>(g.n);
    for (std::size_t j = 0; j < g.n; ++j) out[j] = b.real[j] * inv_n;
    return out;
}

// Full complex backward transform sum_k c_k e^{+2 pi i j k / n}, no scaling.
inline std::vector<std::complex<double>> backward_dft_complex(const std::vector<std::complex<double>>& c) {
    const std::size_t n = c.size();
    static std::map<std::size_t, fftw_plan> plans;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        auto it = plans.find(n);
        if (it == plans.end()) {
            fftw_complex* a = fftw_alloc_complex(n);
            fftw_complex* b = fftw_alloc_complex(n);
            it = plans.emplace(n, fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_BACKWARD, FFTW_ESTIMATE)).first;
            fftw_free(a);
            fftw_free(b);
        }
        plan = it->second;
    }
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    for (std::size_t k = 0; k < n; ++k) {
        in[k][0] = c[k].real();
        in[k][1] = c[k].imag();
    }
    fftw_execute_dft(plan, in, out);
    std::vector<std::complex<double>> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = {out[j][0], out[j][1]};
    fftw_free(in);
    fftw_free(out);
    return r;
}

// Multiplies mode k by mult(xi_k). mult must be even in xi.
template <class M>
GridFunction apply_multiplier(const GridFunction& f, M&& mult) {
    auto c = forward_dft(f);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mult(f.grid.xi(k));
    return inverse_dft(f.grid, c);
}

// h * sum_j conj(F_j) G_j over all n modes, computed from half spectra.
template <class M>
double spectral_quadratic_form(const Spectrum& c, const Grid& g, M&& mult) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double w = (k == 0 || k == g.n / 2) ? 1.0 : 2.0;
        s += w * std::norm(c[k]) * mult(g.xi(k));
    }
    return s * g.h() / static_cast<double>(g.n);
}

}  // namespace frel
