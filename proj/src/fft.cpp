#include "cidx/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace cidx::fft {

namespace {

std::mutex g_plan_mutex;

enum class Kind { R2C, C2R, C2C_FWD, C2C_BWD };

fftw_plan get_plan(Kind kind, int n) {
    static std::map<std::pair<Kind, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(kind, n);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n);
    fftw_complex* c2 = fftw_alloc_complex(n);
    fftw_plan p = nullptr;
    switch (kind) {
        case Kind::R2C: p = fftw_plan_dft_r2c_1d(n, r, c, flags); break;
        case Kind::C2R: p = fftw_plan_dft_c2r_1d(n, c, r, flags); break;
        case Kind::C2C_FWD: p = fftw_plan_dft_1d(n, c, c2, FFTW_FORWARD, flags); break;
        case Kind::C2C_BWD: p = fftw_plan_dft_1d(n, c, c2, FFTW_BACKWARD, flags); break;
    }
    fftw_free(r);
    fftw_free(c);
    fftw_free(c2);
    plans.emplace(key, p);
    return p;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::vector<cplx> forward_real(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x);
    std::vector<cplx> out(n / 2 + 1);
    fftw_execute_dft_r2c(get_plan(Kind::R2C, n), in.data(), as_fftw(out.data()));
    return out;
}

std::vector<double> backward_real(const std::vector<cplx>& half, int n) {
    std::vector<cplx> in(half);  // c2r destroys its input
    std::vector<double> out(n);
    fftw_execute_dft_c2r(get_plan(Kind::C2R, n), as_fftw(in.data()), out.data());
    return out;
}

void complex_inplace(std::vector<cplx>& x, int sign) {
    const int n = static_cast<int>(x.size());
    std::vector<cplx> out(n);
    fftw_execute_dft(get_plan(sign < 0 ? Kind::C2C_FWD : Kind::C2C_BWD, n), as_fftw(x.data()), as_fftw(out.data()));
    x.swap(out);
}

}  // namespace cidx::fft
