#pragma once

// Large-pool approximation: the basket loss is the deterministic map
// L_T = L_M [1 - exp(-mu L~_T) 1{Q_T = 0}] of the infinite-pool loss.

#include <vector>

#include "cidx/affine.hpp"

namespace cidx {

struct LargePoolConsts {
    int n_names = 0;
    double loss_max = 0.0;  // L_M as a fraction of basket notional (mean jump size)
    double mu = 0.0;        // phi_J(-mu) = 1 - 1/N_M
    double lattice = 0.0;   // spacing of the lattice carrying L~ (0 when the law has none)
};

LargePoolConsts solve_mu(const JumpSizeLaw& law, int n_names);

// L_M [1 - E(exp(-mu L~_T) 1{Q_T=0})].
double lp_expected_loss(double T, const AffineModel& m, const LargePoolConsts& c);

enum class AuxLaw { Delta, Poisson };

struct LargePoolNumerics {
    int min_nodes = 256;
    int max_nodes = 1 << 22;
    double tol = 1e-13;  // change in the put when the node count doubles
};

// E[(K - L_T)^+]: explicit value under the auxiliary law plus the Fourier correction.
double lp_tranche_put(double T, double K, const AffineModel& m, const LargePoolConsts& c, AuxLaw aux = AuxLaw::Poisson,
                      const LargePoolNumerics& num = {});

// Several strikes at one horizon share the characteristic-function evaluations.
std::vector<double> lp_tranche_puts(double T, const std::vector<double>& strikes, const AffineModel& m,
                                    const LargePoolConsts& c, AuxLaw aux = AuxLaw::Poisson,
                                    const LargePoolNumerics& num = {});

// mu L_M e^{-i p K~} / (i p (i p - mu)), the kernel of the correction integral.
cplx correction_kernel(double p, double K_tilde, const LargePoolConsts& c);

}  // namespace cidx
