#pragma once

// Basket default-count and loss distributions by count-space Fourier inversion.

#include <vector>

#include "cidx/affine.hpp"
#include "cidx/pool.hpp"

namespace cidx {

struct Numerics {
    int count_grid = 4096;   // points on the p-grid over [-pi, pi]
    int lambda_grid = 1024;  // intensity grid for joint densities
    int threads = 1;
};

// State of the basket at time t. loss is a fraction of notional.
struct BasketState {
    double t = 0.0;
    int defaults = 0;
    double loss = 0.0;
    bool catastrophe = false;
    bool counterparty_default = false;
    double lambda = 0.0;

    static BasketState initial(const AffineModel& m) {
        BasketState s;
        s.lambda = m.initial_intensity();
        return s;
    }
};

// E_t[exp((i p_k - delta) (N~_T - N~_t)) 1{Q_T = 0} (1{R_T = 0} if ey = 0)], k = 0..grid/2.
std::vector<cplx> count_spectrum(const AffineModel& m, double t, double T, double lambda_t, int grid, double ey = 1.0);

// Grid large enough that the pool count increment over [t, T] stays well inside it.
int required_count_grid(const AffineModel& m, double t, double T, double lambda_t, int base_grid);

// E[(f - f_inf)(N~_T - N~_t) 1{Q_T = 0}] from a kernel spectrum and a count spectrum of the same grid.
double kernel_expectation(const PayoffKernel& k, const std::vector<cplx>& spectrum);

// E_t[N_T]; with counterparty_filter, E_t[N_T 1{R_T=0} + N_M 1{R_T>0}].
double expected_defaults(const BasketState& s, double T, const AffineModel& m, int n_names,
                         bool counterparty_filter = false);

// E_t[1{R_T = 0}] (1 when the counterparty is not modelled).
double counterparty_survival(const BasketState& s, double T, const AffineModel& m);

// E_t[L_T], and with the filter E_t[L_T 1{R_T=0}].
double expected_loss(const BasketState& s, double T, const AffineModel& m, int n_names,
                     bool counterparty_filter = false);

// P(N_T = k), k = 0..N_M. The catastrophe mass sits at k = N_M.
std::vector<double> default_count_distribution(const BasketState& s, double T, const AffineModel& m, int n_names,
                                               const Numerics& num = {});

// E_t[(K - L_T)^+] (times 1{R_T=0} with the filter), K and L as fractions of notional.
double tranche_put(const BasketState& s, double T, double K, const AffineModel& m, int n_names,
                   const Numerics& num = {}, bool counterparty_filter = false);

// P_t(N_T < k) (times 1{R_T=0} with the filter).
double digital_below(const BasketState& s, double T, int k, const AffineModel& m, int n_names,
                     const Numerics& num = {}, bool counterparty_filter = false);

struct PoolMoments {
    double mean = 0.0;
    double variance = 0.0;
};

// Mean and (order 2) variance of the infinite-pool loss L~_T in name units.
PoolMoments infinite_pool_moments(double T, const AffineModel& m, int order = 2);

}  // namespace cidx
