#pragma once

// Projection of infinite-pool default counts onto a basket of N_M names, and the
// Fourier transforms of the payoff kernels built on it.

#include <memory>
#include <utility>
#include <vector>

#include "cidx/model.hpp"

namespace cidx {

// p_jk = P(basket count = k | j pool defaults since the start state).
struct PoolMatrix {
    int n_names = 0;
    int start = 0;  // basket defaults already realized
    int j_max = 0;
    std::vector<double> p;  // row-major, (j_max+1) x (n_names+1)

    double at(int j, int k) const { return p[static_cast<size_t>(j) * (n_names + 1) + k]; }
    const double* row(int j) const { return p.data() + static_cast<size_t>(j) * (n_names + 1); }
};

PoolMatrix build_pool_matrix(int n_names, int j_max, int start_count = 0);

// Alternating-sum closed form; only usable for small baskets.
double closed_form_pjk(int n_names, int j, int k);

// Mean and variance of the basket count after j pool defaults, starting from zero.
std::pair<double, double> conditional_mean_var(int n_names, int j);

// Kernel f(j) and the transform of f(j) e^{delta j} on the grid p_k = 2 pi k / grid.
// spectrum[k] = sum_j f(j) e^{delta j} e^{-i p_k j}, k = 0..grid/2 (the conjugate of the
// transform with positive exponent, which is what the inversion sums need).
struct PayoffKernel {
    int n_names = 0;
    int grid = 0;
    double damping = 0.0;
    int j_max = 0;
    double limit = 0.0;  // f at a fully defaulted basket; the spectrum is that of f - limit
    std::vector<double> values;
    std::vector<cplx> spectrum;
};

// Damping applied to count-space inversions on a grid of the given size.
double count_damping(int grid);

// f(j) = E[(K - L)^+ | j pool defaults], K and L as fractions of basket notional.
// For a conditional start, start_count names have defaulted with realized_loss.
// j_max < 0 selects the smallest j beyond which f is within 1e-17 of its limit; the grid is enlarged
// to a power of two above 2 j_max when needed.
PayoffKernel kernel_ft_tranche(double K, int n_names, const JumpSizeLaw& law, int j_max, int grid,
                               int start_count = 0, double realized_loss = 0.0);

// g(j) = P(basket count < k | j pool defaults).
PayoffKernel kernel_ft_digital(int k, int n_names, int j_max, int grid, int start_count = 0);

// Process-wide cache; kernels depend on the basket and payoff only, never on model parameters.
std::shared_ptr<const PayoffKernel> cached_tranche_kernel(double K, int n_names, const JumpSizeLaw& law, int grid,
                                                          int start_count = 0, double realized_loss = 0.0);
std::shared_ptr<const PayoffKernel> cached_digital_kernel(int k, int n_names, int grid, int start_count = 0);

// Distribution of the basket loss (fraction of notional) after i additional defaults under a
// discrete jump-size law, on a grid of step l_min / 8 / n_names. Row i holds P(S_i = m * step).
struct ConvolutionTable {
    double step = 0.0;
    std::vector<std::vector<double>> rows;
};
ConvolutionTable loss_convolutions(const JumpSizeLaw& law, int n_names, int max_defaults);

}  // namespace cidx
