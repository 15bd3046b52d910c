#include "cidx/pool.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "cidx/errors.hpp"
#include "cidx/fft.hpp"

namespace cidx {

namespace {

constexpr double kKernelTail = 1e-17;
constexpr int kMaxKernelJ = 1 << 20;

void step_row(std::vector<double>& r, int n) {
    const double inv = 1.0 / n;
    for (int k = n; k >= 1; --k) r[k] = k * inv * r[k] + (n - k + 1) * inv * r[k - 1];
    r[0] = 0.0;
}

int next_pow2(int x) {
    int p = 1;
    while (p < x) p <<= 1;
    return p;
}

// Builds f(j) = sum_k p_jk c_k until it vanishes (or up to a fixed j_max).
std::vector<double> kernel_values(int n, int start, const std::vector<double>& c, int j_max) {
    std::vector<double> r(n + 1, 0.0), f;
    r[start] = 1.0;
    for (int j = 0;; ++j) {
        double s = 0.0;
        for (int k = start; k <= n; ++k) s += r[k] * c[k];
        f.push_back(s);
        if (j_max >= 0 ? j >= j_max : (s - c[n] < kKernelTail && j > 0)) break;
        if (j >= kMaxKernelJ) fail(ErrorCode::NumericalQuality, "payoff kernel does not vanish");
        step_row(r, n);
    }
    return f;
}

PayoffKernel transform(std::vector<double> f, double limit, int n, int grid) {
    PayoffKernel out;
    out.n_names = n;
    out.limit = limit;
    out.j_max = static_cast<int>(f.size()) - 1;
    out.grid = std::max(next_pow2(grid), next_pow2(2 * (out.j_max + 1)));
    out.damping = count_damping(out.grid);
    std::vector<double> a(out.grid, 0.0);
    for (int j = 0; j <= out.j_max; ++j) a[j] = (f[j] - limit) * std::exp(out.damping * j);
    out.spectrum = fft::forward_real(a);
    out.values = std::move(f);
    return out;
}

}  // namespace

double count_damping(int grid) { return 16.0 / grid; }

PoolMatrix build_pool_matrix(int n_names, int j_max, int start_count) {
    require(n_names >= 1, "basket needs at least one name");
    require(j_max >= 0, "j_max must be nonnegative");
    require(start_count >= 0 && start_count <= n_names, "start count outside basket");
    PoolMatrix m;
    m.n_names = n_names;
    m.start = start_count;
    m.j_max = j_max;
    m.p.assign(static_cast<size_t>(j_max + 1) * (n_names + 1), 0.0);
    std::vector<double> r(n_names + 1, 0.0);
    r[start_count] = 1.0;
    for (int j = 0; j <= j_max; ++j) {
        std::copy(r.begin(), r.end(), m.p.begin() + static_cast<size_t>(j) * (n_names + 1));
        step_row(r, n_names);
    }
    return m;
}

double closed_form_pjk(int n_names, int j, int k) {
    if (n_names > 30) fail(ErrorCode::SizeTooLarge, "closed form limited to baskets of at most 30 names");
    require(n_names >= 1 && j >= 0 && k >= 0, "invalid closed-form indices");
    if (k > n_names || k > j) return 0.0;
    auto binom = [](int a, int b) {
        long double r = 1.0L;
        for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
        return r;
    };
    long double s = 0.0L;
    for (int l = 0; l <= k; ++l) {
        const long double term = binom(k, l) * std::pow(static_cast<long double>(l) / n_names, j);
        s += (l % 2 == 0) ? term : -term;
    }
    if (k % 2 == 1) s = -s;
    return static_cast<double>(binom(n_names, k) * s);
}

std::pair<double, double> conditional_mean_var(int n_names, int j) {
    require(n_names >= 1 && j >= 0, "invalid basket size or count");
    const double n = n_names;
    const double q1 = std::pow(1.0 - 1.0 / n, j);
    const double q2 = std::pow(1.0 - 2.0 / n, j);
    const double e = n * (1.0 - q1);
    double v = n * (q1 + (n - 1.0) * q2 - n * q1 * q1);
    if (j == 0) v = 0.0;
    return {e, std::max(v, 0.0)};
}

ConvolutionTable loss_convolutions(const JumpSizeLaw& law, int n_names, int max_defaults) {
    law.validate();
    ConvolutionTable t;
    const double h = law.min_loss() / 8.0;  // name units
    t.step = h / n_names;
    // One-jump distribution on the grid, splitting each atom between neighbours so the mean is kept.
    std::vector<double> one;
    for (const auto& pt : law.points) {
        const double x = pt.loss / h;
        const int lo = static_cast<int>(std::floor(x + 1e-12));
        const double frac = std::max(0.0, x - lo);
        if (static_cast<int>(one.size()) < lo + 2) one.resize(lo + 2, 0.0);
        one[lo] += pt.weight * (1.0 - frac);
        one[lo + 1] += pt.weight * frac;
    }
    t.rows.push_back({1.0});
    for (int i = 1; i <= max_defaults; ++i) {
        const auto& prev = t.rows.back();
        std::vector<double> next(prev.size() + one.size() - 1, 0.0);
        for (size_t a = 0; a < prev.size(); ++a) {
            if (prev[a] == 0.0) continue;
            for (size_t b = 0; b < one.size(); ++b) next[a + b] += prev[a] * one[b];
        }
        t.rows.push_back(std::move(next));
    }
    return t;
}

PayoffKernel kernel_ft_tranche(double K, int n_names, const JumpSizeLaw& law, int j_max, int grid, int start_count,
                               double realized_loss) {
    require(K >= 0.0, "strike must be nonnegative");
    require(start_count >= 0 && start_count <= n_names, "start count outside basket");
    const int remaining = n_names - start_count;
    const double room = K - realized_loss;
    if (room >= law.max_loss() * remaining / n_names)
        fail(ErrorCode::InvalidDetachment, "detachment reaches the end of the basket");
    std::vector<double> c(n_names + 1, 0.0);
    if (law.is_fixed()) {
        const double l1 = law.points[0].loss;
        for (int k = start_count; k <= n_names; ++k)
            c[k] = std::max(room - l1 * (k - start_count) / n_names, 0.0);
    } else {
        const auto table = loss_convolutions(law, n_names, remaining);
        for (int k = start_count; k <= n_names; ++k) {
            const auto& row = table.rows[k - start_count];
            double s = 0.0;
            for (size_t m = 0; m < row.size(); ++m) {
                const double pay = room - m * table.step;
                if (pay <= 0.0) break;
                s += row[m] * pay;
            }
            c[k] = s;
        }
    }
    return transform(kernel_values(n_names, start_count, c, j_max), c[n_names], n_names, grid);
}

PayoffKernel kernel_ft_digital(int k, int n_names, int j_max, int grid, int start_count) {
    if (k < 1 || k >= n_names) fail(ErrorCode::InvalidRank, "rank must satisfy 1 <= k < N_M");
    std::vector<double> c(n_names + 1, 0.0);
    for (int i = start_count; i < k; ++i) c[i] = 1.0;
    return transform(kernel_values(n_names, start_count, c, j_max), c[n_names], n_names, grid);
}

namespace {

std::string law_key(const JumpSizeLaw& law) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& p : law.points) os << p.loss << ':' << p.weight << ';';
    return os.str();
}

std::mutex g_cache_mutex;

}  // namespace

std::shared_ptr<const PayoffKernel> cached_tranche_kernel(double K, int n_names, const JumpSizeLaw& law, int grid,
                                                          int start_count, double realized_loss) {
    static std::map<std::tuple<double, int, std::string, int, int, double>, std::shared_ptr<const PayoffKernel>> cache;
    auto key = std::make_tuple(K, n_names, law_key(law), grid, start_count, realized_loss);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto k = std::make_shared<const PayoffKernel>(
        kernel_ft_tranche(K, n_names, law, -1, grid, start_count, realized_loss));
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return cache.emplace(key, k).first->second;
}

std::shared_ptr<const PayoffKernel> cached_digital_kernel(int k, int n_names, int grid, int start_count) {
    static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const PayoffKernel>> cache;
    auto key = std::make_tuple(k, n_names, grid, start_count);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto ker = std::make_shared<const PayoffKernel>(kernel_ft_digital(k, n_names, -1, grid, start_count));
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return cache.emplace(key, ker).first->second;
}

}  // namespace cidx
