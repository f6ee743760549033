#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "spm/core.hpp"
#include "spm/density.hpp"

namespace spm {

struct AnnealConfig {
    long T_term = 1000;
    double kappa0 = 1.0;
    int cycles = 1;
};

struct MCConfig {
    int N = 50;
    PotentialParams params;
    double beta_D = 1.0;
    double eps = 0.1;
    std::uint64_t seed = 1;
    long sweeps = 1000;
    long burn_in = 100;
    int thin = 1;
    std::optional<AnnealConfig> anneal;
    // E = sum V - sum_{i != j} ln|x_i - x_j| instead of the N/2-scaled form.
    bool raw_energy = false;

    void validate() const;
};

struct EnsembleState {
    std::vector<double> x;
    double energy = 0.0;
    int n_left = 0;  // particles with x < a
};

// E_N = (N/2) sum V(x_i) - sum_{i<j} ln|x_i - x_j|
double energy(const std::vector<double>& x, const MCConfig& config);
EnsembleState make_state(std::vector<double> x, const MCConfig& config);

struct PairMove {
    int i = 0, j = 0;
    double delta = 0.0;
};

using Rng = std::mt19937_64;

PairMove propose_pair_move(int N, double eps, Rng& rng);

// Energy change of x_i += delta, x_j -= delta; +inf when a particle lands on the pole
// or within 1e-14 of another.
double delta_energy(const std::vector<double>& x, const PairMove& move, const MCConfig& config);

// One Metropolis step at inverse temperature beta_D. `cap`, when set, replaces dE by
// min(dE, cap) in the acceptance test.
bool metropolis_step(EnsembleState& state, const MCConfig& config, Rng& rng, double eps,
                     std::optional<double> cap = std::nullopt,
                     const std::function<bool(const PairMove&, const std::vector<double>&)>& veto = {});

struct Histogram {
    std::vector<double> edges;
    std::vector<long long> counts;
    long long total = 0;    // in-range samples
    long long outside = 0;  // samples beyond the outer edges

    static Histogram uniform(double lo, double hi, int bins);
    void add(double x);
    void merge(const Histogram& other);
};

// Histogram range covering a density's support with a margin.
Histogram histogram_for(const DensityFn& rho, int bins = 80);

struct Summary {
    double mean = 0.0, min = 0.0, max = 0.0, last = 0.0;
    long count = 0;
};

struct RunResult {
    EnsembleState final_state;
    Histogram histogram;
    double acceptance = 0.0;  // sampling phase
    double eps_final = 0.0;
    std::vector<double> acceptance_trace;  // per 100 burn-in steps
    Summary energy;
    Summary n_left;
    double max_sum_violation = 0.0;
    double max_energy_drift = 0.0;
    long long steps = 0;
};

using SnapshotSink = std::function<void(long sweep, const std::vector<double>& x)>;

RunResult run(const MCConfig& config, EnsembleState init, Histogram histogram, const SnapshotSink& sink = {});

// Random zero-sum start: uniform on [-2, 2], shifted to zero mean.
EnsembleState random_start(const MCConfig& config, Rng& rng);

struct AnnealResult {
    EnsembleState best;
    double start_energy = 0.0;
    long long uphill_accepted = 0;
};
AnnealResult anneal(const MCConfig& config, Rng& rng);

struct ScanOptions {
    long relax_sweeps = 200;
    long measure_sweeps = 400;
};

struct ConditionalScan {
    int n_left_star = 0;
    std::vector<double> mean_energy;  // index N_l; +inf when infeasible
    std::vector<EnsembleState> relaxed;
};

// Zero-sum configuration with n_left particles at the quantiles of the density left of
// the pole and the rest right of it; nullopt if the zero-sum shift moves a particle
// across the pole.
std::optional<std::vector<double>> seeded_configuration(const DensityFn& rho, double a, int N, int n_left);

ConditionalScan conditional_energy_scan(const MCConfig& config, const DensityFn& rho,
                                        const ScanOptions& options = {});

struct ComparisonMetrics {
    double l1 = 0.0;
    double sup = 0.0;  // largest |empirical - analytic| bin-averaged density
    std::vector<double> cut_mass_empirical;
    std::vector<double> cut_mass_analytic;
    double outside_fraction = 0.0;
    bool support_warning = false;
};

// Exact mass of rho in [lo, hi].
double interval_mass(const DensityFn& rho, double lo, double hi);

ComparisonMetrics compare(const Histogram& h, const DensityFn& rho);
// Variant on fractional bin masses (sum 1 over bins and outside).
ComparisonMetrics compare_masses(const std::vector<double>& edges, const std::vector<double>& masses,
                                 double outside, const DensityFn& rho);

}  // namespace spm
