#include "spm/coulomb_mc.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spm/errors.hpp"
#include "spm/parallel.hpp"

namespace spm {

namespace {

constexpr double kMinSeparation = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

double potential_weight(const MCConfig& c) { return c.raw_energy ? 1.0 : 0.5 * c.N; }
double log_weight(const MCConfig& c) { return c.raw_energy ? 2.0 : 1.0; }

int count_left(const std::vector<double>& x, double a) {
    return static_cast<int>(std::count_if(x.begin(), x.end(), [a](double v) { return v < a; }));
}

double total(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

void update_summary(Summary& s, double v) {
    if (s.count == 0) {
        s.min = s.max = v;
    } else {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    ++s.count;
    s.mean += (v - s.mean) / static_cast<double>(s.count);
    s.last = v;
}

// Sweeps with optional epsilon tuning, shared by run() and the conditional scan.
struct Sweeper {
    const MCConfig& config;
    EnsembleState& state;
    Rng& rng;
    double eps;
    std::function<bool(const PairMove&, const std::vector<double>&)> veto;
    long long accepted = 0, proposed = 0;
    long long since_check = 0;
    double max_drift = 0.0;
    std::vector<double>* trace = nullptr;

    void sweep(bool tune) {
        int window_acc = 0;
        for (int s = 0; s < config.N; ++s) {
            const bool acc = metropolis_step(state, config, rng, eps, std::nullopt, veto);
            ++proposed;
            if (acc) {
                ++accepted;
                ++window_acc;
                if (++since_check >= 10000) {
                    const double full = energy(state.x, config);
                    max_drift = std::max(max_drift, std::abs(full - state.energy));
                    state.energy = full;
                    since_check = 0;
                }
            }
            if (tune && proposed % 100 == 0) {
                // acceptance over the last 100 proposals; window_acc restarts each block
                tune_block(window_acc);
                window_acc = 0;
            }
        }
        if (tune) carry = window_acc;
    }

    int carry = 0;
    void tune_block(int window_acc) {
        const double acc = (window_acc + carry) / 100.0;
        carry = 0;
        eps *= std::exp(0.01 * (acc - 0.5));
        if (trace) trace->push_back(acc);
    }
};

}  // namespace

void MCConfig::validate() const {
    if (N < 2) throw ConfigError("N must be at least 2");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(beta_D > 0.0)) throw ConfigError("beta_D must be positive");
    if (sweeps < 0 || burn_in < 0) throw ConfigError("sweeps and burn_in must be non-negative");
    if (thin < 1) throw ConfigError("thin must be at least 1");
    params.validate();
    if (anneal) {
        if (anneal->kappa0 < 1.0 || anneal->kappa0 > 10.0) throw ConfigError("kappa0 must lie in [1, 10]");
        if (anneal->T_term < 1 || anneal->cycles < 1) throw ConfigError("T_term and cycles must be positive");
    }
}

double energy(const std::vector<double>& x, const MCConfig& config) {
    const std::size_t n = x.size();
    double v = 0.0;
    for (double xi : x) v += eval_potential(config.params, xi);
    double logs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::abs(x[i] - x[j]);
            if (d == 0.0) throw CoincidentParticles("two particles at the same position");
            logs += std::log(d);
        }
    }
    return potential_weight(config) * v - log_weight(config) * logs;
}

EnsembleState make_state(std::vector<double> x, const MCConfig& config) {
    EnsembleState s;
    s.energy = energy(x, config);
    s.n_left = count_left(x, config.params.a);
    s.x = std::move(x);
    return s;
}

PairMove propose_pair_move(int N, double eps, Rng& rng) {
    std::uniform_int_distribution<int> first(0, N - 1), second(0, N - 2);
    std::normal_distribution<double> step(0.0, eps);
    PairMove m;
    m.i = first(rng);
    m.j = second(rng);
    if (m.j >= m.i) ++m.j;
    m.delta = step(rng);
    return m;
}

double delta_energy(const std::vector<double>& x, const PairMove& mv, const MCConfig& config) {
    const double a = config.params.a;
    const double xi = x[mv.i], xj = x[mv.j];
    const double yi = xi + mv.delta, yj = xj - mv.delta;
    if (at_pole(a, yi) || at_pole(a, yj)) return kInf;
    if (std::abs(yi - yj) < kMinSeparation) return kInf;
    const double dv = eval_potential(config.params, yi) + eval_potential(config.params, yj) -
                      eval_potential(config.params, xi) - eval_potential(config.params, xj);
    // Logs of products of up to 8 ratios at a time.
    double logs = 0.0;
    double prod = 1.0;
    int in_chunk = 0;
    const int n = static_cast<int>(x.size());
    for (int k = 0; k < n; ++k) {
        if (k == mv.i || k == mv.j) continue;
        const double di = yi - x[k], dj = yj - x[k];
        if (std::abs(di) < kMinSeparation || std::abs(dj) < kMinSeparation) return kInf;
        prod *= (di / (xi - x[k])) * (dj / (xj - x[k]));
        if (++in_chunk == 8) {
            logs += std::log(std::abs(prod));
            prod = 1.0;
            in_chunk = 0;
        }
    }
    logs += std::log(std::abs(prod));
    logs += std::log(std::abs(yi - yj)) - std::log(std::abs(xi - xj));
    const double de = potential_weight(config) * dv - log_weight(config) * logs;
    return std::isnan(de) ? kInf : de;
}

bool metropolis_step(EnsembleState& state, const MCConfig& config, Rng& rng, double eps, std::optional<double> cap,
                     const std::function<bool(const PairMove&, const std::vector<double>&)>& veto) {
    const PairMove mv = propose_pair_move(config.N, eps, rng);
    if (veto && veto(mv, state.x)) return false;
    const double de = delta_energy(state.x, mv, config);
    if (!std::isfinite(de)) return false;
    const double eff = cap ? std::min(de, *cap) : de;
    if (eff > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (!(u(rng) < std::exp(-config.beta_D * eff))) return false;
    }
    const double a = config.params.a;
    double& xi = state.x[mv.i];
    double& xj = state.x[mv.j];
    state.n_left -= (xi < a) + (xj < a);
    xi += mv.delta;
    xj -= mv.delta;
    state.n_left += (xi < a) + (xj < a);
    state.energy += de;
    return true;
}

Histogram Histogram::uniform(double lo, double hi, int bins) {
    if (!(hi > lo) || bins < 1) throw ConfigError("histogram needs hi > lo and at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * k / bins;
    h.counts.assign(bins, 0);
    return h;
}

void Histogram::add(double x) {
    if (!(x >= edges.front() && x < edges.back())) {
        ++outside;
        return;
    }
    const double w = (edges.back() - edges.front()) / static_cast<double>(counts.size());
    auto k = static_cast<std::size_t>((x - edges.front()) / w);
    k = std::min(k, counts.size() - 1);
    ++counts[k];
    ++total;
}

void Histogram::merge(const Histogram& o) {
    if (o.edges != edges) throw ConfigError("histograms with different bins cannot be merged");
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
    total += o.total;
    outside += o.outside;
}

Histogram histogram_for(const DensityFn& rho, int bins) {
    const double lo = rho.cuts().front().lo, hi = rho.cuts().back().hi;
    const double margin = 0.1 * (hi - lo);
    return Histogram::uniform(lo - margin, hi + margin, bins);
}

RunResult run(const MCConfig& config, EnsembleState init, Histogram histogram, const SnapshotSink& sink) {
    config.validate();
    if (static_cast<int>(init.x.size()) != config.N) throw ConfigError("initial state has the wrong size");
    Rng rng(config.seed);
    RunResult res;
    res.final_state = make_state(init.x, config);
    EnsembleState& state = res.final_state;
    Sweeper sw{config, state, rng, config.eps, {}};
    sw.trace = &res.acceptance_trace;
    for (long s = 0; s < config.burn_in; ++s) sw.sweep(true);
    const long long acc0 = sw.accepted, prop0 = sw.proposed;
    res.histogram = std::move(histogram);
    for (long s = 1; s <= config.sweeps; ++s) {
        sw.sweep(false);
        if (s % config.thin != 0) continue;
        for (double v : state.x) res.histogram.add(v);
        update_summary(res.energy, state.energy);
        update_summary(res.n_left, state.n_left);
        res.max_sum_violation = std::max(res.max_sum_violation, std::abs(total(state.x)));
        if (sink) sink(s, state.x);
    }
    const long long prop = sw.proposed - prop0;
    res.acceptance = prop > 0 ? static_cast<double>(sw.accepted - acc0) / static_cast<double>(prop) : 0.0;
    res.eps_final = sw.eps;
    res.max_energy_drift = std::max(sw.max_drift, std::abs(energy(state.x, config) - state.energy));
    res.steps = sw.proposed;
    return res;
}

EnsembleState random_start(const MCConfig& config, Rng& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> x(config.N);
        for (double& v : x) v = u(rng);
        const double mean = total(x) / config.N;
        for (double& v : x) v -= mean;
        std::vector<double> sorted = x;
        std::sort(sorted.begin(), sorted.end());
        bool ok = true;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            if (at_pole(config.params.a, sorted[k])) ok = false;
            if (k > 0 && sorted[k] - sorted[k - 1] < kMinSeparation) ok = false;
        }
        if (ok) return make_state(std::move(x), config);
    }
    throw NoConvergence("could not draw a valid random start", kInf);
}

AnnealResult anneal(const MCConfig& config, Rng& rng) {
    config.validate();
    if (!config.anneal) throw ConfigError("annealing settings missing");
    const AnnealConfig& an = *config.anneal;
    AnnealResult res;
    EnsembleState state = random_start(config, rng);
    res.start_energy = state.energy;
    res.best = state;
    for (int c = 0; c < an.cycles; ++c) {
        for (long t = 1; t <= an.T_term; ++t) {
            const double cap = an.kappa0 * static_cast<double>(t) / static_cast<double>(an.T_term);
            const double before = state.energy;
            if (metropolis_step(state, config, rng, config.eps, cap)) {
                if (state.energy > before) ++res.uphill_accepted;
                if (state.energy < res.best.energy) res.best = state;
            }
        }
    }
    res.best = make_state(res.best.x, config);
    return res;
}

double interval_mass(const DensityFn& rho, double lo, double hi) {
    double m = 0.0;
    for (std::size_t k = 0; k < rho.cuts().size(); ++k) {
        const Cut& c = rho.cuts()[k];
        const double l = std::max(lo, c.lo), h = std::min(hi, c.hi);
        if (!(h > l)) continue;
        const double hw = c.half_width();
        auto theta = [&](double x) { return std::acos(std::clamp((x - c.mid()) / hw, -1.0, 1.0)); };
        // x = mid + hw cos(theta), rho dx = hw^2 h(x) sin^2(theta) dtheta
        auto f = [&](double th) {
            const double s = std::sin(th);
            return hw * hw * rho.smooth(c.mid() + hw * std::cos(th), k) * s * s;
        };
        m += boost::math::quadrature::gauss<double, 30>::integrate(f, theta(h), theta(l));
    }
    return m;
}

std::optional<std::vector<double>> seeded_configuration(const DensityFn& rho, double a, int N, int n_left) {
    std::vector<double> x;
    x.reserve(N);
    auto place = [&](double lo, double hi, int n, bool left) {
        if (n == 0) return;
        const double mass = interval_mass(rho, lo, hi);
        if (!(mass > 1e-12)) {
            for (int k = 0; k < n; ++k) x.push_back(left ? a - 0.5 - 0.1 * k : a + 0.5 + 0.1 * k);
            return;
        }
        for (int k = 0; k < n; ++k) {
            const double q = (k + 0.5) / n * mass;
            double l = lo, h = hi;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (l + h);
                (interval_mass(rho, lo, mid) < q ? l : h) = mid;
            }
            x.push_back(0.5 * (l + h));
        }
    };
    const double lo = rho.cuts().front().lo, hi = rho.cuts().back().hi;
    place(std::min(lo, a), a, n_left, true);
    place(a, std::max(hi, a), N - n_left, false);
    const double mean = total(x) / N;
    for (int k = 0; k < N; ++k) {
        const bool was_left = k < n_left;
        x[k] -= mean;
        if ((x[k] < a) != was_left || at_pole(a, x[k])) return std::nullopt;
    }
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k < N; ++k) {
        if (sorted[k] - sorted[k - 1] < kMinSeparation) return std::nullopt;
    }
    return x;
}

ConditionalScan conditional_energy_scan(const MCConfig& config, const DensityFn& rho, const ScanOptions& options) {
    config.validate();
    const int N = config.N;
    const double a = config.params.a;
    ConditionalScan scan;
    scan.mean_energy.assign(N + 1, kInf);
    scan.relaxed.resize(N + 1);
    auto same_side = [a](const PairMove& mv, const std::vector<double>& x) {
        const double yi = x[mv.i] + mv.delta, yj = x[mv.j] - mv.delta;
        return (yi < a) != (x[mv.i] < a) || (yj < a) != (x[mv.j] < a);
    };
    parallel_for(static_cast<std::size_t>(N + 1), [&](std::size_t nl) {
        auto x = seeded_configuration(rho, a, N, static_cast<int>(nl));
        if (!x) return;
        std::seed_seq seq{static_cast<std::uint64_t>(config.seed), static_cast<std::uint64_t>(nl)};
        Rng rng(seq);
        EnsembleState state = make_state(std::move(*x), config);
        Sweeper sw{config, state, rng, config.eps, same_side};
        for (long s = 0; s < options.relax_sweeps; ++s) sw.sweep(true);
        Summary e;
        for (long s = 0; s < options.measure_sweeps; ++s) {
            sw.sweep(false);
            update_summary(e, state.energy);
        }
        scan.mean_energy[nl] = options.measure_sweeps > 0 ? e.mean : state.energy;
        scan.relaxed[nl] = make_state(state.x, config);
    });
    const auto best = std::min_element(scan.mean_energy.begin(), scan.mean_energy.end());
    if (!std::isfinite(*best)) throw NoConvergence("no feasible N_l in the conditional scan", kInf);
    scan.n_left_star = static_cast<int>(best - scan.mean_energy.begin());
    return scan;
}

ComparisonMetrics compare_masses(const std::vector<double>& edges, const std::vector<double>& masses, double outside,
                                 const DensityFn& rho) {
    ComparisonMetrics m;
    double inside_exact = 0.0;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const double exact = interval_mass(rho, edges[b], edges[b + 1]);
        inside_exact += exact;
        const double diff = std::abs(masses[b] - exact);
        m.l1 += diff;
        m.sup = std::max(m.sup, diff / (edges[b + 1] - edges[b]));
    }
    m.l1 += outside + std::max(0.0, 1.0 - inside_exact);
    m.outside_fraction = outside;
    for (std::size_t k = 0; k < rho.cuts().size(); ++k) {
        const Cut& c = rho.cuts()[k];
        m.cut_mass_analytic.push_back(interval_mass(rho, c.lo, c.hi));
        double emp = 0.0;
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            const double mid = 0.5 * (edges[b] + edges[b + 1]);
            // Bins are assigned to the nearest cut.
            std::size_t nearest = 0;
            double best = kInf;
            for (std::size_t j = 0; j < rho.cuts().size(); ++j) {
                const Cut& cj = rho.cuts()[j];
                const double d = mid < cj.lo ? cj.lo - mid : (mid > cj.hi ? mid - cj.hi : 0.0);
                if (d < best) {
                    best = d;
                    nearest = j;
                }
            }
            if (nearest == k) emp += masses[b];
        }
        m.cut_mass_empirical.push_back(emp);
    }
    // Mass beyond the support inflated by three bin widths.
    const double w = edges.size() > 1 ? edges[1] - edges[0] : 0.0;
    double stray = outside;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const double mid = 0.5 * (edges[b] + edges[b + 1]);
        bool near = false;
        for (const Cut& c : rho.cuts()) near = near || (mid >= c.lo - 3.0 * w && mid <= c.hi + 3.0 * w);
        if (!near) stray += masses[b];
    }
    m.support_warning = stray > 0.01;
    return m;
}

ComparisonMetrics compare(const Histogram& h, const DensityFn& rho) {
    const double n = static_cast<double>(h.total + h.outside);
    if (!(n > 0.0)) throw ConfigError("empty histogram");
    std::vector<double> masses(h.counts.size());
    for (std::size_t b = 0; b < masses.size(); ++b) masses[b] = static_cast<double>(h.counts[b]) / n;
    return compare_masses(h.edges, masses, static_cast<double>(h.outside) / n, rho);
}

}  // namespace spm
