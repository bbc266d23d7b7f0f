#include "retq/quantum_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "retq/rng.hpp"

namespace retq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_index(int j, int k, const char* what) {
    if (j < 1 || j > k) throw std::out_of_range(std::string(what) + ": channel index outside 1..K");
}

Complex path_amplitude(const QuantumParams& params, int j) {
    return params.attention[static_cast<std::size_t>(j - 1)] *
           params.channels[static_cast<std::size_t>(j - 1)];
}

} // namespace

void QuantumParams::validate() const {
    if (attention.empty() || attention.size() != channels.size())
        throw std::invalid_argument("QuantumParams: attention and channels must be non-empty and equal-sized");
    double norm = 0.0;
    for (const Complex& psi : attention) norm += std::norm(psi);
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::invalid_argument("QuantumParams: attention amplitudes must have unit norm within 1e-12");
    for (const Complex& ch : channels)
        if (std::norm(ch) > 1.0 + 1e-12)
            throw std::invalid_argument("QuantumParams: channel amplitude magnitude above 1");
}

Complex total_amplitude(const QuantumParams& params, std::span<const int> active_set) {
    if (active_set.empty()) throw std::invalid_argument("total_amplitude: active set is empty");
    const int k = params.channel_count();
    Complex sum = 0.0;
    for (int j : active_set) {
        check_index(j, k, "total_amplitude");
        sum += path_amplitude(params, j);
    }
    return sum;
}

ProbabilityResult transfer_probability(const QuantumParams& params, std::span<const int> active_set) {
    const double value = std::norm(total_amplitude(params, active_set));
    return ProbabilityResult{value, value > 1.0};
}

double interference_term(const QuantumParams& params, int i, int j) {
    const int k = params.channel_count();
    check_index(i, k, "interference_term");
    check_index(j, k, "interference_term");
    if (i == j) throw std::invalid_argument("interference_term: i and j must differ");
    // 2*Re(conj(a_i)*a_j) == 2*|a_i a_j| cos(theta_ij)
    return 2.0 * std::real(std::conj(path_amplitude(params, i)) * path_amplitude(params, j));
}

Decomposition decompose(const QuantumParams& params, std::span<const int> active_set) {
    if (active_set.empty()) throw std::invalid_argument("decompose: active set is empty");
    const int k = params.channel_count();
    Decomposition out;
    for (int j : active_set) {
        check_index(j, k, "decompose");
        out.classical_part += std::norm(path_amplitude(params, j));
    }
    for (std::size_t a = 0; a < active_set.size(); ++a) {
        for (std::size_t b = a + 1; b < active_set.size(); ++b) {
            const int i = active_set[a];
            const int j = active_set[b];
            out.interference.push_back(InterferenceEntry{
                i, j,
                2.0 * std::real(std::conj(path_amplitude(params, i)) * path_amplitude(params, j))});
        }
    }
    return out;
}

double predict_quantum(const QuantumFit& fit, int n) {
    if (n < 1 || n > fit.channel_count)
        throw std::out_of_range("predict_quantum: n outside 1..K");
    const double rest = fit.channel_count > 1
                            ? (1.0 - fit.q1) / static_cast<double>(fit.channel_count - 1)
                            : 0.0;
    Complex z(std::sqrt(fit.q1 * fit.channel_prob), 0.0);
    const double step = std::sqrt(rest * fit.channel_prob);
    for (int j = 2; j <= n; ++j) {
        const double theta = fit.phases[static_cast<std::size_t>(j - 2)];
        z += step * Complex(std::cos(theta), std::sin(theta));
    }
    return std::norm(z);
}

QuantumParams fit_params(const QuantumFit& fit) {
    QuantumParams params;
    const int k = fit.channel_count;
    const double rest = k > 1 ? (1.0 - fit.q1) / static_cast<double>(k - 1) : 0.0;
    const double mag = std::sqrt(fit.channel_prob);
    params.attention.reserve(static_cast<std::size_t>(k));
    params.channels.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        params.attention.emplace_back(std::sqrt(j == 1 ? fit.q1 : rest), 0.0);
        const double theta = j == 1 ? 0.0 : fit.phases[static_cast<std::size_t>(j - 2)];
        params.channels.emplace_back(mag * std::cos(theta), mag * std::sin(theta));
    }
    return params;
}

namespace {

// Objective state shared by all starts of one fit.
struct FitProblem {
    std::vector<double> observed; // observed[n-1]; NaN when unpopulated
    int k = 0;                    // channel count == dimension count
    double anchor = 0.0;          // observed P(1)
    double p_lo = 0.0;            // lower bound on channel_prob
    double penalty = 0.0;

    // x = (channel_prob, theta_2..theta_K)
    double sse(std::span<const double> x, bool with_penalty) const {
        double pen = 0.0;
        double p = x[0];
        if (p < p_lo) {
            pen += penalty * (p_lo - p) * (p_lo - p);
            p = p_lo;
        }
        if (p > 1.0) {
            pen += penalty * (p - 1.0) * (p - 1.0);
            p = 1.0;
        }
        const double q1 = p > 0.0 ? std::min(anchor / p, 1.0) : 0.0;
        const double rest = k > 1 ? (1.0 - q1) / static_cast<double>(k - 1) : 0.0;
        const double step = std::sqrt(rest * p);
        Complex z(std::sqrt(q1 * p), 0.0);
        double total = 0.0;
        for (int n = 2; n <= k; ++n) {
            const double theta = x[static_cast<std::size_t>(n - 1)];
            z += step * Complex(std::cos(theta), std::sin(theta));
            const double pred = std::norm(z);
            if (pred > 1.0) pen += penalty * (pred - 1.0) * (pred - 1.0);
            const double y = observed[static_cast<std::size_t>(n - 1)];
            if (!std::isnan(y)) total += (pred - y) * (pred - y);
        }
        return with_penalty ? total + pen : total;
    }
};

struct StartResult {
    std::vector<double> x;
    double sse = 0.0;
    bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5) with a fixed evaluation budget.
StartResult nelder_mead(const FitProblem& problem, const std::vector<double>& x0,
                        std::span<const double> steps, int max_evals) {
    const std::size_t d = x0.size();
    std::vector<std::vector<double>> pts;
    pts.push_back(x0);
    for (std::size_t i = 0; i < d; ++i) {
        auto q = x0;
        q[i] += steps[i];
        pts.push_back(std::move(q));
    }
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i <= d; ++i) vals[i] = problem.sse(pts[i], true);
    int evals = static_cast<int>(d) + 1;

    bool converged = false;
    std::vector<std::size_t> order(d + 1);
    while (evals < max_evals) {
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        {
            std::vector<std::vector<double>> ptmp(d + 1);
            std::vector<double> vtmp(d + 1);
            for (std::size_t i = 0; i <= d; ++i) {
                ptmp[i] = std::move(pts[order[i]]);
                vtmp[i] = vals[order[i]];
            }
            pts = std::move(ptmp);
            vals = std::move(vtmp);
        }
        if (vals[d] - vals[0] < 1e-16) {
            converged = true;
            break;
        }
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k2 = 0; k2 < d; ++k2) centroid[k2] += pts[i][k2] / static_cast<double>(d);

        std::vector<double> xr(d);
        for (std::size_t k2 = 0; k2 < d; ++k2) xr[k2] = centroid[k2] + (centroid[k2] - pts[d][k2]);
        const double fr = problem.sse(xr, true);
        ++evals;
        if (fr < vals[0]) {
            std::vector<double> xe(d);
            for (std::size_t k2 = 0; k2 < d; ++k2) xe[k2] = centroid[k2] + 2.0 * (centroid[k2] - pts[d][k2]);
            const double fe = problem.sse(xe, true);
            ++evals;
            if (fe < fr) {
                pts[d] = std::move(xe);
                vals[d] = fe;
            } else {
                pts[d] = std::move(xr);
                vals[d] = fr;
            }
        } else if (fr < vals[d - 1]) {
            pts[d] = std::move(xr);
            vals[d] = fr;
        } else {
            std::vector<double> xc(d);
            for (std::size_t k2 = 0; k2 < d; ++k2) xc[k2] = centroid[k2] + 0.5 * (pts[d][k2] - centroid[k2]);
            const double fc = problem.sse(xc, true);
            ++evals;
            if (fc < vals[d]) {
                pts[d] = std::move(xc);
                vals[d] = fc;
            } else {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t k2 = 0; k2 < d; ++k2)
                        pts[i][k2] = pts[0][k2] + 0.5 * (pts[i][k2] - pts[0][k2]);
                    vals[i] = problem.sse(pts[i], true);
                    ++evals;
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (vals[i] < vals[best]) best = i;
    return StartResult{pts[best], problem.sse(pts[best], false), converged};
}

} // namespace

QuantumFit fit_quantum(const PatternStats& stats, const QuantumFitConfig& config) {
    if (!stats.populated(1))
        throw std::invalid_argument("fit_quantum: stats carry no n=1 pattern");
    if (stats.populated_count() < 2)
        throw std::invalid_argument("fit_quantum: need at least two populated channel counts");
    if (config.starts < 1 || config.max_evals < 1)
        throw std::invalid_argument("fit_quantum: starts and max_evals must be positive");
    for (int n = 1; n <= stats.n_max(); ++n) {
        const double y = stats.row(n).mean_probability;
        if (stats.populated(n) && !(y >= 0.0 && y <= 1.0))
            throw std::invalid_argument("fit_quantum: observed mean outside [0,1]");
    }

    int k = 0;
    for (int n = 1; n <= stats.n_max(); ++n)
        if (stats.populated(n)) k = n;

    FitProblem problem;
    problem.k = k;
    problem.anchor = stats.row(1).mean_probability;
    problem.p_lo = std::max(problem.anchor, 1e-9);
    problem.penalty = config.penalty;
    problem.observed.assign(static_cast<std::size_t>(k), std::nan(""));
    for (int n = 1; n <= k; ++n)
        if (stats.populated(n)) problem.observed[static_cast<std::size_t>(n - 1)] = stats.row(n).mean_probability;

    const std::size_t d = static_cast<std::size_t>(k); // channel_prob + (k-1) phases
    std::vector<double> steps(d, std::numbers::pi / 4.0);
    steps[0] = std::max(0.1 * (1.0 - problem.p_lo), 1e-6);

    const CounterRng rng(config.seed);
    auto run_start = [&](int s) {
        std::vector<double> x0(d);
        const std::uint64_t base = static_cast<std::uint64_t>(s) * d;
        x0[0] = problem.p_lo + rng.uniform(base) * (1.0 - problem.p_lo);
        for (std::size_t i = 1; i < d; ++i) x0[i] = rng.uniform(base + i) * kTwoPi;
        return nelder_mead(problem, x0, steps, config.max_evals);
    };

    std::vector<StartResult> results(static_cast<std::size_t>(config.starts));
    const int threads = std::min(std::max(config.threads, 1), config.starts);
    if (threads <= 1) {
        for (int s = 0; s < config.starts; ++s) results[static_cast<std::size_t>(s)] = run_start(s);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (int s = t; s < config.starts; s += threads)
                    results[static_cast<std::size_t>(s)] = run_start(s);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Winner by (residual, start index): deterministic under any scheduling.
    int win = 0;
    for (int s = 1; s < config.starts; ++s)
        if (results[static_cast<std::size_t>(s)].sse < results[static_cast<std::size_t>(win)].sse) win = s;
    const StartResult& best = results[static_cast<std::size_t>(win)];

    QuantumFit fit;
    fit.channel_count = k;
    fit.channel_prob = std::clamp(best.x[0], problem.p_lo, 1.0);
    fit.q1 = fit.channel_prob > 0.0 ? std::min(problem.anchor / fit.channel_prob, 1.0) : 0.0;
    fit.phases.resize(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        double theta = std::fmod(best.x[i], kTwoPi);
        if (theta < 0.0) theta += kTwoPi;
        if (theta >= kTwoPi) theta = 0.0; // -eps + 2*pi can round up to 2*pi
        fit.phases[i - 1] = theta;
    }
    fit.converged = best.converged;
    fit.winning_start = win;

    // Residual recomputed from the stored (wrapped, clamped) parameters so
    // the reported fields are self-consistent.
    fit.residual = 0.0;
    for (int n = 2; n <= k; ++n) {
        const double y = problem.observed[static_cast<std::size_t>(n - 1)];
        if (std::isnan(y)) continue;
        const double err = predict_quantum(fit, n) - y;
        fit.residual += err * err;
    }
    return fit;
}

} // namespace retq
