#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "slicing/analytic_oma.hpp"
#include "slicing/analytic_pnoma.hpp"
#include "slicing/model_core.hpp"
#include "slicing/simulator.hpp"

namespace slicing {

enum class KpiKind { LR90, PAoI90 };

struct AnalyzeOptions {
    bool lr = true;
    bool paoi = true;
    double percentile = 0.9;
};

inline KpiReport analyze(AccessConfig cfg, const TrafficModel& tm, const AnalyzeOptions& opt = {})
{
    if (cfg.scheme == Scheme::NOMA) cfg.M = cfg.N;
    cfg.validate();
    tm.validate();
    KpiReport r;
    if (cfg.scheme == Scheme::OMA) {
        r.p_s1 = broadband_success_oma(cfg.K, cfg.N, tm.eps1);
        r.s1 = broadband_throughput_oma(cfg.K, cfg.N, cfg.T_int, tm.eps1);
        if (opt.lr) {
            OmaLrResult lr = lr_kpis_oma(cfg, tm);
            r.latency = lr.latency;
            r.p_s2 = lr.p_s2;
        }
        if (opt.paoi && cfg.Q == 1) {
            r.paoi = paoi_kpis_oma(cfg, tm).paoi;
            r.has_paoi = true;
        }
    } else {
        if (opt.lr) {
            PnomaLrResult lr = lr_kpis_pnoma(cfg, tm);
            r.latency = lr.latency;
            r.p_s2 = lr.p_s2;
            r.p_s1 = lr.p_s1;
            r.s1 = lr.s1;
        } else {
            r.p_s1 = pnoma_broadband_success(cfg, tm, pnoma_queue_profile(cfg.N, cfg.M, tm.alpha, cfg.Q));
            r.s1 = broadband_throughput_lr(cfg.K, cfg.N, r.p_s1);
        }
        if (opt.paoi && cfg.Q == 1) {
            r.paoi = paoi_pmf_pnoma(cfg, tm);
            r.has_paoi = true;
        }
    }
    if (opt.lr) r.l90 = pmf_percentile(r.latency, opt.percentile);
    if (r.has_paoi) r.d90 = pmf_percentile(r.paoi, opt.percentile);
    return r;
}

struct SweepBounds {
    int K_min = 2, K_max = 64;
    int N_max_factor = 2;  // N <= factor * K
    int T_min = 2, T_max = 64;
    int M_min = 1, M_max = 1 << 20;
    std::vector<int> Q_values{1, 4};

    static SweepBounds table_defaults(KpiKind kpi)
    {
        SweepBounds b;
        if (kpi == KpiKind::PAoI90) b.Q_values = {1};
        return b;
    }
};

// Lazy enumeration in canonical order K, N, (T_int | M), Q.
class ConfigEnumerator {
public:
    ConfigEnumerator(Scheme scheme, SweepBounds b) : scheme_(scheme), b_(std::move(b))
    {
        if (b_.K_min < 1 || b_.K_min > b_.K_max || b_.Q_values.empty() || b_.N_max_factor < 1)
            throw std::invalid_argument("enumerate_configs: empty range");
        if (scheme_ == Scheme::OMA && b_.T_min > b_.T_max) throw std::invalid_argument("enumerate_configs: empty range");
        K_ = b_.K_min;
        N_ = K_;
        inner_ = inner_lo();
        qi_ = 0;
        settle();
        if (done_) throw std::invalid_argument("enumerate_configs: empty range");
    }

    std::optional<AccessConfig> next()
    {
        if (done_) return std::nullopt;
        AccessConfig c;
        c.scheme = scheme_;
        c.K = K_;
        c.N = N_;
        c.Q = b_.Q_values[qi_];
        if (scheme_ == Scheme::OMA) {
            c.T_int = inner_;
            c.M = 0;
        } else if (scheme_ == Scheme::PNOMA) {
            c.M = inner_;
            c.T_int = 0;
        } else {
            c.M = N_;
            c.T_int = 0;
        }
        advance();
        settle();
        return c;
    }

    std::vector<AccessConfig> collect()
    {
        std::vector<AccessConfig> v;
        while (auto c = next()) v.push_back(*c);
        return v;
    }

private:
    int inner_lo() const
    {
        if (scheme_ == Scheme::OMA) return b_.T_min;
        if (scheme_ == Scheme::PNOMA) return b_.M_min;
        return 0;
    }
    int inner_hi() const
    {
        if (scheme_ == Scheme::OMA) return b_.T_max;
        if (scheme_ == Scheme::PNOMA) return std::min(b_.M_max, N_ - 1);
        return 0;
    }
    void advance()
    {
        if (++qi_ < b_.Q_values.size()) return;
        qi_ = 0;
        if (++inner_ <= inner_hi()) return;
        ++N_;
        if (N_ > b_.N_max_factor * K_) {
            ++K_;
            N_ = K_;
        }
        inner_ = inner_lo();
    }
    // Skip (K, N) pairs whose inner range is empty.
    void settle()
    {
        while (K_ <= b_.K_max && inner_ > inner_hi()) {
            ++N_;
            if (N_ > b_.N_max_factor * K_) {
                ++K_;
                N_ = K_;
            }
            inner_ = inner_lo();
        }
        if (K_ > b_.K_max) done_ = true;
    }

    Scheme scheme_;
    SweepBounds b_;
    int K_ = 0, N_ = 0, inner_ = 0;
    std::size_t qi_ = 0;
    bool done_ = false;
};

inline std::vector<AccessConfig> enumerate_configs(Scheme scheme, const SweepBounds& b) { return ConfigEnumerator(scheme, b).collect(); }

struct ParetoPoint {
    AccessConfig config;
    double s1 = 0.0;
    std::int64_t tau2 = 0;
};

// Points not strictly dominated (strictly higher s1 and strictly lower tau2), sorted by s1.
inline std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& pts)
{
    constexpr double tol = 1e-12;
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pts[a].s1 > pts[b].s1; });
    std::vector<std::size_t> keep;
    std::size_t j = 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i : idx) {
        while (j < idx.size() && pts[idx[j]].s1 > pts[i].s1 + tol) best = std::min(best, pts[idx[j++]].tau2);
        if (!(best < pts[i].tau2)) keep.push_back(i);
    }
    std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].s1 != pts[b].s1) return pts[a].s1 < pts[b].s1;
        if (pts[a].tau2 != pts[b].tau2) return pts[a].tau2 < pts[b].tau2;
        return a < b;
    });
    std::vector<ParetoPoint> out;
    for (std::size_t i : keep) out.push_back(pts[i]);
    return out;
}

// Broadband throughput only, with per-(K,N) binomial tails cached by the caller.
class ThroughputModel {
public:
    explicit ThroughputModel(const TrafficModel& tm) : tm_(tm) {}

    double s1(AccessConfig cfg)
    {
        if (cfg.scheme == Scheme::OMA) return broadband_throughput_oma(cfg.K, cfg.N, cfg.T_int, tm_.eps1);
        if (cfg.scheme == Scheme::NOMA) cfg.M = cfg.N;
        const int N = cfg.N, M = cfg.M, Q = cfg.Q;
        const auto& ph = phases(Q);
        TransitionMatrix frame{matrix_power(ph.reserved.p, N - M) * matrix_power(ph.mixed.p, M)};
        QueueDistribution piNM = propagate(stationary_from_empty(frame), matrix_power(ph.reserved.p, N - M));
        DiscretePmf tx = tx_count_pmf(M, piNM, tm_.alpha, M, Q);
        const std::vector<double>& tail = tails(cfg.K, N);
        double p = 0.0;
        for (int r2 = 0; r2 <= std::min(M, N - cfg.K); ++r2) p += tx.at(r2) * tail[static_cast<std::size_t>(r2)];
        return broadband_throughput_lr(cfg.K, N, p);
    }

private:
    const std::vector<double>& tails(int K, int N)
    {
        auto key = std::make_pair(K, N);
        auto it = tails_.find(key);
        if (it != tails_.end()) return it->second;
        std::vector<double> t(static_cast<std::size_t>(N - K) + 1);
        for (int r2 = 0; r2 <= N - K; ++r2) t[static_cast<std::size_t>(r2)] = binomial_tail(K, N - r2, 1.0 - tm_.eps1);
        return tails_.emplace(key, std::move(t)).first->second;
    }
    const PhaseMatrices& phases(int Q)
    {
        auto it = phases_.find(Q);
        if (it == phases_.end()) it = phases_.emplace(Q, pnoma_phase_matrices(tm_.alpha, Q)).first;
        return it->second;
    }

    TrafficModel tm_;
    std::map<std::pair<int, int>, std::vector<double>> tails_;
    std::map<int, PhaseMatrices> phases_;
};

struct SweepRow {
    AccessConfig config;
    KpiReport report;
    bool on_frontier = false;
};

inline std::optional<std::int64_t> timeliness(const KpiReport& r, KpiKind kpi) { return kpi == KpiKind::LR90 ? r.l90 : r.d90; }

inline AnalyzeOptions options_for(KpiKind kpi)
{
    AnalyzeOptions o;
    o.paoi = kpi == KpiKind::PAoI90;
    return o;
}

namespace detail {

// Evaluates f(i) for i in [0, n) on a small pool; results land at their own index.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex m;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            try {
                for (std::size_t i; (i = next++) < n;) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                err = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// OMA timeliness depends only on (T_int, Q); evaluate each pair once.
inline std::vector<KpiReport> evaluate_all(const std::vector<AccessConfig>& cfgs, const TrafficModel& tm, const AnalyzeOptions& opt,
                                           unsigned threads)
{
    std::vector<KpiReport> out(cfgs.size());
    std::map<std::pair<int, int>, std::size_t> oma_rep;
    std::vector<std::size_t> todo;
    std::vector<std::size_t> rep_of(cfgs.size(), SIZE_MAX);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        if (cfgs[i].scheme == Scheme::OMA) {
            auto key = std::make_pair(cfgs[i].T_int, cfgs[i].Q);
            auto it = oma_rep.find(key);
            if (it != oma_rep.end()) {
                rep_of[i] = it->second;
                continue;
            }
            oma_rep.emplace(key, i);
        }
        todo.push_back(i);
    }
    parallel_for(todo.size(), threads, [&](std::size_t j) { out[todo[j]] = analyze(cfgs[todo[j]], tm, opt); });
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        if (rep_of[i] == SIZE_MAX) continue;
        KpiReport r = out[rep_of[i]];
        r.p_s1 = broadband_success_oma(cfgs[i].K, cfgs[i].N, tm.eps1);
        r.s1 = broadband_throughput_oma(cfgs[i].K, cfgs[i].N, cfgs[i].T_int, tm.eps1);
        out[i] = std::move(r);
    }
    return out;
}

}  // namespace detail

inline std::vector<SweepRow> sweep(Scheme scheme, const TrafficModel& tm, KpiKind kpi, const SweepBounds& bounds,
                                   unsigned threads = std::thread::hardware_concurrency())
{
    std::vector<AccessConfig> cfgs = enumerate_configs(scheme, bounds);
    std::vector<KpiReport> reps = detail::evaluate_all(cfgs, tm, options_for(kpi), threads);
    std::vector<SweepRow> rows(cfgs.size());
    std::vector<ParetoPoint> pts;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        rows[i] = {cfgs[i], reps[i], false};
        if (auto t = timeliness(reps[i], kpi)) {
            pts.push_back({cfgs[i], reps[i].s1, *t});
            owner.push_back(i);
        }
    }
    for (const ParetoPoint& p : pareto_frontier(pts))
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (pts[j].config == p.config) rows[owner[j]].on_frontier = true;
    return rows;
}

struct OptimizeResult {
    bool feasible = false;
    AccessConfig config;
    KpiReport report;
    std::size_t enumerated = 0;
    std::size_t evaluated = 0;
};

// Strict preference between two feasible candidates with finite timeliness.
inline bool better_candidate(const AccessConfig& a, const KpiReport& ra, std::int64_t ta, const AccessConfig& b, const KpiReport& rb,
                             std::int64_t tb)
{
    constexpr double tol = 1e-12;
    if (ta != tb) return ta < tb;
    if (std::abs(ra.s1 - rb.s1) > tol) return ra.s1 > rb.s1;
    if (a.N != b.N) return a.N < b.N;
    if (a.K != b.K) return a.K < b.K;
    if (std::abs(ra.p_s2 - rb.p_s2) > tol) return ra.p_s2 > rb.p_s2;
    if (a.Q != b.Q) return a.Q < b.Q;
    if (a.M != b.M) return a.M < b.M;
    return a.T_int < b.T_int;
}

inline OptimizeResult optimize_config(Scheme scheme, const TrafficModel& tm, double s_min, KpiKind kpi,
                                      const SweepBounds& bounds, unsigned threads = std::thread::hardware_concurrency())
{
    OptimizeResult res;
    ThroughputModel thr(tm);
    std::vector<AccessConfig> feasible;
    ConfigEnumerator en(scheme, bounds);
    while (auto c = en.next()) {
        ++res.enumerated;
        if (thr.s1(*c) >= s_min - 1e-12) feasible.push_back(*c);
    }
    std::vector<KpiReport> reps = detail::evaluate_all(feasible, tm, options_for(kpi), threads);
    res.evaluated = feasible.size();
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        auto t = timeliness(reps[i], kpi);
        if (!t || reps[i].s1 < s_min - 1e-12) continue;
        if (!best || better_candidate(feasible[i], reps[i], *t, feasible[*best], reps[*best], *timeliness(reps[*best], kpi))) best = i;
    }
    if (!best) return res;
    res.feasible = true;
    res.config = feasible[*best];
    res.report = reps[*best];
    return res;
}

// Dedicated-channel FCFS queue: Bernoulli(alpha) arrivals, Bernoulli(1 - eps2) service starting
// the slot after arrival. Returns the q-percentile of the simulated peak AoI.
inline std::int64_t geo_geo1_paoi_baseline(double alpha, double eps2, double q, std::int64_t slots = 10'000'000,
                                           std::uint64_t seed = 0x5eed2024ULL)
{
    if (!(alpha > 0.0) || alpha >= 1.0 - eps2) throw std::domain_error("geo_geo1_paoi_baseline: unstable parameters (need 0 < alpha < 1 - eps2)");
    std::mt19937_64 rng(seed);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::deque<std::int64_t> queue;
    std::vector<std::int64_t> hist;
    std::int64_t last_gen = -1;
    for (std::int64_t t = 0; t < slots; ++t) {
        if (!queue.empty() && unit() >= eps2) {
            std::int64_t g = queue.front();
            queue.pop_front();
            if (last_gen >= 0) SimCounters::add_at(hist, t - last_gen);
            last_gen = g;
        }
        if (unit() < alpha) queue.push_back(t);
    }
    DiscretePmf p = detail::histogram_pmf(hist, 0);
    auto v = pmf_percentile(p, q);
    if (!v) throw std::runtime_error("geo_geo1_paoi_baseline: no samples");
    return *v;
}

}  // namespace slicing
