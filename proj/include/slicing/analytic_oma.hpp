#pragma once

#include <optional>
#include <vector>

#include "slicing/model_core.hpp"
#include "slicing/queue_markov.hpp"

namespace slicing {

// Arrivals per transmission window: entry 1 covers the T_int - n slots left in the
// generation period, later entries a full period each.
struct GenerationVector {
    std::vector<int> counts;
};

inline double broadband_success_oma(int K, int N, double eps1) { return binomial_tail(K, N, 1.0 - eps1); }

inline double broadband_throughput_oma(int K, int N, int T_int, double eps1)
{
    return broadband_success_oma(K, N, eps1) * (T_int - 1) * K / (static_cast<double>(T_int) * N);
}

inline double generation_prob_oma(const GenerationVector& g, int ell, int n, double alpha, int T_int)
{
    if (ell < 1 || static_cast<int>(g.counts.size()) != ell || n < 1 || n > T_int) return 0.0;
    double p = 1.0;
    for (int i = 0; i < ell; ++i) {
        int w = i == 0 ? T_int - n : T_int;
        int gi = g.counts[static_cast<std::size_t>(i)];
        if (gi < 0 || gi > w) return 0.0;
        p *= binomial_pmf(gi, w, alpha);
    }
    return p;
}

// Opportunity (1-based) at which a packet that found q packets queued is sent, replaying
// drop-oldest overflow window by window. nullopt if it is evicted or g is too short.
inline std::optional<int> tx_opportunity_index(const GenerationVector& g, int q, int Q)
{
    int ahead = std::min(q, Q - 1);
    int behind = 0;
    for (std::size_t l = 0; l < g.counts.size(); ++l) {
        int evict = std::max(ahead + 1 + behind + g.counts[l] - Q, 0);
        if (evict > ahead) return std::nullopt;
        ahead -= evict;
        behind += g.counts[l];
        if (ahead == 0) return static_cast<int>(l) + 1;
        --ahead;
    }
    return std::nullopt;
}

namespace detail {

// tx[l] = Pr[sent at opportunity l+1] for a packet generated n slots after a transmission
// that found q queued. Aggregates p_gen over the sets S_l by a DP on (ahead, behind).
inline std::vector<double> oma_tx_profile(int n, int q, int T_int, double alpha, int Q)
{
    std::vector<double> tx;
    std::vector<double> cur(static_cast<std::size_t>(Q * Q), 0.0), nxt(cur.size());
    auto at = [Q](int a, int b) { return static_cast<std::size_t>(a * Q + b); };
    cur[at(std::min(q, Q - 1), 0)] = 1.0;
    for (int l = 0;; ++l) {
        const int w = l == 0 ? T_int - n : T_int;
        std::vector<double> row = binomial_row(w, alpha);
        std::fill(nxt.begin(), nxt.end(), 0.0);
        double sent = 0.0, alive = 0.0;
        for (int a = 0; a < Q; ++a)
            for (int b = 0; a + 1 + b <= Q; ++b) {
                double m = cur[at(a, b)];
                if (m == 0.0) continue;
                for (int gi = 0; gi <= w; ++gi) {
                    int evict = std::max(a + 1 + b + gi - Q, 0);
                    if (evict > a) break;
                    int a2 = a - evict, b2 = b + gi;
                    double pm = m * row[static_cast<std::size_t>(gi)];
                    if (a2 == 0) {
                        sent += pm;
                    } else {
                        nxt[at(a2 - 1, b2)] += pm;
                        alive += pm;
                    }
                }
            }
        tx.push_back(sent);
        if (alive == 0.0) break;
        std::swap(cur, nxt);
    }
    return tx;
}

}  // namespace detail

// p_s2(n, q): success probability of a packet generated n slots after a transmission, q queued.
inline double conditioned_success_oma(int n, int q, int T_int, double alpha, double eps2, int Q)
{
    double s = 0.0;
    for (double v : detail::oma_tx_profile(n, q, T_int, alpha, Q)) s += v;
    return s * (1.0 - eps2);
}

struct OmaLrResult {
    DiscretePmf latency;  // unconditional; defect = loss probability
    double p_s2 = 0.0;
};

inline QueueDistribution oma_post_tx_stationary(int T_int, double alpha, int Q)
{
    return stationary_from_empty(oma_post_tx_matrix(T_int, alpha, Q));
}

inline OmaLrResult lr_kpis_oma(const AccessConfig& cfg, const TrafficModel& tm)
{
    const int T = cfg.T_int, Q = cfg.Q;
    QueueDistribution pi0 = oma_post_tx_stationary(T, tm.alpha, Q);
    std::vector<double> lat(static_cast<std::size_t>((Q + 1) * T), 0.0);
    for (int n = 1; n <= T; ++n) {
        QueueDistribution pin = slot_distribution(cfg, pi0, n - 1, tm.alpha);
        for (int q = 0; q <= Q; ++q) {
            double w = pin.probs[static_cast<std::size_t>(q)] / T;
            if (w == 0.0) continue;
            std::vector<double> tx = detail::oma_tx_profile(n, q, T, tm.alpha, Q);
            for (std::size_t l = 0; l < tx.size(); ++l)
                lat[static_cast<std::size_t>(T - n) + l * static_cast<std::size_t>(T)] += w * tx[l] * (1.0 - tm.eps2);
        }
    }
    while (!lat.empty() && lat.back() == 0.0) lat.pop_back();
    double s = 0.0;
    for (double v : lat) s += v;
    return {DiscretePmf::make(0, std::move(lat), std::max(0.0, 1.0 - s)), s};
}

// Delay from generation to the intermittent slot that sends it (Q = 1, preemption).
inline DiscretePmf oma_paoi_delay_pmf(int T_int, double alpha)
{
    if (alpha <= 0.0) return DiscretePmf::lost();
    const double norm = 1.0 - std::pow(1.0 - alpha, T_int);
    std::vector<double> m(static_cast<std::size_t>(T_int));
    for (int t = 0; t < T_int; ++t) m[static_cast<std::size_t>(t)] = alpha * std::pow(1.0 - alpha, t) / norm;
    return DiscretePmf::make(0, std::move(m), 0.0);
}

// Geometric number of periods between successful receptions, truncated at residual 1e-10 or 1e5 terms.
inline DiscretePmf oma_interarrival_pmf(int T_int, double alpha, double eps2)
{
    const double xi = (1.0 - std::pow(1.0 - alpha, T_int)) * (1.0 - eps2);
    if (xi <= 0.0) return DiscretePmf::lost();
    std::vector<double> m;
    double residual = 1.0, pj = xi;
    for (int j = 1; j <= 100000 && residual >= 1e-10; ++j) {
        if (j > 1) m.resize(m.size() + static_cast<std::size_t>(T_int - 1), 0.0);
        m.push_back(pj);
        residual -= pj;
        pj *= 1.0 - xi;
    }
    residual = std::max(residual, 0.0);
    DiscretePmf z{T_int, std::move(m), 0.0, residual};
    return z;
}

struct OmaPaoiResult {
    DiscretePmf delay;
    DiscretePmf interarrival;
    DiscretePmf paoi;
};

inline OmaPaoiResult paoi_kpis_oma(const AccessConfig& cfg, const TrafficModel& tm)
{
    OmaPaoiResult r;
    r.delay = oma_paoi_delay_pmf(cfg.T_int, tm.alpha);
    r.interarrival = oma_interarrival_pmf(cfg.T_int, tm.alpha, tm.eps2);
    if (r.delay.masses.empty() || r.interarrival.masses.empty()) {
        r.paoi = DiscretePmf::lost();
        return r;
    }
    r.paoi = DiscretePmf{r.delay.offset + r.interarrival.offset, convolve(r.delay.masses, r.interarrival.masses), 0.0,
                         r.interarrival.truncated};
    return r;
}

}  // namespace slicing
