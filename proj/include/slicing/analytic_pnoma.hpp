#pragma once

#include <array>
#include <optional>
#include <vector>

#include "slicing/model_core.hpp"
#include "slicing/queue_markov.hpp"

namespace slicing {

// Frame slots are 1..N; slots N-M+1..N are mixed (mixed index 1..M).
// Arrivals come at the start of a slot; a mixed slot sends the queue head if the queue is non-empty.

struct PnomaQueueProfile {
    QueueDistribution frame_start;           // pi^(0)
    std::vector<QueueDistribution> after;    // after[n] = pi^(n), n = 0..N
};

inline PnomaQueueProfile pnoma_queue_profile(int N, int M, double alpha, int Q)
{
    PhaseMatrices ph = pnoma_phase_matrices(alpha, Q);
    TransitionMatrix frame = compose_frame_matrix(ph.reserved, ph.mixed, N, M);
    PnomaQueueProfile p;
    p.frame_start = stationary_from_empty(frame);
    p.after.push_back(p.frame_start);
    for (int n = 1; n <= N; ++n) p.after.push_back(propagate(p.after.back(), n <= N - M ? ph.reserved.p : ph.mixed.p));
    return p;
}

// Number of intermittent transmissions in the first d mixed slots given the queue law piNM
// before the mixed phase. The queue never grows while it is served, so the count is
// min(q + A, d), less one when a full queue loses its oldest packet to a slot-1 arrival.
inline DiscretePmf tx_count_pmf(int d, const QueueDistribution& piNM, double alpha, int M, int Q)
{
    if (d < 0 || d > M) throw std::out_of_range("tx_count_pmf: 0 <= d <= M required");
    std::vector<double> m(static_cast<std::size_t>(d) + 1, 0.0);
    if (d == 0) {
        m[0] = 1.0;
        return DiscretePmf::make(0, std::move(m), 0.0);
    }
    for (int q = 0; q <= Q; ++q) {
        double w = piNM.probs[static_cast<std::size_t>(q)];
        if (w == 0.0) continue;
        int window = q == Q ? d - 1 : d;
        for (int a = 0; a <= window; ++a) m[static_cast<std::size_t>(std::min(q + a, d))] += w * binomial_pmf(a, window, alpha);
    }
    return DiscretePmf::make(0, std::move(m), 0.0);
}

// The two-case transmission-count formula as printed; comparison only.
inline DiscretePmf tx_count_pmf_printed(int d, const QueueDistribution& piNM, double alpha, int M, int Q)
{
    std::vector<double> m(static_cast<std::size_t>(d) + 1, 0.0);
    for (int n = 0; n < d; ++n)
        for (int q = 0; q <= std::min(Q, n); ++q) m[static_cast<std::size_t>(n)] += piNM.probs[static_cast<std::size_t>(q)] * binomial_pmf(n - q, d, alpha);
    for (int q = 0; q <= Q; ++q)
        for (int a = d - q; a <= M; ++a) m[static_cast<std::size_t>(d)] += piNM.probs[static_cast<std::size_t>(q)] * binomial_pmf(a, d, alpha);
    return DiscretePmf{0, std::move(m), 0.0, 0.0};
}

inline double broadband_success_lr(int K, int N, int M, double eps1, const DiscretePmf& txPmf)
{
    double s = 0.0;
    for (int r2 = 0; r2 <= std::min(M, N - K); ++r2) s += txPmf.at(r2) * binomial_tail(K, N - r2, 1.0 - eps1);
    return s;
}

inline double broadband_throughput_lr(int K, int N, double p_s1) { return K * p_s1 / N; }

struct PnomaGenerationVector {
    std::vector<int> counts;  // 2*ell entries
};

// Window lengths of each generation-vector entry. Odd entries group the reserved slots with
// the first mixed slot (the only mixed slot whose arrival can overflow the queue); even
// entries cover the remaining mixed slots up to d (or to M in frames the packet survives).
inline std::vector<int> pnoma_generation_windows(int ell, int d, int n, int N, int M)
{
    std::vector<int> w;
    const int s = std::max(n - (N - M), 1);
    for (int k = 1; k <= ell; ++k) {
        int odd = k == 1 ? std::max(N - M - n + 1, 0) : N - M + 1;
        int first = k == 1 ? s : 1;
        int even = (k == ell ? d : M) - first;
        w.push_back(odd);
        w.push_back(even);
    }
    return w;
}

inline double generation_prob_pnoma(const PnomaGenerationVector& g, int ell, int d, int n, double alpha, int N, int M)
{
    if (ell < 1 || static_cast<int>(g.counts.size()) != 2 * ell) return 0.0;
    std::vector<int> w = pnoma_generation_windows(ell, d, n, N, M);
    double p = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0 || g.counts[i] < 0 || g.counts[i] > w[i]) return 0.0;
        p *= binomial_pmf(g.counts[i], w[i], alpha);
    }
    return p;
}

struct EmptyingState {
    std::vector<int> free;     // free spots after each replayed frame
    std::vector<int> evicted;  // cumulative drop-oldest evictions
};

struct TxSlot {
    int d = 0;    // mixed slot index
    int ell = 0;  // frame, 1 = generation frame
};

struct QueueEvolution {
    EmptyingState state;
    std::optional<TxSlot> tx;
    bool dropped = false;
    int behind = 0;  // packets queued behind the tagged one when it is sent
};

// Frame-by-frame drop-oldest replay of a packet generated in slot n behind q queued packets.
inline QueueEvolution queue_evolution(const PnomaGenerationVector& g, int q, int Q, int N, int M, int n)
{
    QueueEvolution r;
    int ahead = std::min(q, Q - 1), behind = 0, evicted = 0;
    int s = std::max(n - (N - M), 1);
    for (std::size_t k = 0; 2 * k + 1 < g.counts.size(); ++k) {
        int odd = g.counts[2 * k], even = g.counts[2 * k + 1];
        int ev = std::max(ahead + 1 + behind + odd - Q, 0);
        evicted += ev;
        if (ev > ahead) {
            r.dropped = true;
            r.state.free.push_back(0);
            r.state.evicted.push_back(evicted);
            return r;
        }
        ahead -= ev;
        behind += odd;
        int d = s + ahead;
        behind += even;
        if (d <= M) {
            r.tx = TxSlot{d, static_cast<int>(k) + 1};
            r.behind = behind;
            r.state.free.push_back(Q - 1 - behind);
            r.state.evicted.push_back(evicted);
            return r;
        }
        ahead -= M - s + 1;
        r.state.free.push_back(Q - (ahead + 1 + behind));
        r.state.evicted.push_back(evicted);
        s = 1;
    }
    return r;
}

// Slots from generation (frame slot n) to transmission in mixed slot d of frame ell.
inline int waiting_time(int d, int ell, int n, int N, int M) { return (ell - 1) * N + (N - M + d) - n; }

// table[d][c]: collisions in mixed slots 1..d-1 given that the queue is empty after mixed
// slot d-1, for d = 1..M (entry 0 unused).
inline std::vector<std::vector<double>> collision_count_table(int M, const QueueDistribution& piNM, double alpha, int Q)
{
    std::vector<std::vector<double>> table(static_cast<std::size_t>(M) + 1);
    const std::size_t width = static_cast<std::size_t>(std::max(M, 1));
    // joint[q][c] after m mixed slots
    std::vector<std::vector<double>> cur(static_cast<std::size_t>(Q) + 1, std::vector<double>(width, 0.0));
    for (int q = 0; q <= Q; ++q) cur[static_cast<std::size_t>(q)][0] = piNM.probs[static_cast<std::size_t>(q)];
    auto nxt = cur;
    for (int d = 1; d <= M; ++d) {
        const int m = d - 1;  // slots already elapsed
        std::vector<double> row(static_cast<std::size_t>(d), 0.0);
        double z = 0.0;
        for (int c = 0; c < d; ++c) z += cur[0][static_cast<std::size_t>(c)];
        if (z > 0.0)
            for (int c = 0; c < d; ++c) row[static_cast<std::size_t>(c)] = cur[0][static_cast<std::size_t>(c)] / z;
        table[static_cast<std::size_t>(d)] = std::move(row);
        if (d == M) break;
        for (auto& r : nxt) std::fill(r.begin(), r.end(), 0.0);
        for (int q = 0; q <= Q; ++q)
            for (int c = 0; c <= m; ++c) {
                double v = cur[static_cast<std::size_t>(q)][static_cast<std::size_t>(c)];
                if (v == 0.0) continue;
                for (int a = 0; a <= 1; ++a) {
                    double pa = a ? alpha : 1.0 - alpha;
                    int q2 = std::min(q + a, Q);
                    if (q2 > 0)
                        nxt[static_cast<std::size_t>(q2 - 1)][static_cast<std::size_t>(c + 1)] += v * pa;
                    else
                        nxt[0][static_cast<std::size_t>(c)] += v * pa;
                }
            }
        std::swap(cur, nxt);
    }
    return table;
}

inline std::vector<double> collision_count_pmf(int d, const QueueDistribution& piNM, double alpha, int Q)
{
    if (d < 1) return {1.0};
    return collision_count_table(d, piNM, alpha, Q)[static_cast<std::size_t>(d)];
}

inline double collision_count_pmf(int c, int d, const QueueDistribution& piNM, double alpha, int Q)
{
    if (c < 0 || c >= std::max(d, 1)) return 0.0;
    return collision_count_pmf(d, piNM, alpha, Q)[static_cast<std::size_t>(c)];
}

// Printed form with Bin(c - q; d - 1, alpha) over prior mixed slots; comparison only.
inline std::vector<double> collision_count_pmf_printed(int d, const QueueDistribution& piNM, const QueueDistribution& pi_at_slot,
                                                       double alpha, int Q)
{
    std::vector<double> out(static_cast<std::size_t>(std::max(d, 1)), 0.0);
    double den = pi_at_slot.probs[0];
    if (den <= 0.0) return out;
    for (int c = 0; c < d; ++c)
        for (int q = 0; q <= std::min(Q, c); ++q)
            out[static_cast<std::size_t>(c)] += piNM.probs[static_cast<std::size_t>(q)] / den * binomial_pmf(c - q, d - 1, alpha);
    return out;
}

namespace detail {

// F[t][b][k]: probability that the frame decodes exactly t mixed slots after the tagged
// transmission, with b packets queued behind it and k broadband packets still missing.
class DecodeTable {
public:
    DecodeTable(int M, int Q, int K, double alpha, double eps1) : M_(M), Q_(Q), K_(K), f_(static_cast<std::size_t>((M + 1) * Q * (K + 1)), 0.0)
    {
        for (int b = 0; b < Q; ++b) f(0, b, 0) = 1.0;
        const double good = (1.0 - alpha) * (1.0 - eps1);
        const double idle_bad = (1.0 - alpha) * eps1;
        for (int t = 1; t <= M; ++t)
            for (int b = 0; b < Q; ++b)
                for (int k = 1; k <= K; ++k) {
                    double v;
                    if (b >= 1)
                        v = alpha * f(t - 1, b, k) + (1.0 - alpha) * f(t - 1, b - 1, k);
                    else
                        v = alpha * f(t - 1, 0, k) + good * f(t - 1, 0, k - 1) + idle_bad * f(t - 1, 0, k);
                    f(t, b, k) = v;
                }
    }

    double operator()(int t, int b, int k) const { return f_[idx(t, b, k)]; }

    // Decode-delay masses for t = 0..horizon given the law of k.
    std::vector<double> mix(int b, const std::vector<double>& need, int horizon) const
    {
        std::vector<double> out(static_cast<std::size_t>(horizon) + 1, 0.0);
        for (int k = 0; k < static_cast<int>(need.size()) && k <= K_; ++k) {
            double w = need[static_cast<std::size_t>(k)];
            if (w == 0.0) continue;
            for (int t = 0; t <= horizon; ++t) out[static_cast<std::size_t>(t)] += w * (*this)(t, b, k);
        }
        return out;
    }

private:
    std::size_t idx(int t, int b, int k) const { return static_cast<std::size_t>((t * Q_ + b) * (K_ + 1) + k); }
    double& f(int t, int b, int k) { return f_[idx(t, b, k)]; }
    int M_, Q_, K_;
    std::vector<double> f_;
};

// Law of the number of broadband packets still missing after `slots` interference-free slots.
inline std::vector<double> missing_after(int K, int slots, double eps1)
{
    std::vector<double> need(static_cast<std::size_t>(K) + 1, 0.0);
    for (int r = 0; r <= slots; ++r) need[static_cast<std::size_t>(std::max(K - r, 0))] += binomial_pmf(r, slots, 1.0 - eps1);
    return need;
}

// Reusable per-configuration state for the LR analysis.
struct PnomaLrEngine {
    AccessConfig cfg;
    TrafficModel tm;
    int N, M, Q, K;
    PnomaQueueProfile prof;
    DecodeTable table;
    std::vector<std::vector<double>> dec_wait;  // [b][t]: tagged packet waited (omega > 0)
    std::vector<std::vector<double>> dec_now;   // [d][t]: sent in its generation slot (omega = 0)

    PnomaLrEngine(const AccessConfig& c, const TrafficModel& t)
        : cfg(c), tm(t), N(c.N), M(c.mixed()), Q(c.Q), K(c.K), prof(pnoma_queue_profile(N, M, t.alpha, Q)),
          table(M, Q, K, t.alpha, t.eps1)
    {
        std::vector<std::vector<double>> missing;
        for (int s = 0; s <= N; ++s) missing.push_back(missing_after(K, s, tm.eps1));
        for (int b = 0; b < Q; ++b) dec_wait.push_back(table.mix(b, missing[static_cast<std::size_t>(N - M)], M));
        std::vector<std::vector<double>> pc = collision_count_table(M, prof.after[static_cast<std::size_t>(N - M)], tm.alpha, Q);
        dec_now.resize(static_cast<std::size_t>(M) + 1);
        for (int d = 1; d <= M; ++d) {
            std::vector<double> nd(static_cast<std::size_t>(K) + 1, 0.0);
            for (int c = 0; c < d; ++c) {
                double w = pc[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)];
                if (w == 0.0) continue;
                const auto& part = missing[static_cast<std::size_t>(N - M + d - 1 - c)];
                for (int k = 0; k <= K; ++k) nd[static_cast<std::size_t>(k)] += w * part[static_cast<std::size_t>(k)];
            }
            dec_now[static_cast<std::size_t>(d)] = table.mix(0, nd, M - d);
        }
    }

    const std::vector<double>& decode_row(int d, int b, int omega) const
    {
        return omega == 0 ? dec_now[static_cast<std::size_t>(d)] : dec_wait[static_cast<std::size_t>(b)];
    }

    // Visits every transmission outcome (ell, d, behind) of a packet generated in slot n
    // behind q packets, with its probability; returns the drop probability.
    template <class Visit>
    double for_each_tx(int n, int q, Visit&& visit) const
    {
        std::vector<double> cur(static_cast<std::size_t>(Q * Q), 0.0), mid(cur.size()), nxt(cur.size());
        auto at = [this](int a, int b) { return static_cast<std::size_t>(a * Q + b); };
        cur[at(std::min(q, Q - 1), 0)] = 1.0;
        int s = std::max(n - (N - M), 1);
        double dropped = 0.0;
        for (int ell = 1;; ++ell) {
            const int wo = ell == 1 ? std::max(N - M - n + 1, 0) : N - M + 1;
            std::vector<double> row = binomial_row(wo, tm.alpha);
            std::fill(mid.begin(), mid.end(), 0.0);
            for (int a = 0; a < Q; ++a)
                for (int b = 0; a + 1 + b <= Q; ++b) {
                    double m = cur[at(a, b)];
                    if (m == 0.0) continue;
                    double kept = 0.0;
                    for (int g = 0; g <= wo; ++g) {
                        int ev = std::max(a + 1 + b + g - Q, 0);
                        if (ev > a) break;
                        double pm = m * row[static_cast<std::size_t>(g)];
                        kept += pm;
                        mid[at(a - ev, std::min(b + g, Q - 1 - (a - ev)))] += pm;
                    }
                    dropped += m - kept;
                }
            std::fill(nxt.begin(), nxt.end(), 0.0);
            bool alive = false;
            for (int a = 0; a < Q; ++a)
                for (int b = 0; a + 1 + b <= Q; ++b) {
                    double m = mid[at(a, b)];
                    if (m == 0.0) continue;
                    int d = s + a;
                    if (d <= M) {
                        int we = d - s;
                        for (int x = 0; x <= we; ++x) visit(ell, d, b + x, m * binomial_pmf(x, we, tm.alpha));
                    } else {
                        int we = M - s;
                        int a2 = a - (M - s + 1);
                        for (int x = 0; x <= we; ++x) {
                            double pm = m * binomial_pmf(x, we, tm.alpha);
                            if (pm == 0.0) continue;
                            nxt[at(a2, b + x)] += pm;
                            alive = true;
                        }
                    }
                }
            if (!alive) break;
            std::swap(cur, nxt);
            s = 1;
        }
        return dropped;
    }
};

}  // namespace detail

inline double drop_probability(int n, const AccessConfig& cfg, const TrafficModel& tm)
{
    detail::PnomaLrEngine e(cfg, tm);
    const QueueDistribution& pin = e.prof.after[static_cast<std::size_t>(n - 1)];
    double p = 0.0;
    for (int q = 0; q <= cfg.Q; ++q) {
        double w = pin.probs[static_cast<std::size_t>(q)];
        if (w > 0.0) p += w * e.for_each_tx(n, q, [](int, int, int, double) {});
    }
    return p;
}

// Decode delay D of a packet whose generation vector g (generated in slot n behind q packets)
// leads to transmission in mixed slot d. Includes the (1 - eps2) reception factor; the
// defect holds the probability that the packet is never recovered on this path.
inline DiscretePmf decode_latency_pmf(const PnomaGenerationVector& g, int d, int q, int n, const AccessConfig& cfg, const TrafficModel& tm)
{
    const int M = cfg.mixed();
    QueueEvolution ev = queue_evolution(g, q, cfg.Q, cfg.N, M, n);
    if (!ev.tx || ev.tx->d != d) throw std::invalid_argument("decode_latency_pmf: g does not lead to transmission in slot d");
    detail::PnomaLrEngine e(cfg, tm);
    int omega = waiting_time(d, ev.tx->ell, n, cfg.N, M);
    const std::vector<double>& row = e.decode_row(d, std::min(ev.behind, cfg.Q - 1), omega);
    std::vector<double> m(static_cast<std::size_t>(M - d) + 1);
    double s = 0.0;
    for (int t = 0; t <= M - d; ++t) s += m[static_cast<std::size_t>(t)] = row[static_cast<std::size_t>(t)] * (1.0 - tm.eps2);
    return DiscretePmf::make(0, std::move(m), std::max(0.0, 1.0 - s));
}

struct PnomaLrResult {
    DiscretePmf latency;  // unconditional; defect = loss probability
    double p_s2 = 0.0;
    double p_s1 = 0.0;
    double s1 = 0.0;
};

inline double pnoma_broadband_success(const AccessConfig& cfg, const TrafficModel& tm, const PnomaQueueProfile& prof)
{
    const int M = cfg.mixed();
    DiscretePmf tx = tx_count_pmf(M, prof.after[static_cast<std::size_t>(cfg.N - M)], tm.alpha, M, cfg.Q);
    return broadband_success_lr(cfg.K, cfg.N, M, tm.eps1, tx);
}

inline PnomaLrResult lr_kpis_pnoma(const AccessConfig& cfg, const TrafficModel& tm)
{
    detail::PnomaLrEngine e(cfg, tm);
    const int N = e.N, M = e.M, Q = e.Q;
    // acc[d][b] over omega, convolved with the decode rows at the end.
    const std::size_t span = static_cast<std::size_t>((Q + 2) * N);
    std::vector<std::vector<std::vector<double>>> acc(static_cast<std::size_t>(M) + 1,
                                                      std::vector<std::vector<double>>(static_cast<std::size_t>(Q)));
    std::vector<double> now(static_cast<std::size_t>(M) + 1, 0.0);
    for (int n = 1; n <= N; ++n) {
        const QueueDistribution& pin = e.prof.after[static_cast<std::size_t>(n - 1)];
        for (int q = 0; q <= Q; ++q) {
            double w = pin.probs[static_cast<std::size_t>(q)] / N;
            if (w == 0.0) continue;
            e.for_each_tx(n, q, [&](int ell, int d, int b, double p) {
                if (p == 0.0) return;
                int omega = waiting_time(d, ell, n, N, M);
                if (omega == 0) {
                    now[static_cast<std::size_t>(d)] += w * p;
                    return;
                }
                auto& v = acc[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
                if (v.empty()) v.assign(span, 0.0);
                v[static_cast<std::size_t>(omega)] += w * p;
            });
        }
    }
    std::vector<double> lat(span + static_cast<std::size_t>(M) + 1, 0.0);
    const double keep = 1.0 - tm.eps2;
    for (int d = 1; d <= M; ++d) {
        const int h = M - d;
        if (now[static_cast<std::size_t>(d)] > 0.0) {
            const auto& row = e.dec_now[static_cast<std::size_t>(d)];
            for (int t = 0; t <= h; ++t) lat[static_cast<std::size_t>(t)] += now[static_cast<std::size_t>(d)] * row[static_cast<std::size_t>(t)] * keep;
        }
        for (int b = 0; b < Q; ++b) {
            const auto& v = acc[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
            if (v.empty()) continue;
            const auto& row = e.dec_wait[static_cast<std::size_t>(b)];
            for (std::size_t o = 0; o < v.size(); ++o) {
                if (v[o] == 0.0) continue;
                for (int t = 0; t <= h; ++t) lat[o + static_cast<std::size_t>(t)] += v[o] * row[static_cast<std::size_t>(t)] * keep;
            }
        }
    }
    while (!lat.empty() && lat.back() == 0.0) lat.pop_back();
    double s = 0.0;
    for (double v : lat) s += v;
    PnomaLrResult r;
    r.latency = DiscretePmf::make(0, std::move(lat), std::max(0.0, 1.0 - s));
    r.p_s2 = s;
    r.p_s1 = pnoma_broadband_success(cfg, tm, e.prof);
    r.s1 = broadband_throughput_lr(cfg.K, cfg.N, r.p_s1);
    return r;
}

// ---------------------------------------------------------------------------------------
// Q = 1 (preemption): the queue is empty at every frame start and the activity of each
// mixed slot is independent, so one frame can be analysed in isolation.

struct ActivityProbs {
    double p_A = 0.0;  // intermittent user active
    double p_1 = 0.0;  // broadband packet received
    double p_2 = 0.0;  // intermittent packet received (once the frame is known)
};

inline ActivityProbs activity_and_decode_probs(int m, double alpha, double eps1, double eps2, int N, int M)
{
    ActivityProbs a;
    a.p_A = m == 1 ? 1.0 - std::pow(1.0 - alpha, N - M + 1) : alpha;
    a.p_1 = (1.0 - eps1) * (1.0 - a.p_A);
    a.p_2 = a.p_A * (1.0 - eps2);
    return a;
}

// Pr[frame decoded within its first n slots] for Q = 1.
inline double broadband_success_paoi(int n, const AccessConfig& cfg, const TrafficModel& tm)
{
    const int N = cfg.N, M = cfg.mixed(), K = cfg.K;
    if (n < K) return 0.0;
    std::vector<double> got = binomial_row(std::min(n, N - M), 1.0 - tm.eps1);
    for (int m = 1; m <= n - (N - M); ++m) {
        double p1 = activity_and_decode_probs(m, tm.alpha, tm.eps1, tm.eps2, N, M).p_1;
        got.push_back(0.0);
        for (std::size_t r = got.size() - 1; r > 0; --r) got[r] = got[r] * (1.0 - p1) + got[r - 1] * p1;
        got[0] *= 1.0 - p1;
    }
    double s = 0.0;
    for (std::size_t r = static_cast<std::size_t>(K); r < got.size(); ++r) s += got[r];
    return s;
}

struct PnomaFrameEvents {
    // events[d-1][t][from_first]: expected receptions of a fresher update in mixed slot d whose
    // packet was sent t slots earlier; from_first marks packets sent in mixed slot 1.
    std::vector<std::vector<std::array<double, 2>>> events;
    std::vector<double> first;  // first[f-1]: first reception of the frame in mixed slot f
};

inline PnomaFrameEvents pnoma_frame_events(const AccessConfig& cfg, const TrafficModel& tm)
{
    const int N = cfg.N, M = cfg.mixed(), K = cfg.K;
    PnomaFrameEvents out;
    out.events.assign(static_cast<std::size_t>(M), std::vector<std::array<double, 2>>(static_cast<std::size_t>(M), {0.0, 0.0}));
    out.first.assign(static_cast<std::size_t>(M), 0.0);
    // und[k][p]: not yet decoded, k packets missing, freshest recoverable packet sent in slot p (0 = none).
    std::vector<std::vector<double>> und(static_cast<std::size_t>(K) + 1, std::vector<double>(static_cast<std::size_t>(M) + 1, 0.0));
    double dec_quiet = 0.0, dec_seen = 0.0;
    for (int r = 0; r <= N - M; ++r) {
        double pr = binomial_pmf(r, N - M, 1.0 - tm.eps1);
        if (r >= K)
            dec_quiet += pr;
        else
            und[static_cast<std::size_t>(K - r)][0] += pr;
    }
    for (int m = 1; m <= M; ++m) {
        ActivityProbs ap = activity_and_decode_probs(m, tm.alpha, tm.eps1, tm.eps2, N, M);
        const std::size_t mi = static_cast<std::size_t>(m - 1);
        double hit = ap.p_2;
        out.events[mi][0][m == 1 ? 1 : 0] += (dec_quiet + dec_seen) * hit;
        out.first[mi] += dec_quiet * hit;
        dec_seen += dec_quiet * hit;
        dec_quiet -= dec_quiet * hit;
        auto nxt = std::vector<std::vector<double>>(und.size(), std::vector<double>(und[0].size(), 0.0));
        for (int k = 1; k <= K; ++k)
            for (int p = 0; p < m; ++p) {
                double v = und[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                if (v == 0.0) continue;
                nxt[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] += v * ap.p_2;
                nxt[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] += v * (ap.p_A - ap.p_2);
                nxt[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] += v * (1.0 - ap.p_A - ap.p_1);
                double good = v * ap.p_1;
                if (k > 1) {
                    nxt[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(p)] += good;
                } else if (p > 0) {
                    out.events[mi][static_cast<std::size_t>(m - p)][p == 1 ? 1 : 0] += good;
                    out.first[mi] += good;
                    dec_seen += good;
                } else {
                    dec_quiet += good;
                }
            }
        und = std::move(nxt);
    }
    return out;
}

struct FirstDecode {
    std::vector<double> p_F;  // index f-1
    double any = 0.0;         // Pr[at least one reception in a frame]
    double p_s2 = 0.0;        // 1 - sum p_F, the quantity the analysis names p_{s,2}
};

inline FirstDecode first_decode_pmf(const AccessConfig& cfg, const TrafficModel& tm)
{
    PnomaFrameEvents fe = pnoma_frame_events(cfg, tm);
    FirstDecode r;
    r.p_F = fe.first;
    for (double v : r.p_F) r.any += v;
    r.p_s2 = 1.0 - r.any;
    return r;
}

struct EventDelay {
    double p_D = 0.0;  // Pr[reception of a fresher update in mixed slot d]
    double p_H = 0.0;  // Pr[it is the first of the frame | reception in d]
    DiscretePmf p_T;   // transmission-to-reception delay given reception in d
};

inline EventDelay event_and_delay_pmfs(int d, const AccessConfig& cfg, const TrafficModel& tm)
{
    PnomaFrameEvents fe = pnoma_frame_events(cfg, tm);
    EventDelay r;
    const auto& row = fe.events[static_cast<std::size_t>(d - 1)];
    std::vector<double> m(row.size());
    for (std::size_t t = 0; t < row.size(); ++t) r.p_D += m[t] = row[t][0] + row[t][1];
    if (r.p_D <= 0.0) {
        r.p_T = DiscretePmf::lost();
        return r;
    }
    r.p_H = fe.first[static_cast<std::size_t>(d - 1)] / r.p_D;
    for (double& v : m) v /= r.p_D;
    while (m.size() > 1 && m.back() == 0.0) m.pop_back();
    r.p_T = DiscretePmf::make(0, std::move(m), 0.0);
    return r;
}

// Buffering before a mixed-slot-1 transmission: the freshest arrival among the N-M+1 slots.
inline DiscretePmf buffering_pmf(int N, int M, double alpha)
{
    double pa = 1.0 - std::pow(1.0 - alpha, N - M + 1);
    if (pa <= 0.0) return DiscretePmf::lost();
    std::vector<double> m(static_cast<std::size_t>(N - M) + 1);
    for (int w = 0; w <= N - M; ++w) m[static_cast<std::size_t>(w)] = std::pow(1.0 - alpha, w) * alpha / pa;
    return DiscretePmf::make(0, std::move(m), 0.0);
}

namespace detail {

// Gap from the start of the frame (slot 0 = last slot of the previous frame's mixed slot M
// shifted by N - M) to the first reception: X(eN + f) = (1 - any)^e p_F(f).
inline std::vector<double> next_frame_gap(const FirstDecode& fd, int N, double& truncated)
{
    std::vector<double> x;
    truncated = 0.0;
    if (fd.any <= 0.0) {
        truncated = 1.0;
        return x;
    }
    double scale = 1.0, residual = 1.0;
    for (int e = 0; e < 100000 && residual >= 1e-10; ++e) {
        x.resize(static_cast<std::size_t>((e + 1) * N) + 1, 0.0);
        for (std::size_t f = 0; f < fd.p_F.size(); ++f) x[static_cast<std::size_t>(e * N) + f + 1] += scale * fd.p_F[f];
        residual -= scale * fd.any;
        scale *= 1.0 - fd.any;
    }
    truncated = std::max(residual, 0.0);
    return x;
}

}  // namespace detail

// Inter-reception time Z after a reception in mixed slot i.
inline DiscretePmf interarrival_pmf(int i, const AccessConfig& cfg, const TrafficModel& tm)
{
    const int N = cfg.N, M = cfg.mixed();
    const double p = tm.alpha * (1.0 - tm.eps2);
    FirstDecode fd = first_decode_pmf(cfg, tm);
    double trunc = 0.0;
    std::vector<double> x = detail::next_frame_gap(fd, N, trunc);
    const double last = std::pow(1.0 - p, M - i);
    std::vector<double> z(static_cast<std::size_t>(N - i) + x.size() + 1, 0.0);
    for (int k = 1; k <= M - i; ++k) z[static_cast<std::size_t>(k)] = std::pow(1.0 - p, k - 1) * p;
    for (std::size_t j = 0; j < x.size(); ++j) z[static_cast<std::size_t>(N - i) + j] += last * x[j];
    if (fd.any <= 0.0 && p <= 0.0) return DiscretePmf::lost();
    while (z.size() > 1 && z.back() == 0.0) z.pop_back();
    z.erase(z.begin());
    return DiscretePmf{1, std::move(z), 0.0, last * trunc};
}

// Peak AoI for Q = 1: previous update latency (delay + buffering) plus the inter-reception gap.
inline DiscretePmf paoi_pmf_pnoma(const AccessConfig& cfg, const TrafficModel& tm)
{
    const int N = cfg.N, M = cfg.mixed();
    PnomaFrameEvents fe = pnoma_frame_events(cfg, tm);
    FirstDecode fd;
    fd.p_F = fe.first;
    for (double v : fd.p_F) fd.any += v;
    double total = 0.0;
    for (const auto& row : fe.events)
        for (const auto& c : row) total += c[0] + c[1];
    if (total <= 0.0) return DiscretePmf::lost();
    DiscretePmf w = buffering_pmf(N, M, tm.alpha);
    const double p = tm.alpha * (1.0 - tm.eps2);
    double trunc = 0.0;
    std::vector<double> x = detail::next_frame_gap(fd, N, trunc);

    const std::size_t lat_len = static_cast<std::size_t>(M + N - M + 1);
    std::vector<double> same(lat_len + static_cast<std::size_t>(M) + 1, 0.0);
    std::vector<double> y(static_cast<std::size_t>(N) + lat_len + 1, 0.0);
    double cross_mass = 0.0;
    for (int d = 1; d <= M; ++d) {
        std::vector<double> lat(lat_len, 0.0);
        const auto& row = fe.events[static_cast<std::size_t>(d - 1)];
        for (std::size_t t = 0; t < row.size(); ++t) {
            lat[t] += row[t][0];
            if (row[t][1] != 0.0)
                for (std::size_t k = 0; k < w.masses.size(); ++k) lat[t + k] += row[t][1] * w.masses[k];
        }
        for (std::size_t l = 0; l < lat_len; ++l) {
            double v = lat[l] / total;
            if (v == 0.0) continue;
            for (int k = 1; k <= M - d; ++k) same[l + static_cast<std::size_t>(k)] += v * std::pow(1.0 - p, k - 1) * p;
            double c = v * std::pow(1.0 - p, M - d);
            y[l + static_cast<std::size_t>(N - d)] += c;
            cross_mass += c;
        }
    }
    std::vector<double> cross = convolve(y, x);
    std::vector<double> out(std::max(same.size(), cross.size()), 0.0);
    for (std::size_t i = 0; i < same.size(); ++i) out[i] += same[i];
    for (std::size_t i = 0; i < cross.size(); ++i) out[i] += cross[i];
    while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    std::size_t lead = 0;
    while (lead + 1 < out.size() && out[lead] == 0.0) ++lead;
    out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(lead));
    return DiscretePmf{static_cast<std::int64_t>(lead), std::move(out), 0.0, cross_mass * trunc};
}

}  // namespace slicing
