#include <gtest/gtest.h>

#include <deque>
#include <functional>
#include <map>
#include <random>

#include "slicing/analytic_pnoma.hpp"
#include "slicing/simulator.hpp"

using namespace slicing;

namespace {

AccessConfig pnoma(int K, int N, int M, int Q)
{
    AccessConfig c;
    c.scheme = Scheme::PNOMA;
    c.K = K;
    c.N = N;
    c.M = M;
    c.Q = Q;
    return c;
}

struct ReplayOutcome {
    std::map<std::pair<int, int>, double> tx;  // (ell, d) -> probability
    double dropped = 0.0;
};

// Tagged packet generated in frame slot n behind q packets, replayed slot by slot over every
// arrival pattern. Mixed slots are the last M of each N-slot frame.
ReplayOutcome replay_pnoma(int n, int q, int N, int M, int Q, double a)
{
    const int bits = (N - n) + Q * N;
    ReplayOutcome out;
    for (unsigned long mask = 0; mask < (1ul << bits); ++mask) {
        double p = 1.0;
        for (int b = 0; b < bits; ++b) p *= (mask >> b & 1ul) ? a : 1.0 - a;
        std::deque<int> queue(static_cast<std::size_t>(q), 0);
        queue.push_back(1);
        if (static_cast<int>(queue.size()) > Q) queue.pop_front();
        int bit = 0;
        bool resolved = false;
        for (int t = n; !resolved; ++t) {
            int slot = (t - 1) % N + 1, ell = (t - 1) / N + 1;
            if (t > n && (mask >> bit++ & 1ul)) {
                queue.push_back(0);
                if (static_cast<int>(queue.size()) > Q) {
                    if (queue.front() == 1) {
                        out.dropped += p;
                        resolved = true;
                        break;
                    }
                    queue.pop_front();
                }
            }
            if (slot > N - M && !queue.empty()) {
                bool tagged = queue.front() == 1;
                queue.pop_front();
                if (tagged) {
                    out.tx[{ell, slot - (N - M)}] += p;
                    resolved = true;
                }
            }
            if (bit > bits) {
                ADD_FAILURE() << "replay horizon too short";
                break;
            }
        }
    }
    return out;
}

// Every generation vector that leads to (ell, d) by the frame replay, with its probability.
double enumerate_sets(int ell, int d, int n, int q, int N, int M, int Q, double a,
                      const std::function<void(const PnomaGenerationVector&, double)>& visit = {})
{
    std::vector<int> w = pnoma_generation_windows(ell, d, n, N, M);
    for (int x : w)
        if (x < 0) return 0.0;
    PnomaGenerationVector g;
    g.counts.assign(w.size(), 0);
    double total = 0.0;
    while (true) {
        QueueEvolution ev = queue_evolution(g, q, Q, N, M, n);
        if (ev.tx && ev.tx->d == d && ev.tx->ell == ell) {
            double p = generation_prob_pnoma(g, ell, d, n, a, N, M);
            total += p;
            if (visit) visit(g, p);
        }
        std::size_t i = 0;
        while (i < w.size() && g.counts[i] == w[i]) g.counts[i++] = 0;
        if (i == w.size()) break;
        ++g.counts[i];
    }
    return total;
}

}  // namespace

TEST(TxCount, TrivialAndReplay)
{
    DiscretePmf z = tx_count_pmf(3, QueueDistribution::empty(2), 0.0, 4, 2);
    EXPECT_EQ(z.at(0), 1.0);
    DiscretePmf d0 = tx_count_pmf(0, QueueDistribution{{0.3, 0.7}}, 0.4, 4, 1);
    EXPECT_EQ(d0.at(0), 1.0);
    for (int Q = 1; Q <= 3; ++Q)
        for (int d = 1; d <= 4; ++d) {
            QueueDistribution pi{std::vector<double>(static_cast<std::size_t>(Q) + 1, 1.0 / (Q + 1))};
            const double a = 0.5;
            std::vector<double> oracle(static_cast<std::size_t>(d) + 1, 0.0);
            for (int q0 = 0; q0 <= Q; ++q0)
                for (unsigned mask = 0; mask < (1u << d); ++mask) {
                    int q = q0, tx = 0;
                    double p = pi.probs[static_cast<std::size_t>(q0)];
                    for (int s = 0; s < d; ++s) {
                        bool arr = mask >> s & 1u;
                        p *= arr ? a : 1 - a;
                        q = std::min(q + (arr ? 1 : 0), Q);
                        if (q > 0) {
                            --q;
                            ++tx;
                        }
                    }
                    oracle[static_cast<std::size_t>(tx)] += p;
                }
            DiscretePmf t = tx_count_pmf(d, pi, a, 4, Q);
            for (int k = 0; k <= d; ++k) EXPECT_NEAR(t.at(k), oracle[static_cast<std::size_t>(k)], 1e-14) << Q << d << k;
        }
}

TEST(TxCount, PrintedFormulaDiffersOnlyWithFullQueue)
{
    QueueDistribution ok{{0.6, 0.4, 0.0}};
    QueueDistribution full{{0.2, 0.3, 0.5}};
    double dev_ok = 0.0, dev_full = 0.0;
    for (int d = 1; d <= 3; ++d) {
        DiscretePmf a = tx_count_pmf(d, ok, 0.3, 3, 2), b = tx_count_pmf_printed(d, ok, 0.3, 3, 2);
        DiscretePmf c = tx_count_pmf(d, full, 0.3, 3, 2), e = tx_count_pmf_printed(d, full, 0.3, 3, 2);
        for (int k = 0; k <= d; ++k) {
            dev_ok = std::max(dev_ok, std::abs(a.at(k) - b.at(k)));
            dev_full = std::max(dev_full, std::abs(c.at(k) - e.at(k)));
        }
    }
    EXPECT_GT(dev_full, 1e-3);
    std::printf("tx_count printed-vs-exact max deviation: partial queue %.3g, full queue %.3g\n", dev_ok, dev_full);
}

TEST(BroadbandLr, Examples)
{
    AccessConfig c = pnoma(20, 26, 3, 4);
    auto prof = pnoma_queue_profile(26, 3, 0.0, 4);
    EXPECT_NEAR(pnoma_broadband_success(c, {0.0, 0.0, 0.05}, prof), 1.0, 1e-15);
    EXPECT_NEAR(pnoma_broadband_success(c, {0.3, 1.0, 0.05}, pnoma_queue_profile(26, 3, 0.3, 4)), 0.0, 1e-15);
    auto p1 = pnoma_queue_profile(26, 3, 0.01, 4);
    DiscretePmf tx = tx_count_pmf(3, p1.after[23], 0.01, 3, 4);
    double oracle = 0.0;
    for (int r2 = 0; r2 <= 3; ++r2)
        for (int r = 20; r <= 26 - r2; ++r) oracle += tx.at(r2) * binomial_pmf(r, 26 - r2, 0.9);
    double ps1 = pnoma_broadband_success(c, {0.01, 0.1, 0.05}, p1);
    EXPECT_NEAR(ps1, oracle, 1e-14);
    EXPECT_GE(broadband_throughput_lr(20, 26, ps1), 0.75);
}

TEST(BroadbandLr, NonincreasingInAlpha)
{
    for (int M = 1; M <= 10; ++M)
        for (int Q : {1, 4}) {
            AccessConfig c = pnoma(8, 12, std::min(M, 12), Q);
            double prev = 2.0, prev_paoi = 2.0;
            for (double a = 0.0; a <= 1.0; a += 0.05) {
                double v = pnoma_broadband_success(c, {a, 0.1, 0.05}, pnoma_queue_profile(12, c.M, a, Q));
                EXPECT_LE(v, prev + 1e-12);
                prev = v;
                double w = broadband_success_paoi(12, c, {a, 0.1, 0.05});
                EXPECT_LE(w, prev_paoi + 1e-12);
                prev_paoi = w;
            }
        }
}

TEST(GenerationPnoma, CompletenessAndEnumeration)
{
    EXPECT_EQ(generation_prob_pnoma({{0, 0, 0, 0}}, 2, 2, 1, 0.0, 5, 3), 1.0);
    // Completeness of the first-frame windows.
    for (int N = 2; N <= 5; ++N)
        for (int M = 1; M <= N; ++M)
            for (int n = 1; n <= N; ++n) {
                int s = std::max(n - (N - M), 1);
                for (int d = s; d <= M; ++d) {
                    auto w = pnoma_generation_windows(1, d, n, N, M);
                    double tot = 0.0;
                    for (int a = 0; a <= w[0]; ++a)
                        for (int b = 0; b <= w[1]; ++b) tot += generation_prob_pnoma({{a, b}}, 1, d, n, 0.37, N, M);
                    EXPECT_NEAR(tot, 1.0, 1e-14);
                }
            }
    // N = 3, M = 2, n = 1, ell = 2: slot-by-slot arrival enumeration.
    auto w = pnoma_generation_windows(2, 1, 1, 3, 2);
    ASSERT_EQ(w, (std::vector<int>{1, 1, 2, 0}));
    const double a = 0.3;
    for (int g1 = 0; g1 <= 1; ++g1)
        for (int g2 = 0; g2 <= 1; ++g2)
            for (int g3 = 0; g3 <= 2; ++g3) {
                double oracle = 0.0;
                for (unsigned mask = 0; mask < 16; ++mask) {
                    // slots 2, 3 | 4, 5 of the next frame's reserved + first mixed
                    int c[3] = {(mask & 1) ? 1 : 0, (mask >> 1 & 1) ? 1 : 0, static_cast<int>((mask >> 2 & 1) + (mask >> 3 & 1))};
                    if (c[0] != g1 || c[1] != g2 || c[2] != g3) continue;
                    double p = 1.0;
                    for (int b = 0; b < 4; ++b) p *= (mask >> b & 1) ? a : 1 - a;
                    oracle += p;
                }
                EXPECT_NEAR(generation_prob_pnoma({{g1, g2, g3, 0}}, 2, 1, 1, a, 3, 2), oracle, 1e-15);
            }
}

TEST(QueueEvolutionPnoma, Examples)
{
    QueueEvolution e = queue_evolution({{0, 0}}, 0, 2, 5, 2, 1);
    ASSERT_TRUE(e.tx.has_value());
    EXPECT_EQ(e.tx->d, 1);
    EXPECT_EQ(e.tx->ell, 1);
    EXPECT_EQ(e.state.evicted.back(), 0);
    QueueEvolution drop = queue_evolution({{3, 0}}, 0, 1, 5, 2, 1);
    EXPECT_TRUE(drop.dropped);
    EXPECT_FALSE(drop.tx.has_value());
    for (std::size_t i = 1; i < drop.state.evicted.size(); ++i) EXPECT_GE(drop.state.evicted[i], drop.state.evicted[i - 1]);
}

// The (ell, d) sets built from queue_evolution reproduce the slot-level replay exactly.
TEST(QueueEvolutionPnoma, SetsMatchSlotReplay)
{
    const double a = 0.4;
    for (auto [N, M, Q] : std::vector<std::tuple<int, int, int>>{{4, 2, 2}, {3, 1, 1}, {3, 3, 2}, {4, 1, 2}, {3, 2, 3}})
        for (int n = 1; n <= N; ++n)
            for (int q = 0; q <= Q; ++q) {
                ReplayOutcome r = replay_pnoma(n, q, N, M, Q, a);
                double seen = 0.0;
                for (auto [key, p] : r.tx) {
                    double e = enumerate_sets(key.first, key.second, n, q, N, M, Q, a);
                    EXPECT_NEAR(e, p, 1e-13) << N << M << Q << " n" << n << " q" << q << " l" << key.first << " d" << key.second;
                    seen += p;
                }
                for (int ell = 1; ell <= Q + 1; ++ell)
                    for (int d = 1; d <= M; ++d)
                        if (!r.tx.count({ell, d})) EXPECT_NEAR(enumerate_sets(ell, d, n, q, N, M, Q, a), 0.0, 1e-15);
                EXPECT_NEAR(seen + r.dropped, 1.0, 1e-12);
            }
}

TEST(DropProbability, EngineMatchesReplay)
{
    EXPECT_NEAR(drop_probability(1, pnoma(2, 4, 2, 1), {0.0, 0.1, 0.05}), 0.0, 1e-15);
    EXPECT_LT(drop_probability(2, pnoma(2, 4, 2, 20), {0.05, 0.1, 0.05}), 1e-12);
    for (auto [N, M, Q] : std::vector<std::tuple<int, int, int>>{{4, 2, 1}, {4, 2, 2}, {3, 1, 2}}) {
        AccessConfig c = pnoma(2, N, M, Q);
        TrafficModel tm{0.5, 0.1, 0.05};
        auto prof = pnoma_queue_profile(N, M, tm.alpha, Q);
        for (int n = 1; n <= N; ++n) {
            double oracle = 0.0;
            for (int q = 0; q <= Q; ++q) oracle += prof.after[static_cast<std::size_t>(n - 1)].probs[static_cast<std::size_t>(q)] * replay_pnoma(n, q, N, M, Q, tm.alpha).dropped;
            EXPECT_NEAR(drop_probability(n, c, tm), oracle, 1e-13);
        }
    }
}

TEST(CollisionCount, TrivialAndReplay)
{
    auto z = collision_count_pmf(3, QueueDistribution::empty(2), 0.0, 2);
    EXPECT_NEAR(z[0], 1.0, 1e-15);
    auto one = collision_count_pmf(1, QueueDistribution{{0.5, 0.5}}, 0.3, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(one[0], 1.0, 1e-15);
    // d = 3, Q = 1: replay mixed slots 1..2, condition on an empty queue after slot 2.
    QueueDistribution pi{{0.4, 0.6}};
    const double a = 0.3;
    std::vector<double> oracle(3, 0.0);
    double z3 = 0.0;
    for (int q0 = 0; q0 <= 1; ++q0)
        for (unsigned mask = 0; mask < 4; ++mask) {
            int q = q0, c = 0;
            double p = pi.probs[static_cast<std::size_t>(q0)];
            for (int s = 0; s < 2; ++s) {
                bool arr = mask >> s & 1u;
                p *= arr ? a : 1 - a;
                q = std::min(q + (arr ? 1 : 0), 1);
                if (q > 0) {
                    --q;
                    ++c;
                }
            }
            if (q == 0) {
                oracle[static_cast<std::size_t>(c)] += p;
                z3 += p;
            }
        }
    auto pc = collision_count_pmf(3, pi, a, 1);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(pc[static_cast<std::size_t>(c)], oracle[static_cast<std::size_t>(c)] / z3, 1e-14);
    EXPECT_NEAR(collision_count_pmf(1, 3, pi, a, 1), oracle[1] / z3, 1e-14);
    PhaseMatrices ph = pnoma_phase_matrices(a, 1);
    auto printed = collision_count_pmf_printed(3, pi, propagate(pi, matrix_power(ph.mixed.p, 2)), a, 1);
    double dev = 0.0;
    for (int c = 0; c < 3; ++c) dev = std::max(dev, std::abs(printed[static_cast<std::size_t>(c)] - pc[static_cast<std::size_t>(c)]));
    std::printf("collision count printed-vs-exact max deviation: %.3g\n", dev);
}

TEST(DecodeLatency, TrivialCases)
{
    AccessConfig c = pnoma(2, 6, 2, 2);
    EXPECT_THROW(decode_latency_pmf({{0, 0}}, 2, 0, 1, c, {0.3, 0.1, 0.05}), std::invalid_argument);
    DiscretePmf dead = decode_latency_pmf({{0, 0}}, 1, 0, 1, c, {0.3, 0.1, 1.0});
    EXPECT_NEAR(dead.defect, 1.0, 1e-15);
    EXPECT_EQ(dead.total(), 0.0);
    DiscretePmf sure = decode_latency_pmf({{0, 0}}, 1, 0, 1, c, {0.3, 0.0, 0.05});
    EXPECT_NEAR(sure.at(0), 0.95, 1e-15);
}

// Dual route: enumerating generation sets through decode_latency_pmf versus the DP engine.
TEST(LrPnoma, EnumerationRouteMatchesEngine)
{
    for (auto [K, N, M, Q] : std::vector<std::tuple<int, int, int, int>>{{2, 4, 2, 1}, {2, 4, 2, 2}, {1, 3, 3, 2}, {2, 5, 4, 2}, {3, 4, 1, 2}}) {
        AccessConfig c = pnoma(K, N, M, Q);
        TrafficModel tm{0.3, 0.1, 0.05};
        PnomaLrResult r = lr_kpis_pnoma(c, tm);
        auto prof = pnoma_queue_profile(N, M, tm.alpha, Q);
        std::vector<double> lat(static_cast<std::size_t>((Q + 2) * N + M), 0.0);
        for (int n = 1; n <= N; ++n)
            for (int q = 0; q <= Q; ++q) {
                double w = prof.after[static_cast<std::size_t>(n - 1)].probs[static_cast<std::size_t>(q)] / N;
                for (int ell = 1; ell <= Q + 1; ++ell)
                    for (int d = 1; d <= M; ++d)
                        enumerate_sets(ell, d, n, q, N, M, Q, tm.alpha, [&](const PnomaGenerationVector& g, double p) {
                            int omega = waiting_time(d, ell, n, N, M);
                            DiscretePmf D = decode_latency_pmf(g, d, q, n, c, tm);
                            for (std::size_t t = 0; t < D.masses.size(); ++t) lat[static_cast<std::size_t>(omega) + t] += w * p * D.masses[t];
                        });
            }
        double s = 0.0;
        for (std::size_t t = 0; t < lat.size(); ++t) {
            EXPECT_NEAR(r.latency.at(static_cast<std::int64_t>(t)), lat[t], 1e-12) << K << N << M << Q << " t" << t;
            s += lat[t];
        }
        EXPECT_NEAR(r.p_s2, s, 1e-12);
    }
}

TEST(LrPnoma, NormalizedRandomized)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        int N = 1 + static_cast<int>(u(rng) * 20), K = 1 + static_cast<int>(u(rng) * N), M = 1 + static_cast<int>(u(rng) * N);
        AccessConfig c = pnoma(K, N, M, 1 + static_cast<int>(u(rng) * 4));
        PnomaLrResult r = lr_kpis_pnoma(c, {u(rng), u(rng) * 0.5, u(rng) * 0.5});
        ASSERT_NEAR(r.latency.total() + r.latency.defect, 1.0, 1e-9);
        ASSERT_GE(r.p_s1, 0.0);
        ASSERT_LE(r.p_s1, 1.0 + 1e-12);
        ASSERT_LE(r.s1, static_cast<double>(K) / N + 1e-12);
        if (r.latency.total() > 0) ASSERT_NEAR(r.latency.conditional().total(), 1.0, 1e-9);
    }
}

TEST(LrPnoma, SmallAlphaTrend)
{
    AccessConfig c = pnoma(4, 8, 3, 2);
    double prev = -1.0;
    for (double a : {0.2, 0.1, 0.05, 0.01, 0.001}) {
        PnomaLrResult r = lr_kpis_pnoma(c, {a, 0.1, 0.05});
        EXPECT_GE(r.p_s2, prev - 1e-12);
        prev = r.p_s2;
    }
}

TEST(LrPnoma, MatchesSimulationTinyCase)
{
    AccessConfig c = pnoma(2, 4, 2, 2);
    TrafficModel tm{0.3, 0.1, 0.05};
    PnomaLrResult r = lr_kpis_pnoma(c, tm);
    SimRun run;
    run.slots = 4'000'000;
    run.seed = 101;
    EmpiricalKpis k = run_simulation(c, tm, CaptureChannel{}, run);
    EXPECT_LT(total_variation(r.latency, k.latency_hist), 0.02);
    EXPECT_NEAR(k.p_s2.value, r.p_s2, 3 * k.p_s2.stderr_ + 1e-3);
    EXPECT_NEAR(k.p_s1.value, r.p_s1, 3 * k.p_s1.stderr_ + 1e-3);
}

TEST(ActivityProbs, Examples)
{
    EXPECT_NEAR(activity_and_decode_probs(1, 0.2, 0.1, 0.05, 6, 6).p_A, 0.2, 1e-15);
    ActivityProbs z = activity_and_decode_probs(2, 0.0, 0.1, 0.05, 6, 3);
    EXPECT_EQ(z.p_A, 0.0);
    EXPECT_NEAR(z.p_1, 0.9, 1e-15);
    EXPECT_EQ(z.p_2, 0.0);
    EXPECT_NEAR(activity_and_decode_probs(1, 0.01, 0.1, 0.05, 10, 4).p_A, 1.0 - std::pow(0.99, 7), 1e-15);
}

TEST(BroadbandPaoi, Examples)
{
    AccessConfig c = pnoma(3, 6, 2, 1);
    EXPECT_NEAR(broadband_success_paoi(6, c, {0.0, 0.0, 0.05}), 1.0, 1e-15);
    EXPECT_EQ(broadband_success_paoi(2, c, {0.1, 0.1, 0.05}), 0.0);
    AccessConfig t2 = pnoma(22, 29, 5, 1);
    TrafficModel tm{0.01, 0.1, 0.05};
    double ps = broadband_success_paoi(29, t2, tm);
    EXPECT_GE(22 * ps / 29, 0.75);
    // Same quantity as the LR route at Q = 1.
    EXPECT_NEAR(ps, pnoma_broadband_success(t2, tm, pnoma_queue_profile(29, 5, 0.01, 1)), 1e-12);
}

TEST(FirstDecodePnoma, Cases)
{
    FirstDecode none = first_decode_pmf(pnoma(2, 4, 2, 1), {0.3, 1.0, 1.0});
    for (double v : none.p_F) EXPECT_EQ(v, 0.0);
    FirstDecode m1 = first_decode_pmf(pnoma(2, 4, 1, 1), {0.3, 0.1, 0.05});
    EXPECT_EQ(m1.p_F.size(), 1u);
    EXPECT_NEAR(m1.p_s2, 1.0 - m1.any, 1e-15);
}

TEST(EventDelayPnoma, Cases)
{
    EventDelay e1 = event_and_delay_pmfs(1, pnoma(2, 4, 2, 1), {0.3, 0.1, 0.05});
    EXPECT_NEAR(e1.p_T.at(0), 1.0, 1e-15);
    AccessConfig pre = pnoma(2, 5, 2, 1);
    for (int d = 1; d <= 2; ++d) {
        EventDelay e = event_and_delay_pmfs(d, pre, {0.3, 0.0, 0.05});
        EXPECT_NEAR(e.p_T.at(0), 1.0, 1e-15);
    }
}

TEST(PaoiPnoma, Normalization)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        int N = 1 + static_cast<int>(u(rng) * 30), K = 1 + static_cast<int>(u(rng) * N), M = 1 + static_cast<int>(u(rng) * N);
        AccessConfig c = pnoma(K, N, M, 1);
        TrafficModel tm{0.05 + 0.9 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
        DiscretePmf p = paoi_pmf_pnoma(c, tm);
        if (p.defect == 1.0) continue;
        ASSERT_NEAR(p.total() + p.truncated, 1.0, 1e-9) << K << " " << N << " " << M;
        for (int i = 1; i <= M; ++i) {
            if (trial % 50) break;
            DiscretePmf z = interarrival_pmf(i, c, tm);
            ASSERT_NEAR(z.total() + z.truncated, 1.0, 1e-9);
        }
    }
}

TEST(PaoiPnoma, StructuralCases)
{
    DiscretePmf w = buffering_pmf(6, 6, 0.3);
    EXPECT_NEAR(w.at(0), 1.0, 1e-15);
    AccessConfig c = pnoma(2, 4, 1, 1);
    DiscretePmf z = interarrival_pmf(1, c, {0.3, 0.1, 0.05});
    for (std::int64_t t = 1; t < 3; ++t) EXPECT_EQ(z.at(t), 0.0);
}

TEST(PaoiPnoma, MatchesSimulationTinyCase)
{
    AccessConfig c = pnoma(2, 4, 2, 1);
    TrafficModel tm{0.3, 0.1, 0.05};
    DiscretePmf p = paoi_pmf_pnoma(c, tm);
    SimRun run;
    run.slots = 4'000'000;
    run.seed = 202;
    EmpiricalKpis k = run_simulation(c, tm, CaptureChannel{}, run);
    EXPECT_EQ(k.identity_violations, 0);
    EXPECT_LT(total_variation(p, k.paoi_hist), 0.02);
    FirstDecode fd = first_decode_pmf(c, tm);
    double any = 0.0;
    for (double v : fd.p_F) any += v;
    EXPECT_GT(any, 0.0);
}
