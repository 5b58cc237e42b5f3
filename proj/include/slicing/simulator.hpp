#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "slicing/model_core.hpp"

namespace slicing {

enum class ChannelMode { Collision, Capture };

struct CaptureChannel {
    ChannelMode mode = ChannelMode::Collision;
    double gamma = 1.0;  // linear SNR threshold
    double mean_snr_1 = 1.0;
    double mean_snr_2 = 1.0;
    bool sic = true;

    void validate() const
    {
        if (!(gamma > 0.0)) throw ConfigError("channel.gamma_db", "threshold must be positive");
        if (mode == ChannelMode::Capture && !(mean_snr_1 > 0.0 && mean_snr_2 > 0.0))
            throw ConfigError("channel.mode", "capture mode needs positive mean SNRs");
    }
};

// Exponential (Rayleigh power) mean giving Pr[SNR < gamma] = eps.
inline double calibrate_mean_snr(double eps, double gamma)
{
    if (eps <= 0.0) throw std::domain_error("infinite SNR required");
    if (eps >= 1.0) return 0.0;
    return -gamma / std::log1p(-eps);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Capture channel whose solo-slot erasure probabilities equal eps1, eps2.
inline CaptureChannel capture_channel(double gamma_db, double eps1, double eps2, bool sic = true)
{
    CaptureChannel c;
    c.mode = ChannelMode::Capture;
    c.gamma = db_to_linear(gamma_db);
    c.mean_snr_1 = eps1 > 0.0 ? calibrate_mean_snr(eps1, c.gamma) : std::numeric_limits<double>::infinity();
    c.mean_snr_2 = eps2 > 0.0 ? calibrate_mean_snr(eps2, c.gamma) : std::numeric_limits<double>::infinity();
    c.sic = sic;
    return c;
}

enum class Outcome { Idle, Decoded, Erased, Collided };

struct FadingDraw {
    double snr1 = 0.0;
    double snr2 = 0.0;
};

struct SlotOutcome {
    Outcome user1 = Outcome::Idle;
    Outcome user2 = Outcome::Idle;
};

inline SlotOutcome resolve_slot(bool active1, bool active2, const FadingDraw& f, const CaptureChannel& ch)
{
    SlotOutcome r;
    const double g = ch.gamma;
    if (active1 && !active2) {
        r.user1 = f.snr1 >= g ? Outcome::Decoded : Outcome::Erased;
        return r;
    }
    if (active2 && !active1) {
        r.user2 = f.snr2 >= g ? Outcome::Decoded : Outcome::Erased;
        return r;
    }
    if (!active1) return r;
    r.user1 = r.user2 = Outcome::Collided;
    if (ch.mode == ChannelMode::Collision) return r;
    const double sinr1 = f.snr1 / (1.0 + f.snr2);
    const double sinr2 = f.snr2 / (1.0 + f.snr1);
    if (sinr1 >= g) {
        r.user1 = Outcome::Decoded;
        if (ch.sic) r.user2 = f.snr2 >= g ? Outcome::Decoded : Outcome::Erased;
    } else if (sinr2 >= g) {
        r.user2 = Outcome::Decoded;
        if (ch.sic) r.user1 = f.snr1 >= g ? Outcome::Decoded : Outcome::Erased;
    }
    return r;
}

struct SimRun {
    std::int64_t slots = 10'000'000;
    std::uint64_t seed = 1;
    std::int64_t warmup = -1;  // -1: 10 * N * max(T_int, 1)
    int batches = 50;
    std::ostream* log = nullptr;        // optional "slot,event,user,latency" records
    bool record_packets = false;        // keep per-packet outcomes
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct PacketRecord {
    std::int64_t generated = 0;
    std::int64_t received = -1;  // -1: lost
};

struct EmpiricalKpis {
    Estimate s1, p_s1, p_s2;
    DiscretePmf latency_hist;  // over packets generated in the window; defect = loss fraction
    DiscretePmf paoi_hist;     // over PAoI samples
    std::int64_t packets = 0;
    std::int64_t frames = 0;
    std::int64_t paoi_samples = 0;
    std::int64_t identity_violations = 0;
    std::vector<PacketRecord> packet_log;

    bool operator==(const EmpiricalKpis& o) const
    {
        auto same = [](const DiscretePmf& a, const DiscretePmf& b) { return a.offset == b.offset && a.masses == b.masses && a.defect == b.defect; };
        auto eq = [](const Estimate& a, const Estimate& b) { return a.value == b.value && a.stderr_ == b.stderr_; };
        return eq(s1, o.s1) && eq(p_s1, o.p_s1) && eq(p_s2, o.p_s2) && same(latency_hist, o.latency_hist) &&
               same(paoi_hist, o.paoi_hist) && packets == o.packets && frames == o.frames && paoi_samples == o.paoi_samples &&
               identity_violations == o.identity_violations;
    }
};

// Raw counts; merging is associative so replications can be combined in any grouping.
struct SimCounters {
    std::int64_t K = 1;
    std::vector<std::int64_t> latency;  // count per latency value
    std::int64_t lost = 0;
    std::vector<std::int64_t> paoi;
    std::int64_t identity_violations = 0;
    struct Batch {
        std::int64_t slots = 0, frames = 0, decoded = 0, generated = 0, received = 0;
    };
    std::vector<Batch> batches;
    std::vector<PacketRecord> packet_log;

    static void add_at(std::vector<std::int64_t>& h, std::int64_t v, std::int64_t c = 1)
    {
        if (v < 0) throw std::logic_error("negative sample");
        if (static_cast<std::size_t>(v) >= h.size()) h.resize(static_cast<std::size_t>(v) + 1, 0);
        h[static_cast<std::size_t>(v)] += c;
    }

    void merge(const SimCounters& o)
    {
        for (std::size_t i = 0; i < o.latency.size(); ++i) add_at(latency, static_cast<std::int64_t>(i), o.latency[i]);
        for (std::size_t i = 0; i < o.paoi.size(); ++i) add_at(paoi, static_cast<std::int64_t>(i), o.paoi[i]);
        lost += o.lost;
        identity_violations += o.identity_violations;
        batches.insert(batches.end(), o.batches.begin(), o.batches.end());
        packet_log.insert(packet_log.end(), o.packet_log.begin(), o.packet_log.end());
    }
};

namespace detail {

inline double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline double draw_snr(double u, double eps, double mean, const CaptureChannel& ch)
{
    if (ch.mode == ChannelMode::Collision) return u < eps ? 0.0 : std::numeric_limits<double>::infinity();
    if (!std::isfinite(mean)) return std::numeric_limits<double>::infinity();
    return -mean * std::log1p(-u);
}

template <class V>
Estimate batch_estimate(const std::vector<SimCounters::Batch>& bs, double total_value, V&& value_of)
{
    Estimate e{total_value, 0.0};
    std::vector<double> v;
    for (const auto& b : bs) {
        auto x = value_of(b);
        if (x) v.push_back(*x);
    }
    if (v.size() < 2) return e;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return e;
}

class Simulation {
public:
    Simulation(const AccessConfig& cfg, const TrafficModel& tm, const CaptureChannel& ch, const SimRun& run)
        : cfg_(cfg), tm_(tm), ch_(ch), run_(run)
    {
        if (cfg_.scheme == Scheme::NOMA) cfg_.M = cfg_.N;
        cfg_.validate();
        tm_.validate();
        ch_.validate();
        warmup_ = run.warmup >= 0 ? run.warmup : 10LL * cfg_.N * std::max(cfg_.scheme == Scheme::OMA ? cfg_.T_int : 1, 1);
        if (run.slots <= warmup_) throw std::invalid_argument("SimRun: slots must exceed warmup");
        const auto lo = static_cast<std::uint32_t>(run.seed), hi = static_cast<std::uint32_t>(run.seed >> 32);
        std::seed_seq s0{lo, hi, 0u}, s1{lo, hi, 1u}, s2{lo, hi, 2u};
        arrivals_.seed(s0);
        ch1_.seed(s1);
        ch2_.seed(s2);
        nb_ = std::max(run.batches, 1);
        c_.K = cfg_.K;
        c_.batches.assign(static_cast<std::size_t>(nb_), {});
        drain_ = static_cast<std::int64_t>(cfg_.Q + 2) * (cfg_.N + cfg_.T_int + 1) * (cfg_.scheme == Scheme::OMA ? cfg_.T_int : 1);
    }

    SimCounters run()
    {
        const std::int64_t end = run_.slots + drain_;
        for (std::int64_t t = 0; t < end; ++t) step(t);
        for (int b = 0; b < nb_; ++b) {
            std::int64_t lo = batch_lo(b), hi = batch_lo(b + 1);
            c_.batches[static_cast<std::size_t>(b)].slots = hi - lo;
        }
        return std::move(c_);
    }

private:
    struct Stored {
        std::int64_t generated;
        bool recoverable;
    };
    struct Frame {
        std::int64_t start = 0;
        int good = 0;
        int slots_used = 0;
        bool decoded = false;
        std::vector<Stored> stored;
    };

    std::int64_t batch_lo(int b) const { return warmup_ + (run_.slots - warmup_) * b / nb_; }

    int batch_of(std::int64_t t) const
    {
        if (t < warmup_ || t >= run_.slots) return -1;
        int b = static_cast<int>((t - warmup_) * nb_ / (run_.slots - warmup_));
        return std::min(b, nb_ - 1);
    }

    void log(std::int64_t t, const char* ev, int user, std::int64_t lat)
    {
        if (run_.log) *run_.log << t << ',' << ev << ',' << user << ',' << lat << '\n';
    }

    void lose(std::int64_t t, std::int64_t g)
    {
        log(t, "lost", 2, -1);
        int b = batch_of(g);
        if (b < 0) return;
        ++c_.lost;
        ++c_.batches[static_cast<std::size_t>(b)].generated;
        if (run_.record_packets) c_.packet_log.push_back({g, -1});
    }

    void receive(std::int64_t t, std::int64_t g)
    {
        log(t, "rx", 2, t - g);
        rx_now_.push_back(g);
        int b = batch_of(g);
        if (b < 0) return;
        SimCounters::add_at(c_.latency, t - g);
        auto& bt = c_.batches[static_cast<std::size_t>(b)];
        ++bt.generated;
        ++bt.received;
        if (run_.record_packets) c_.packet_log.push_back({g, t});
    }

    void frame_done(const Frame& f, std::int64_t t)
    {
        log(t, f.decoded ? "frame_ok" : "frame_fail", 1, -1);
        int b = batch_of(f.start);
        if (b < 0) return;
        auto& bt = c_.batches[static_cast<std::size_t>(b)];
        ++bt.frames;
        if (f.decoded) ++bt.decoded;
    }

    void on_broadband_good(std::int64_t t)
    {
        if (frame_.decoded) return;
        if (++frame_.good >= cfg_.K) {
            frame_.decoded = true;
            for (const Stored& s : frame_.stored) {
                if (s.recoverable)
                    receive(t, s.generated);
                else
                    lose(t, s.generated);
            }
            frame_.stored.clear();
        }
    }

    void close_frame(std::int64_t t)
    {
        for (const Stored& s : frame_.stored) lose(t, s.generated);
        frame_.stored.clear();
        frame_done(frame_, t);
    }

    void step(std::int64_t t)
    {
        rx_now_.clear();
        const bool arrival = unit(arrivals_) < tm_.alpha;
        FadingDraw fd{draw_snr(unit(ch1_), tm_.eps1, ch_.mean_snr_1, ch_), draw_snr(unit(ch2_), tm_.eps2, ch_.mean_snr_2, ch_)};
        if (arrival) {
            if (static_cast<int>(queue_.size()) == cfg_.Q) {
                lose(t, queue_.front());
                queue_.pop_front();
            }
            queue_.push_back(t);
        }
        bool allow1, allow2;
        if (cfg_.scheme == Scheme::OMA) {
            allow2 = t % cfg_.T_int == cfg_.T_int - 1;
            allow1 = !allow2;
        } else {
            std::int64_t pos = t % cfg_.N;
            allow1 = true;
            allow2 = pos >= cfg_.N - cfg_.M;
        }
        if (allow1 && frame_.slots_used == 0) frame_.start = t;
        const bool active2 = allow2 && !queue_.empty();
        SlotOutcome o = resolve_slot(allow1, active2, fd, ch_);
        std::int64_t sent = -1;
        if (active2) {
            sent = queue_.front();
            queue_.pop_front();
        }
        if (allow1) {
            ++frame_.slots_used;
            if (o.user1 == Outcome::Decoded) on_broadband_good(t);
        }
        if (active2) {
            if (o.user2 == Outcome::Decoded) {
                receive(t, sent);
            } else if (o.user2 == Outcome::Erased) {
                lose(t, sent);
            } else {  // collided: recoverable by SIC once the frame is known
                bool ok = fd.snr2 >= ch_.gamma;
                if (frame_.decoded) {
                    if (ok)
                        receive(t, sent);
                    else
                        lose(t, sent);
                } else {
                    frame_.stored.push_back({sent, ok});
                }
            }
        }
        if (allow1 && frame_.slots_used == cfg_.N) {
            close_frame(t);
            frame_ = Frame{};
        }
        if (!rx_now_.empty()) paoi_update(t);
    }

    void paoi_update(std::int64_t t)
    {
        std::int64_t g = rx_now_.front();
        for (std::int64_t x : rx_now_) g = std::max(g, x);
        if (have_prev_ && g <= last_gen_) return;
        if (have_prev_ && t >= warmup_ && t < run_.slots) {
            std::int64_t delta = t - last_gen_;
            if (delta != (t - last_rx_) + last_lat_) ++c_.identity_violations;
            SimCounters::add_at(c_.paoi, delta);
        }
        have_prev_ = true;
        last_gen_ = g;
        last_rx_ = t;
        last_lat_ = t - g;
    }

    AccessConfig cfg_;
    TrafficModel tm_;
    CaptureChannel ch_;
    SimRun run_;
    std::int64_t warmup_ = 0, drain_ = 0;
    int nb_ = 1;
    std::mt19937_64 arrivals_, ch1_, ch2_;
    std::deque<std::int64_t> queue_;
    Frame frame_;
    std::vector<std::int64_t> rx_now_;
    bool have_prev_ = false;
    std::int64_t last_gen_ = 0, last_rx_ = 0, last_lat_ = 0;
    SimCounters c_;
};

inline DiscretePmf histogram_pmf(const std::vector<std::int64_t>& h, std::int64_t lost)
{
    double total = static_cast<double>(lost);
    for (auto v : h) total += static_cast<double>(v);
    if (total <= 0.0) return DiscretePmf{0, {}, 0.0, 0.0};
    std::vector<double> m(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) m[i] = static_cast<double>(h[i]) / total;
    return DiscretePmf{0, std::move(m), static_cast<double>(lost) / total, 0.0};
}

}  // namespace detail

inline SimCounters simulate_counters(const AccessConfig& cfg, const TrafficModel& tm, const CaptureChannel& ch, const SimRun& run)
{
    return detail::Simulation(cfg, tm, ch, run).run();
}

inline EmpiricalKpis summarize(const SimCounters& c)
{
    using B = SimCounters::Batch;
    B tot;
    for (const B& b : c.batches) {
        tot.slots += b.slots;
        tot.frames += b.frames;
        tot.decoded += b.decoded;
        tot.generated += b.generated;
        tot.received += b.received;
    }
    EmpiricalKpis k;
    const double K = static_cast<double>(c.K);
    auto ratio = [](std::int64_t a, std::int64_t b) -> std::optional<double> {
        if (b == 0) return std::nullopt;
        return static_cast<double>(a) / static_cast<double>(b);
    };
    k.s1 = detail::batch_estimate(c.batches, tot.slots ? K * tot.decoded / static_cast<double>(tot.slots) : 0.0,
                                  [K](const B& b) -> std::optional<double> {
                                      if (b.slots == 0) return std::nullopt;
                                      return K * b.decoded / static_cast<double>(b.slots);
                                  });
    k.p_s1 = detail::batch_estimate(c.batches, ratio(tot.decoded, tot.frames).value_or(0.0), [&](const B& b) { return ratio(b.decoded, b.frames); });
    k.p_s2 = detail::batch_estimate(c.batches, ratio(tot.received, tot.generated).value_or(0.0),
                                    [&](const B& b) { return ratio(b.received, b.generated); });
    k.latency_hist = detail::histogram_pmf(c.latency, c.lost);
    k.paoi_hist = detail::histogram_pmf(c.paoi, 0);
    // No fresh update ever arrived: the peak age is unbounded.
    if (k.paoi_hist.masses.empty()) k.paoi_hist = DiscretePmf::lost();
    k.packets = tot.generated;
    k.frames = tot.frames;
    for (auto v : c.paoi) k.paoi_samples += v;
    k.identity_violations = c.identity_violations;
    k.packet_log = c.packet_log;
    return k;
}

inline EmpiricalKpis run_simulation(const AccessConfig& cfg, const TrafficModel& tm, const CaptureChannel& ch, const SimRun& run)
{
    return summarize(simulate_counters(cfg, tm, ch, run));
}

// Independent replications with seeds seed, seed+1, ...; merged in replication order.
inline EmpiricalKpis run_replications(const AccessConfig& cfg, const TrafficModel& tm, const CaptureChannel& ch, const SimRun& run,
                                       int replications, unsigned threads = std::thread::hardware_concurrency())
{
    std::vector<SimCounters> parts(static_cast<std::size_t>(replications));
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replications)));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int r = static_cast<int>(w); r < replications; r += static_cast<int>(threads)) {
                SimRun rr = run;
                rr.seed = run.seed + static_cast<std::uint64_t>(r);
                rr.log = nullptr;
                parts[static_cast<std::size_t>(r)] = simulate_counters(cfg, tm, ch, rr);
            }
        });
    for (auto& th : pool) th.join();
    SimCounters all;
    all.K = cfg.K;
    for (const auto& p : parts) all.merge(p);
    return summarize(all);
}

struct Percentiles {
    std::optional<std::int64_t> latency;
    std::optional<std::int64_t> paoi;
};

inline Percentiles empirical_kpis_summary(const EmpiricalKpis& k, double q)
{
    if (k.latency_hist.masses.empty() && k.latency_hist.defect == 0.0) throw std::invalid_argument("empty histogram");
    Percentiles p;
    p.latency = pmf_percentile(k.latency_hist, q);
    if (!k.paoi_hist.masses.empty()) p.paoi = pmf_percentile(k.paoi_hist, q);
    return p;
}

}  // namespace slicing
