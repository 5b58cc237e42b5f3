#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicing {

enum class Scheme { OMA, NOMA, PNOMA };

inline std::string to_string(Scheme s)
{
    switch (s) {
    case Scheme::OMA: return "OMA";
    case Scheme::NOMA: return "NOMA";
    case Scheme::PNOMA: return "PNOMA";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    if (s == "OMA") return Scheme::OMA;
    if (s == "NOMA") return Scheme::NOMA;
    if (s == "PNOMA") return Scheme::PNOMA;
    return std::nullopt;
}

// Thrown by validate(); key names the offending field.
struct ConfigError : std::invalid_argument {
    std::string key;
    ConfigError(std::string k, const std::string& what)
        : std::invalid_argument(k + ": " + what), key(std::move(k)) {}
};

struct AccessConfig {
    Scheme scheme = Scheme::OMA;
    int K = 1;
    int N = 1;
    int T_int = 2;  // OMA only
    int M = 1;      // PNOMA; NOMA forces M = N
    int Q = 1;

    // Number of mixed slots actually used by the scheme.
    int mixed() const { return scheme == Scheme::NOMA ? N : M; }

    void validate() const
    {
        if (K < 1) throw ConfigError("K", "must be >= 1");
        if (N < K) throw ConfigError("N", "must be >= K");
        if (Q < 1) throw ConfigError("Q", "must be >= 1");
        if (scheme == Scheme::OMA && T_int < 2) throw ConfigError("T_int", "must be >= 2 for OMA");
        if (scheme == Scheme::PNOMA && (M < 1 || M > N)) throw ConfigError("M", "must satisfy 1 <= M <= N");
        if (scheme == Scheme::NOMA && M != N) throw ConfigError("M", "NOMA requires M = N");
    }

    bool operator==(const AccessConfig&) const = default;
};

struct TrafficModel {
    double alpha = 0.01;
    double eps1 = 0.1;
    double eps2 = 0.05;

    void validate() const
    {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(alpha)) throw ConfigError("alpha", "must lie in [0,1]");
        if (!in01(eps1)) throw ConfigError("eps1", "must lie in [0,1]");
        if (!in01(eps2)) throw ConfigError("eps2", "must lie in [0,1]");
    }
};

// Integer-supported mass with an explicit defect (mass at +infinity).
struct DiscretePmf {
    std::int64_t offset = 0;
    std::vector<double> masses;
    double defect = 0.0;
    // Mass dropped by horizon truncation of an infinite support; not part of defect.
    double truncated = 0.0;

    static DiscretePmf make(std::int64_t offset, std::vector<double> masses, double defect, double truncated = 0.0)
    {
        for (double& m : masses) {
            if (m < -1e-12 || !std::isfinite(m)) throw std::domain_error("DiscretePmf: negative or non-finite mass");
            if (m < 0.0) m = 0.0;
        }
        if (defect < 0.0 && defect > -1e-12) defect = 0.0;
        DiscretePmf p{offset, std::move(masses), defect, truncated};
        double s = p.total() + p.defect;
        if (std::abs(s - 1.0) > 1e-9) throw std::domain_error("DiscretePmf: total mass " + std::to_string(s));
        return p;
    }

    static DiscretePmf point(std::int64_t t) { return DiscretePmf{t, {1.0}, 0.0, 0.0}; }
    static DiscretePmf lost() { return DiscretePmf{0, {}, 1.0, 0.0}; }

    double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

    double at(std::int64_t t) const
    {
        std::int64_t i = t - offset;
        if (i < 0 || i >= static_cast<std::int64_t>(masses.size())) return 0.0;
        return masses[static_cast<std::size_t>(i)];
    }

    std::int64_t last() const { return offset + static_cast<std::int64_t>(masses.size()) - 1; }

    // Mass conditioned on being finite.
    DiscretePmf conditional() const
    {
        double s = total();
        DiscretePmf c{offset, masses, 0.0, 0.0};
        if (s > 0.0)
            for (double& m : c.masses) m /= s;
        return c;
    }

    double mean_finite() const
    {
        double s = 0.0, w = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            s += masses[i] * static_cast<double>(offset + static_cast<std::int64_t>(i));
            w += masses[i];
        }
        return w > 0.0 ? s / w : 0.0;
    }
};

struct QueueDistribution {
    std::vector<double> probs;

    int capacity() const { return static_cast<int>(probs.size()) - 1; }

    static QueueDistribution empty(int Q)
    {
        QueueDistribution d{std::vector<double>(static_cast<std::size_t>(Q) + 1, 0.0)};
        d.probs[0] = 1.0;
        return d;
    }
};

struct KpiReport {
    double s1 = 0.0;
    double p_s1 = 0.0;
    double p_s2 = 0.0;
    DiscretePmf latency;
    DiscretePmf paoi;
    bool has_paoi = false;  // PAoI is only defined for Q = 1
    std::optional<std::int64_t> l90;
    std::optional<std::int64_t> d90;
};

namespace detail {

inline const std::array<std::array<std::uint64_t, 65>, 65>& pascal()
{
    static const auto table = [] {
        std::array<std::array<std::uint64_t, 65>, 65> t{};
        for (int n = 0; n <= 64; ++n) {
            t[n][0] = 1;
            for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

inline double log_choose(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// p^k with 0^0 = 1.
inline double ipow(double p, int k) { return k == 0 ? 1.0 : std::pow(p, k); }

}  // namespace detail

// Exact for n <= 64, log-gamma otherwise.
inline double binomial_coefficient(int n, int k)
{
    if (k < 0 || n < 0 || k > n) return 0.0;
    if (n <= 64) return static_cast<double>(detail::pascal()[n][k]);
    return std::exp(detail::log_choose(n, k));
}

inline double binomial_pmf(int k, int n, double p)
{
    if (n < 0 || k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    if (n <= 64) return binomial_coefficient(n, k) * detail::ipow(p, k) * detail::ipow(1.0 - p, n - k);
    return std::exp(detail::log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Pr[Bin(n,p) >= k].
inline double binomial_tail(int k, int n, double p)
{
    if (k <= 0) return 1.0;
    double s = 0.0;
    for (int r = k; r <= n; ++r) s += binomial_pmf(r, n, p);
    return std::min(s, 1.0);
}

// Mult(counts; n, ps) with the residual category n - sum(counts) at probability 1 - sum(ps).
inline double multinomial_pmf(const std::vector<int>& counts, int n, const std::vector<double>& ps)
{
    if (counts.size() != ps.size()) throw std::invalid_argument("multinomial_pmf: size mismatch");
    double psum = std::accumulate(ps.begin(), ps.end(), 0.0);
    if (psum > 1.0 + 1e-12) throw std::invalid_argument("multinomial_pmf: probabilities sum above 1");
    double rest_p = std::max(0.0, 1.0 - psum);
    int used = 0;
    for (int c : counts) {
        if (c < 0) return 0.0;
        used += c;
    }
    if (used > n) return 0.0;
    double mass = 1.0;
    int left = n;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (ps[i] <= 0.0 && counts[i] > 0) return 0.0;
        mass *= binomial_coefficient(left, counts[i]) * detail::ipow(ps[i], counts[i]);
        left -= counts[i];
    }
    if (rest_p <= 0.0 && left > 0) return 0.0;
    return mass * detail::ipow(rest_p, left);
}

// min{n : Pr[X <= n] > q}; nullopt when the finite mass never exceeds q.
inline std::optional<std::int64_t> pmf_percentile(const DiscretePmf& pmf, double q)
{
    double cdf = 0.0;
    for (std::size_t i = 0; i < pmf.masses.size(); ++i) {
        cdf += pmf.masses[i];
        if (cdf > q + 1e-12) return pmf.offset + static_cast<std::int64_t>(i);
    }
    return std::nullopt;
}

// Total variation including the defect atom.
inline double total_variation(const DiscretePmf& a, const DiscretePmf& b)
{
    std::int64_t lo = std::min(a.offset, b.offset);
    std::int64_t hi = std::max(a.last(), b.last());
    double s = std::abs(a.defect - b.defect);
    for (std::int64_t t = lo; t <= hi; ++t) s += std::abs(a.at(t) - b.at(t));
    return 0.5 * s;
}

// Full convolution of two mass vectors.
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

inline std::vector<double> binomial_row(int n, double p)
{
    std::vector<double> r(static_cast<std::size_t>(std::max(n, 0)) + 1);
    for (int k = 0; k <= n; ++k) r[static_cast<std::size_t>(k)] = binomial_pmf(k, n, p);
    return r;
}

}  // namespace slicing
