#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slicing/model_core.hpp"
#include "slicing/simulator.hpp"
#include "slicing/sweep.hpp"

namespace slicing {

enum class Command { Analyze, Simulate, Sweep, Optimize };

inline std::optional<Command> parse_command(const std::string& s)
{
    if (s == "analyze") return Command::Analyze;
    if (s == "simulate") return Command::Simulate;
    if (s == "sweep") return Command::Sweep;
    if (s == "optimize") return Command::Optimize;
    return std::nullopt;
}

namespace exit_code {
constexpr int ok = 0;
constexpr int config = 2;
constexpr int infeasible = 3;
constexpr int io = 4;
}  // namespace exit_code

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunSpec {
    Command command = Command::Analyze;
    std::string config_path;
    std::string out_path = ".";
    std::vector<std::pair<std::string, std::string>> overrides;

    // Effective values after file + overrides.
    AccessConfig cfg;
    TrafficModel tm;
    ChannelMode channel_mode = ChannelMode::Collision;
    double gamma_db = 5.0;
    bool sic = true;
    SimRun sim;
    int replications = 1;
    KpiKind kpi = KpiKind::LR90;
    double s_min = 0.75;
    SweepBounds bounds = SweepBounds::table_defaults(KpiKind::LR90);
    unsigned threads = 0;  // 0: hardware concurrency
};

inline std::string trim(const std::string& s)
{
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Flat key=value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in)
{
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key=value");
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

namespace detail {

inline long long to_int(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

inline double to_double(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

inline int to_small_int(const std::string& key, const std::string& v)
{
    long long x = to_int(key, v);
    if (x < -(1LL << 30) || x > (1LL << 30)) throw ConfigError(key, "out of range");
    return static_cast<int>(x);
}

inline KpiKind to_kpi(const std::string& key, const std::string& v)
{
    if (v == "lr90") return KpiKind::LR90;
    if (v == "paoi90") return KpiKind::PAoI90;
    throw ConfigError(key, "expected lr90 or paoi90, got '" + v + "'");
}

inline std::vector<int> to_int_list(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_small_int(key, trim(item)));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

struct Applied {
    bool M = false;
    bool Q_list = false;
};

inline void apply_key(RunSpec& s, Applied& seen, const std::string& k, const std::string& v)
{
    if (k == "scheme") {
        auto sc = parse_scheme(v);
        if (!sc) throw ConfigError(k, "expected OMA, NOMA or PNOMA, got '" + v + "'");
        s.cfg.scheme = *sc;
    } else if (k == "K") {
        s.cfg.K = to_small_int(k, v);
    } else if (k == "N") {
        s.cfg.N = to_small_int(k, v);
    } else if (k == "T_int") {
        s.cfg.T_int = to_small_int(k, v);
    } else if (k == "M") {
        s.cfg.M = to_small_int(k, v);
        seen.M = true;
    } else if (k == "Q") {
        s.cfg.Q = to_small_int(k, v);
    } else if (k == "alpha") {
        s.tm.alpha = to_double(k, v);
    } else if (k == "eps1") {
        s.tm.eps1 = to_double(k, v);
    } else if (k == "eps2") {
        s.tm.eps2 = to_double(k, v);
    } else if (k == "channel.mode") {
        if (v == "collision")
            s.channel_mode = ChannelMode::Collision;
        else if (v == "capture")
            s.channel_mode = ChannelMode::Capture;
        else
            throw ConfigError(k, "expected collision or capture, got '" + v + "'");
    } else if (k == "channel.gamma_db") {
        s.gamma_db = to_double(k, v);
    } else if (k == "channel.sic") {
        s.sic = to_bool(k, v);
    } else if (k == "sim.slots") {
        s.sim.slots = to_int(k, v);
        if (s.sim.slots < 1) throw ConfigError(k, "must be >= 1");
    } else if (k == "sim.seed") {
        long long x = to_int(k, v);
        if (x < 0) throw ConfigError(k, "must be >= 0");
        s.sim.seed = static_cast<std::uint64_t>(x);
    } else if (k == "sim.warmup") {
        s.sim.warmup = to_int(k, v);
    } else if (k == "sim.batches") {
        s.sim.batches = to_small_int(k, v);
        if (s.sim.batches < 1) throw ConfigError(k, "must be >= 1");
    } else if (k == "sim.replications") {
        s.replications = to_small_int(k, v);
        if (s.replications < 1) throw ConfigError(k, "must be >= 1");
    } else if (k == "kpi") {
        s.kpi = to_kpi(k, v);
    } else if (k == "smin") {
        s.s_min = to_double(k, v);
    } else if (k == "threads") {
        int t = to_small_int(k, v);
        if (t < 0) throw ConfigError(k, "must be >= 0");
        s.threads = static_cast<unsigned>(t);
    } else if (k == "sweep.K_min") {
        s.bounds.K_min = to_small_int(k, v);
    } else if (k == "sweep.K_max") {
        s.bounds.K_max = to_small_int(k, v);
    } else if (k == "sweep.N_factor") {
        s.bounds.N_max_factor = to_small_int(k, v);
    } else if (k == "sweep.T_min") {
        s.bounds.T_min = to_small_int(k, v);
    } else if (k == "sweep.T_max") {
        s.bounds.T_max = to_small_int(k, v);
    } else if (k == "sweep.M_min") {
        s.bounds.M_min = to_small_int(k, v);
    } else if (k == "sweep.M_max") {
        s.bounds.M_max = to_small_int(k, v);
    } else if (k == "sweep.Q") {
        s.bounds.Q_values = to_int_list(k, v);
        seen.Q_list = true;
    } else {
        throw ConfigError(k, "unknown key");
    }
}

}  // namespace detail

// Reads the optional config file, then applies overrides in order, then validates.
inline RunSpec parse_runspec(Command command, const std::string& config_path, const std::string& out_path,
                             std::vector<std::pair<std::string, std::string>> overrides)
{
    RunSpec s;
    s.command = command;
    s.config_path = config_path;
    s.out_path = out_path.empty() ? "." : out_path;
    s.overrides = std::move(overrides);
    std::vector<std::pair<std::string, std::string>> kv;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot read config file " + config_path);
        kv = parse_key_values(in);
    }
    kv.insert(kv.end(), s.overrides.begin(), s.overrides.end());
    detail::Applied seen;
    for (const auto& [k, v] : kv) detail::apply_key(s, seen, k, v);
    if (s.cfg.scheme == Scheme::NOMA && !seen.M) s.cfg.M = s.cfg.N;
    if (!seen.Q_list && s.kpi == KpiKind::PAoI90) s.bounds.Q_values = {1};
    s.tm.validate();
    if (s.command == Command::Analyze || s.command == Command::Simulate) s.cfg.validate();
    if (s.command == Command::Optimize && !(s.s_min >= 0.0 && s.s_min < 1.0)) throw ConfigError("smin", "must lie in [0,1)");
    if (s.bounds.K_min < 1 || s.bounds.K_min > s.bounds.K_max) throw ConfigError("sweep.K_min", "empty K range");
    if (s.bounds.N_max_factor < 1) throw ConfigError("sweep.N_factor", "must be >= 1");
    if (s.bounds.T_min < 2 || s.bounds.T_min > s.bounds.T_max) throw ConfigError("sweep.T_min", "T range must be non-empty with T_min >= 2");
    for (int q : s.bounds.Q_values)
        if (q < 1) throw ConfigError("sweep.Q", "capacities must be >= 1");
    if (s.command == Command::Simulate && s.channel_mode == ChannelMode::Capture) {
        if (!(s.tm.eps1 > 0.0 && s.tm.eps1 < 1.0)) throw ConfigError("eps1", "capture mode needs 0 < eps1 < 1");
        if (!(s.tm.eps2 > 0.0 && s.tm.eps2 < 1.0)) throw ConfigError("eps2", "capture mode needs 0 < eps2 < 1");
    }
    return s;
}

inline std::string fmt_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string fmt_percentile(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : "inf"; }

inline const char* csv_header_sweep() { return "scheme,K,N,T_int,M,Q,s1,p_s1,p_s2,l90,d90,on_frontier"; }

// Columns not defined for a scheme (T_int outside OMA, M for OMA) print as 0; PAoI outside Q = 1 prints "na".
inline std::string csv_row(const AccessConfig& c, const KpiReport& r, bool on_frontier)
{
    std::string row = to_string(c.scheme) + "," + std::to_string(c.K) + "," + std::to_string(c.N) + "," +
                      std::to_string(c.scheme == Scheme::OMA ? c.T_int : 0) + "," + std::to_string(c.scheme == Scheme::OMA ? 0 : c.mixed()) +
                      "," + std::to_string(c.Q) + "," + fmt_double(r.s1) + "," + fmt_double(r.p_s1) + "," + fmt_double(r.p_s2) + ",";
    row += r.latency.masses.empty() && r.latency.defect == 0.0 ? "na" : fmt_percentile(r.l90);
    row += ",";
    row += r.has_paoi ? fmt_percentile(r.d90) : "na";
    row += on_frontier ? ",1" : ",0";
    return row;
}

struct CsvRow {
    AccessConfig config;
    double s1 = 0.0, p_s1 = 0.0, p_s2 = 0.0;
    std::string l90, d90;
    bool on_frontier = false;
};

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    return f;
}

inline CsvRow parse_csv_row(const std::string& line)
{
    auto f = split_csv(line);
    if (f.size() != 12) throw std::invalid_argument("sweep row: expected 12 fields");
    CsvRow r;
    auto sc = parse_scheme(f[0]);
    if (!sc) throw std::invalid_argument("sweep row: bad scheme");
    r.config.scheme = *sc;
    r.config.K = std::stoi(f[1]);
    r.config.N = std::stoi(f[2]);
    r.config.T_int = std::stoi(f[3]);
    r.config.M = std::stoi(f[4]);
    r.config.Q = std::stoi(f[5]);
    r.s1 = std::stod(f[6]);
    r.p_s1 = std::stod(f[7]);
    r.p_s2 = std::stod(f[8]);
    r.l90 = f[9];
    r.d90 = f[10];
    r.on_frontier = f[11] == "1";
    return r;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

inline void write_pmf(const std::filesystem::path& p, const DiscretePmf& pmf)
{
    auto f = open_out(p);
    f << "t,mass\n";
    for (std::size_t i = 0; i < pmf.masses.size(); ++i)
        f << pmf.offset + static_cast<std::int64_t>(i) << "," << fmt_double(pmf.masses[i]) << "\n";
    f << "inf," << fmt_double(pmf.defect) << "\n";
    if (!f) throw IoError("write failed: " + p.string());
}

inline void ensure_dir(const std::filesystem::path& d)
{
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    if (ec || !std::filesystem::is_directory(d)) throw IoError("cannot create output directory " + d.string());
}

inline unsigned thread_count(unsigned t) { return t ? t : std::max(1u, std::thread::hardware_concurrency()); }

inline void run_analyze(const RunSpec& s, const std::filesystem::path& out)
{
    KpiReport r = analyze(s.cfg, s.tm);
    auto f = open_out(out / "kpis.csv");
    f << "kpi,value\n";
    f << "s1," << fmt_double(r.s1) << "\n";
    f << "p_s1," << fmt_double(r.p_s1) << "\n";
    f << "p_s2," << fmt_double(r.p_s2) << "\n";
    f << "l90," << fmt_percentile(r.l90) << "\n";
    f << "d90," << (r.has_paoi ? fmt_percentile(r.d90) : "na") << "\n";
    if (!f) throw IoError("write failed: kpis.csv");
    write_pmf(out / "latency_pmf.csv", r.latency);
    if (r.has_paoi) write_pmf(out / "paoi_pmf.csv", r.paoi);
}

inline void run_simulate(const RunSpec& s, const std::filesystem::path& out)
{
    CaptureChannel ch;
    if (s.channel_mode == ChannelMode::Capture) ch = capture_channel(s.gamma_db, s.tm.eps1, s.tm.eps2, s.sic);
    ch.validate();
    EmpiricalKpis k = s.replications > 1 ? run_replications(s.cfg, s.tm, ch, s.sim, s.replications, thread_count(s.threads))
                                         : run_simulation(s.cfg, s.tm, ch, s.sim);
    auto f = open_out(out / "simulate.csv");
    f << "kpi,estimate,stderr\n";
    f << "s1," << fmt_double(k.s1.value) << "," << fmt_double(k.s1.stderr_) << "\n";
    f << "p_s1," << fmt_double(k.p_s1.value) << "," << fmt_double(k.p_s1.stderr_) << "\n";
    f << "p_s2," << fmt_double(k.p_s2.value) << "," << fmt_double(k.p_s2.stderr_) << "\n";
    auto l = k.latency_hist.masses.empty() && k.latency_hist.defect == 0.0 ? std::nullopt : pmf_percentile(k.latency_hist, 0.9);
    auto d = k.paoi_hist.masses.empty() ? std::nullopt : pmf_percentile(k.paoi_hist, 0.9);
    f << "l90," << fmt_percentile(l) << ",na\n";
    f << "d90," << fmt_percentile(d) << ",na\n";
    f << "packets," << k.packets << ",na\n";
    f << "frames," << k.frames << ",na\n";
    f << "paoi_samples," << k.paoi_samples << ",na\n";
    if (!f) throw IoError("write failed: simulate.csv");
    write_pmf(out / "sim_latency_pmf.csv", k.latency_hist);
    write_pmf(out / "sim_paoi_pmf.csv", k.paoi_hist);
}

inline void run_sweep(const RunSpec& s, const std::filesystem::path& out)
{
    auto rows = sweep(s.cfg.scheme, s.tm, s.kpi, s.bounds, thread_count(s.threads));
    auto f = open_out(out / "sweep.csv");
    f << csv_header_sweep() << "\n";
    for (const auto& r : rows) f << csv_row(r.config, r.report, r.on_frontier) << "\n";
    if (!f) throw IoError("write failed: sweep.csv");
}

inline bool run_optimize(const RunSpec& s, const std::filesystem::path& out)
{
    OptimizeResult r = optimize_config(s.cfg.scheme, s.tm, s.s_min, s.kpi, s.bounds, thread_count(s.threads));
    auto f = open_out(out / "optimize.csv");
    f << csv_header_sweep() << "\n";
    if (r.feasible) f << csv_row(r.config, r.report, true) << "\n";
    if (!f) throw IoError("write failed: optimize.csv");
    return r.feasible;
}

}  // namespace detail

// Runs the command; errors are reported on err and mapped to exit codes.
inline int execute(const RunSpec& s, std::ostream& err)
{
    try {
        std::filesystem::path out(s.out_path);
        detail::ensure_dir(out);
        switch (s.command) {
        case Command::Analyze: detail::run_analyze(s, out); break;
        case Command::Simulate: detail::run_simulate(s, out); break;
        case Command::Sweep: detail::run_sweep(s, out); break;
        case Command::Optimize:
            if (!detail::run_optimize(s, out)) {
                err << "no feasible config\n";
                return exit_code::infeasible;
            }
            break;
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    }
    return exit_code::ok;
}

}  // namespace slicing
