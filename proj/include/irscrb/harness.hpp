#ifndef IRSCRB_HARNESS_HPP
#define IRSCRB_HARNESS_HPP

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "config.hpp"

namespace irscrb {

// ---- logging ------------------------------------------------------------

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// IRSCRB_LOG = error | warn | info | debug (or 0..3); default warn.
inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* e = std::getenv("IRSCRB_LOG");
    if (!e) return LogLevel::Warn;
    const std::string s(e);
    if (s == "error" || s == "0") return LogLevel::Error;
    if (s == "info" || s == "2") return LogLevel::Info;
    if (s == "debug" || s == "3") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return lvl;
}

inline void log(LogLevel lvl, const std::string& msg) {
  static std::mutex mu;
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

// ---- sweep --------------------------------------------------------------

struct SweepRow {
  SensingCase sc = SensingCase::AtBs;
  Scheme scheme = Scheme::Proposed;
  double value = 0.0;
  double a_max = 0.0;
  int draw = 0;
  bool ok = false;
  std::string status;
  std::string error;
  double max_crb = 0.0;
  std::vector<double> irs_crb;
  int outer_iters = 0;
  int sca_iters = 0;
  double wall_time = 0.0;
};

// Seed for the optimizer's own streams on one channel draw; independent of
// the grid so every scheme and grid point starts from the same phases.
inline std::uint64_t ao_seed(std::uint64_t seed, int draw) {
  return Rng(seed).split({static_cast<std::uint64_t>(draw), stream::kInit}).seed();
}

struct SweepTask {
  SensingCase sc;
  Scheme scheme;
  double value;
  double a_max;
  int draw;
};

inline std::vector<SweepTask> sweep_tasks(const SweepSpec& s) {
  const std::vector<double> amax = s.a_max_grid.empty() ? std::vector<double>{s.base.a_max} : s.a_max_grid;
  std::vector<SweepTask> out;
  for (SensingCase sc : s.cases)
    for (Scheme sch : s.schemes)
      for (double a : amax)
        for (double v : s.grid)
          for (int d = 0; d < s.n_draws; ++d) out.push_back({sc, sch, v, s.param == SweepParam::a_max ? v : a, d});
  return out;
}

inline SweepRow run_task(const SweepSpec& s, const SweepTask& t) {
  SweepRow r;
  r.sc = t.sc;
  r.scheme = t.scheme;
  r.value = t.value;
  r.a_max = t.a_max;
  r.draw = t.draw;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ScenarioConfig cfg = s.base;
    cfg.seed = s.seed;
    apply_param(cfg, s.param, t.value);
    cfg.a_max = t.a_max;
    const Problem pr = make_problem(cfg, make_channel_set(cfg, static_cast<std::uint64_t>(t.draw)), t.sc);
    AoOptions o = s.ao;
    o.seed = ao_seed(s.seed, t.draw);
    const AoTrace tr = run_benchmark(t.scheme, pr, o);
    const Feasibility f = check_feasible(pr, tr.R_s, tr.psi, t.scheme == Scheme::PassiveIrs);
    if (!f.ok) throw NumericalError("returned point infeasible: " + f.violations);
    r.max_crb = tr.final_max_crb();
    r.irs_crb = tr.irs_crb.back();
    r.outer_iters = tr.outer_iters;
    r.sca_iters = tr.sca_iters;
    r.status = tr.status;
    r.ok = std::isfinite(r.max_crb) && r.max_crb > 0;
    if (!r.ok) r.error = "non-finite max-CRB";
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
  }
  if (!r.ok) r.status = "failed";
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Rows come back in task order regardless of thread count.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<SweepTask> tasks = sweep_tasks(spec);
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      rows[i] = run_task(spec, tasks[i]);
      const SweepRow& r = rows[i];
      log(r.ok ? LogLevel::Info : LogLevel::Warn,
          std::string(to_string(r.sc)) + " " + to_string(r.scheme) + " " + to_string(spec.param) + "=" +
              std::to_string(r.value) + " draw " + std::to_string(r.draw) + ": " +
              (r.ok ? std::to_string(r.max_crb) : r.error));
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = std::min<unsigned>(spec.threads > 0 ? static_cast<unsigned>(spec.threads) : hw,
                                        static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

// ---- CSV ----------------------------------------------------------------

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline const char* kCsvHeader =
    "case,scheme,param,value,a_max,draw,status,max_crb,crb_per_irs,outer_iters,sca_iters,passive_zero_sigma_r,error";

inline void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  os << kCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    std::string per;
    for (std::size_t i = 0; i < r.irs_crb.size(); ++i) per += (i ? ";" : "") + format_double(r.irs_crb[i]);
    os << to_string(r.sc) << ',' << to_string(r.scheme) << ',' << to_string(spec.param) << ','
       << format_double(r.value) << ',' << format_double(r.a_max) << ',' << r.draw << ',' << r.status << ','
       << (r.ok ? format_double(r.max_crb) : "") << ',' << per << ',' << r.outer_iters << ',' << r.sca_iters << ','
       << (spec.ao.passive_zero_sigma_r ? 1 : 0) << ',' << csv_field(r.error) << "\n";
  }
}

// Wall times live in a sidecar so the main CSV stays byte-reproducible.
inline void write_timing_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  os << "case,scheme,param,value,a_max,draw,wall_time_s\n";
  for (const SweepRow& r : rows)
    os << to_string(r.sc) << ',' << to_string(r.scheme) << ',' << to_string(spec.param) << ','
       << format_double(r.value) << ',' << format_double(r.a_max) << ',' << r.draw << ',' << format_double(r.wall_time)
       << "\n";
}

inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + tmp + "'");
    f << content;
    if (!f.flush()) throw ConfigError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<SweepRow> run_sweep_to(const SweepSpec& spec, const std::string& csv_path) {
  const std::vector<SweepRow> rows = run_sweep(spec);
  std::ostringstream body, timing;
  write_csv(body, spec, rows);
  write_timing_csv(timing, spec, rows);
  write_atomic(csv_path, body.str());
  write_atomic(csv_path + ".timing.csv", timing.str());
  return rows;
}

// Mean max-CRB over successful draws for one (case, scheme, value, a_max) cell.
inline double mean_max_crb(const std::vector<SweepRow>& rows, SensingCase sc, Scheme sch, double value,
                           double a_max, int* count = nullptr) {
  double acc = 0.0;
  int n = 0;
  for (const SweepRow& r : rows)
    if (r.ok && r.sc == sc && r.scheme == sch && r.value == value && r.a_max == a_max) {
      acc += r.max_crb;
      ++n;
    }
  if (count) *count = n;
  return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

} // namespace irscrb

#endif
