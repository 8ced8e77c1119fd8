#pragma once

// Command-line front end: classify, lambda-table, jl-threshold, verify, extend-eval.

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "frachenon/energetics.hpp"
#include "frachenon/errors.hpp"
#include "frachenon/extension.hpp"
#include "frachenon/json_writer.hpp"
#include "frachenon/profile.hpp"
#include "frachenon/regimes.hpp"
#include "frachenon/special_functions.hpp"

namespace frachenon::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchema = "frachenon/1";

enum ExitCode : int {
  kOk = 0,
  kIdentityFailure = 1,
  kParameterRejected = 2,
  kNonConvergence = 3,
  kUsage = 64,
  kDataFormat = 65,
  kInternal = 70,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Argument syntax

inline double parse_real(const std::string& text, const std::string& flag) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size()) throw UsageError(flag + ": not a number: '" + text + "'");
  return v;
}

inline int parse_int(const std::string& text, const std::string& flag) {
  const double v = parse_real(text, flag);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError(flag + ": not an integer: '" + text + "'");
  return static_cast<int>(v);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

/// "v", "a,b,c" or "min:max:count[:lin|log]".
inline std::vector<double> parse_real_grid(const std::string& text, const std::string& flag) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3 && parts.size() != 4) throw UsageError(flag + ": range must be min:max:count[:lin|log]");
    const double lo = parse_real(parts[0], flag);
    const double hi = parse_real(parts[1], flag);
    const int n = parse_int(parts[2], flag);
    const std::string mode = parts.size() == 4 ? parts[3] : "lin";
    if (n < 1) throw UsageError(flag + ": range count must be >= 1");
    if (mode != "lin" && mode != "log") throw UsageError(flag + ": spacing must be lin or log");
    if (mode == "log" && !(lo > 0.0 && hi > 0.0)) throw UsageError(flag + ": log spacing needs positive bounds");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(mode == "lin" ? lo + (hi - lo) * f : lo * std::pow(hi / lo, f));
    }
    if (n > 1) out.back() = hi;
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_real(p, flag));
  if (out.empty()) throw UsageError(flag + ": empty value");
  return out;
}

/// "n", "a,b,c" or the inclusive integer range "a:b".
inline std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw UsageError(flag + ": integer range must be a:b");
    const int a = parse_int(parts[0], flag), b = parse_int(parts[1], flag);
    if (b < a || b - a > 100000) throw UsageError(flag + ": bad integer range");
    for (int i = a; i <= b; ++i) out.push_back(i);
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(parse_int(p, flag));
  if (out.empty()) throw UsageError(flag + ": empty value");
  return out;
}

inline double single_real(const std::string& text, const std::string& flag) {
  const auto v = parse_real_grid(text, flag);
  if (v.size() != 1) throw UsageError(flag + ": expected a single value");
  return v.front();
}

inline int single_int(const std::string& text, const std::string& flag) {
  const auto v = parse_int_list(text, flag);
  if (v.size() != 1) throw UsageError(flag + ": expected a single value");
  return v.front();
}

// ---------------------------------------------------------------------------
// Config file: key=value lines, '#' comments. Keys are flag names without dashes.

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"N",       "s",     "ell",    "p",        "alpha",   "R",
                                          "tol",     "jobs",  "format", "out",      "profile", "constant",
                                          "point",   "zero",  "timestamp", "max-subdivisions", "probe-cap"};
  return keys;
}

inline std::vector<std::pair<std::string, std::string>> read_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw FormatError(lineno, "expected key=value");
    if (!config_keys().count(key)) throw FormatError(lineno, "unknown config key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Worker pool with results kept in input order.

template <typename R>
std::vector<R> parallel_map(std::size_t n, int jobs, const std::function<R(std::size_t)>& f) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------

struct Options {
  std::string N, s, ell = "0", p, alpha, R;
  std::optional<double> tol;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string format;
  std::string out;
  std::string config;
  bool timestamp = false;
  bool zero = false;
  int max_subdivisions = 2000;
  std::string profile;
  std::optional<double> constant;
  std::vector<std::string> points;
  std::optional<double> probe_cap;
  std::string which;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err_);
    log_ = std::make_shared<spdlog::logger>("frachenon", sink);
    log_->set_pattern("[%l] %v");
    log_->set_level(spdlog::level::warn);
    if (const char* lv = std::getenv("FRACHENON_LOG")) {
      const std::string v(lv);
      if (v == "error") log_->set_level(spdlog::level::err);
      else if (v == "warn") log_->set_level(spdlog::level::warn);
      else if (v == "info") log_->set_level(spdlog::level::info);
      else if (v == "debug") log_->set_level(spdlog::level::debug);
      else log_->warn("FRACHENON_LOG='{}' not recognised; using warn", v);
    }
  }

  int run(int argc, const char* const* argv);

 private:
  // Header fields shared by every JSON document.
  json::Value document(const std::string& command) const {
    json::Value doc = json::Object{};
    doc.set("schema", kSchema).set("tool_version", kVersion).set("command", command);
    if (opt_.timestamp) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::tm tm{};
      gmtime_r(&now, &tm);
      std::ostringstream ts;
      ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
      doc.set("timestamp", ts.str());
    }
    return doc;
  }

  void emit(const std::string& text) {
    if (opt_.out.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(opt_.out, std::ios::binary);
    if (!f) throw UsageError("cannot open output file '" + opt_.out + "'");
    f << text;
  }
  void emit(const json::Value& doc) {
    std::ostringstream os;
    doc.dump(os);
    os << '\n';
    emit(os.str());
  }

  std::string format_or(const std::string& def) const {
    const std::string f = opt_.format.empty() ? def : opt_.format;
    if (f != "json" && f != "csv") throw UsageError("--format must be json or csv");
    return f;
  }

  QuadratureSpec field_spec() const {
    QuadratureSpec q;
    q.max_subdivisions = opt_.max_subdivisions;
    q.validate();
    return q;
  }
  QuadratureSpec outer_spec() const {
    QuadratureSpec q = energetics_spec();
    q.max_subdivisions = opt_.max_subdivisions;
    return q;
  }

  int error_document(const std::string& command, const std::string& kind, const std::string& message, int code) {
    log_->error("{}", message);
    json::Value doc = document(command);
    doc.set("error", json::Value::object({{"kind", kind}, {"message", message}, {"exit_code", code}}));
    emit(doc);
    return code;
  }

  int cmd_classify();
  int cmd_lambda_table();
  int cmd_jl_threshold();
  int cmd_verify();
  int cmd_extend_eval();

  std::ostream& out_;
  std::ostream& err_;
  std::shared_ptr<spdlog::logger> log_;
  Options opt_;
  std::string command_;
};

// ---------------------------------------------------------------------------
// classify

inline json::Value report_json(const RegimeReport& r) {
  json::Value o = json::Object{};
  o.set("N", r.params.N).set("s", r.params.s).set("ell", r.params.ell).set("p", r.params.p);
  o.set("p_S", r.p_S).set("alpha_tilde", r.alpha_tilde);
  o.set("lambda_at_alpha_tilde", r.lambda_at_alpha_tilde ? json::Value(*r.lambda_at_alpha_tilde) : json::Value());
  o.set("lambda_at_zero", r.lambda_at_zero).set("gamma", r.gamma);
  o.set("regime", std::string(to_string(r.regime)));
  o.set("amplitude", r.amplitude ? json::Value(*r.amplitude) : json::Value());
  return o;
}

inline int Runner::cmd_classify() {
  if (opt_.N.empty() || opt_.s.empty() || opt_.p.empty()) throw UsageError("classify needs --N, --s and --p");
  const auto Ns = parse_int_list(opt_.N, "--N");
  const auto ss = parse_real_grid(opt_.s, "--s");
  const auto ells = parse_real_grid(opt_.ell, "--ell");
  const auto ps = parse_real_grid(opt_.p, "--p");
  std::vector<ProblemParams> tuples;
  for (int N : Ns)
    for (double s : ss)
      for (double ell : ells)
        for (double p : ps) tuples.push_back({N, s, ell, p});
  const bool sweep = tuples.size() > 1;
  if (!sweep) {
    if (auto v = tuples.front().violation(); !v.empty()) {
      return error_document("classify", "parameter", "parameter rejected: " + v, kParameterRejected);
    }
  }
  struct Item {
    std::optional<RegimeReport> report;
    std::string reason;
  };
  const auto items = parallel_map<Item>(tuples.size(), opt_.jobs, [&](std::size_t i) {
    const auto& pp = tuples[i];
    if (auto v = pp.violation(); !v.empty()) return Item{std::nullopt, v};
    return Item{classify(pp), {}};
  });

  const std::string fmt = format_or("json");
  json::Value results = json::Array{};
  json::Value skipped = json::Array{};
  std::ostringstream csv;
  csv << "N,s,ell,p,p_S,alpha_tilde,lambda_at_alpha_tilde,lambda_at_zero,gamma,regime,amplitude\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& pp = tuples[i];
    if (!items[i].report) {
      log_->info("skipping N={} s={} ell={} p={}: {}", pp.N, pp.s, pp.ell, pp.p, items[i].reason);
      skipped.push(json::Value::object(
          {{"N", pp.N}, {"s", pp.s}, {"ell", pp.ell}, {"p", pp.p}, {"reason", items[i].reason}}));
      continue;
    }
    const auto& r = *items[i].report;
    results.push(report_json(r));
    using json::csv_number;
    csv << pp.N << ',' << csv_number(pp.s) << ',' << csv_number(pp.ell) << ',' << csv_number(pp.p) << ','
        << csv_number(r.p_S) << ',' << csv_number(r.alpha_tilde) << ','
        << (r.lambda_at_alpha_tilde ? csv_number(*r.lambda_at_alpha_tilde) : "") << ','
        << csv_number(r.lambda_at_zero) << ',' << csv_number(r.gamma) << ',' << to_string(r.regime) << ','
        << (r.amplitude ? csv_number(*r.amplitude) : "") << '\n';
  }
  if (fmt == "csv") {
    emit(csv.str());
    return kOk;
  }
  json::Value doc = document("classify");
  doc.set("results", std::move(results)).set("skipped", std::move(skipped));
  emit(doc);
  return kOk;
}

// ---------------------------------------------------------------------------
// lambda-table

inline int Runner::cmd_lambda_table() {
  if (opt_.N.empty() || opt_.s.empty()) throw UsageError("lambda-table needs --N and --s");
  const FracParams fp{single_int(opt_.N, "--N"), single_real(opt_.s, "--s")};
  if (auto v = fp.violation(); !v.empty()) {
    return error_document("lambda-table", "parameter", "parameter rejected: " + v, kParameterRejected);
  }
  const double amax = fp.alpha_max();
  std::vector<double> grid;
  if (opt_.alpha.empty()) {
    grid = parse_real_grid("0:" + json::csv_number(0.999 * amax) + ":21", "--alpha");
  } else {
    grid = parse_real_grid(opt_.alpha, "--alpha");
  }
  std::vector<double> alphas{0.0};
  int clipped = 0;
  for (double a : grid) {
    if (!(a >= 0.0 && a < amax)) {
      ++clipped;
      continue;
    }
    alphas.push_back(a);
  }
  if (clipped > 0) log_->warn("{} grid point(s) outside [0, (N-2s)/2) = [0, {}) clipped", clipped, amax);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  const std::string fmt = format_or("csv");
  if (fmt == "csv") {
    std::ostringstream csv;
    csv << "alpha,lambda\n";
    for (double a : alphas) csv << json::csv_number(a) << ',' << json::csv_number(lambda_alpha(fp, a)) << '\n';
    emit(csv.str());
    return kOk;
  }
  json::Value rows = json::Array{};
  for (double a : alphas) rows.push(json::Value::object({{"alpha", a}, {"lambda", lambda_alpha(fp, a)}}));
  json::Value doc = document("lambda-table");
  doc.set("N", fp.N).set("s", fp.s).set("alpha_max", amax).set("clipped", clipped).set("rows", std::move(rows));
  emit(doc);
  return kOk;
}

// ---------------------------------------------------------------------------
// jl-threshold

inline int Runner::cmd_jl_threshold() {
  if (opt_.N.empty() || opt_.s.empty()) throw UsageError("jl-threshold needs --N and --s");
  const WeightParams wp{single_int(opt_.N, "--N"), single_real(opt_.s, "--s"), single_real(opt_.ell, "--ell")};
  if (auto v = wp.violation(); !v.empty()) {
    return error_document("jl-threshold", "parameter", "parameter rejected: " + v, kParameterRejected);
  }
  ThresholdOptions topt;
  if (opt_.probe_cap) topt.probe_cap = *opt_.probe_cap;
  ThresholdResult t;
  try {
    t = jl_threshold(wp, topt);
  } catch (const ConvergenceError& e) {
    return error_document("jl-threshold", "convergence", e.what(), kNonConvergence);
  }
  std::optional<double> classical;
  if (wp.N >= 2 && wp.ell > -2.0) classical = classical_jl_henon(wp.N, wp.ell);

  const std::string fmt = format_or("json");
  if (fmt == "csv") {
    std::ostringstream csv;
    csv << "N,s,ell,p_S,lambda_at_zero,p_star,defect,probe_cap,classical_threshold\n";
    csv << wp.N << ',' << json::csv_number(wp.s) << ',' << json::csv_number(wp.ell) << ','
        << json::csv_number(t.p_S) << ',' << json::csv_number(t.lambda_at_zero) << ','
        << json::csv_number(t.p_star) << ',' << json::csv_number(t.defect) << ',' << json::csv_number(t.probe_cap)
        << ',' << (classical ? json::csv_number(*classical) : "") << '\n';
    emit(csv.str());
    return kOk;
  }
  json::Value doc = document("jl-threshold");
  doc.set("params", json::Value::object({{"N", wp.N}, {"s", wp.s}, {"ell", wp.ell}}));
  doc.set("p_S", t.p_S).set("lambda_at_zero", t.lambda_at_zero);
  doc.set("p_star", t.p_star).set("defect", t.defect).set("probe_cap", t.probe_cap);
  doc.set("grid_points", t.grid_points).set("bisection_steps", t.bisection_steps);
  doc.set("classical_threshold", classical ? json::Value(*classical) : json::Value());
  emit(doc);
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyEntry {
  IdentityResidual residual;
  double threshold = 0.0;
  json::Value context;
  std::string context_text;
};

/// Context pairs as a JSON object plus a "k=v;k=v" form for CSV cells.
inline std::pair<json::Value, std::string> context_of(
    std::initializer_list<std::pair<std::string, double>> items) {
  json::Value o = json::Object{};
  std::string text;
  for (const auto& [k, v] : items) {
    o.set(k, v);
    if (!text.empty()) text += ';';
    text += k + "=" + json::csv_number(v);
  }
  return {std::move(o), std::move(text)};
}

inline VerifyEntry entry(IdentityResidual r, double threshold,
                         std::initializer_list<std::pair<std::string, double>> ctx) {
  auto [o, text] = context_of(ctx);
  return {std::move(r), threshold, std::move(o), std::move(text)};
}

inline int Runner::cmd_verify() {
  static const std::set<std::string> kinds{"pohozaev", "monotonicity", "homogeneity", "eigen", "dirichlet", "all"};
  if (!kinds.count(opt_.which)) throw UsageError("verify: unknown check '" + opt_.which + "'");
  if (opt_.N.empty() || opt_.s.empty()) throw UsageError("verify needs --N and --s");
  const int N = single_int(opt_.N, "--N");
  const double s = single_real(opt_.s, "--s");
  const double ell = single_real(opt_.ell, "--ell");
  const std::optional<double> p = opt_.p.empty() ? std::nullopt : std::optional(single_real(opt_.p, "--p"));
  const FracParams fp{N, s};
  const bool all = opt_.which == "all";
  auto wants = [&](const char* k) { return all || opt_.which == k; };
  const bool needs_solution = wants("pohozaev") || wants("monotonicity");

  if (auto v = fp.violation(); !v.empty()) {
    return error_document("verify", "parameter", "parameter rejected: " + v, kParameterRejected);
  }
  ProblemParams pp{N, s, ell, p.value_or(2.0)};
  if (p) {
    if (auto v = pp.violation(); !v.empty()) {
      return error_document("verify", "parameter", "parameter rejected: " + v, kParameterRejected);
    }
  }
  if (needs_solution && !opt_.zero) {
    if (!p) throw UsageError("verify " + opt_.which + " needs --p (the singular solution is required)");
    const double pS = sobolev_exponent(pp.weight());
    if (!(pp.p > pS) || is_critical(pp.p, pS)) {
      return error_document("verify", "parameter",
                            "parameter rejected: the singular solution requires p > p_S = " + FracParams::fmt(pS),
                            kParameterRejected);
    }
  }

  std::vector<double> radii{1.0};
  if (!opt_.R.empty()) radii = parse_real_grid(opt_.R, "--R");
  for (double r : radii) {
    if (!(r > 0.0)) throw UsageError("--R values must be positive");
  }

  // alpha for the eigen and homogeneity checks.
  double alpha = 0.5 * fp.alpha_max();
  if (!opt_.alpha.empty()) {
    alpha = single_real(opt_.alpha, "--alpha");
  } else if (p && pp.alpha_tilde() > 0.0 && pp.alpha_tilde() < fp.alpha_max()) {
    alpha = pp.alpha_tilde();
  }
  if ((wants("eigen") || wants("homogeneity")) && !(alpha >= 0.0 && alpha < fp.alpha_max())) {
    return error_document("verify", "parameter",
                          "parameter rejected: alpha must lie in [0, (N-2s)/2) = [0, " +
                              FracParams::fmt(fp.alpha_max()) + ")",
                          kParameterRejected);
  }

  std::map<std::string, double> thresholds{{"pohozaev", 1e-3}, {"monotonicity", 1e-3}, {"homogeneity", 1e-6},
                                           {"eigen", 1e-4},    {"dirichlet", 1e-3}};
  if (opt_.tol) {
    for (auto& [k, v] : thresholds) v = *opt_.tol;
  }
  const QuadratureSpec fspec = field_spec();
  const QuadratureSpec ospec = outer_spec();
  const bool zero = opt_.zero;

  using Task = std::function<std::vector<VerifyEntry>()>;
  std::vector<Task> tasks;
  auto singular = [&]() {
    if (zero) return ExtensionField::poisson_of(RadialProfile::zero(N), fp, fspec);
    return ExtensionField::homogeneous_model(fp, pp.alpha_tilde(), singular_amplitude(pp), fspec);
  };

  if (wants("pohozaev")) {
    for (double R : radii) {
      tasks.push_back([&, R]() {
        const auto F = singular();
        const auto [a, b] = pohozaev_residuals(F, F.trace(), R, pp, ospec);
        const double th = thresholds["pohozaev"];
        return std::vector<VerifyEntry>{entry(a, th, {{"R", R}}), entry(b, th, {{"R", R}})};
      });
    }
  }
  if (wants("monotonicity")) {
    std::vector<double> lambdas = opt_.R.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : radii;
    tasks.push_back([&, lambdas]() {
      const auto F = singular();
      const auto ref = energy_E(F, F.trace(), 1.0, pp, ospec);
      std::vector<VerifyEntry> out;
      const double th = thresholds["monotonicity"];
      for (double l : lambdas) {
        const auto e = energy_E(F, F.trace(), l, pp, ospec);
        out.push_back(entry(IdentityResidual::make("energy E(lambda) = E(1)", e.E, ref.E, e.E_error + ref.E_error,
                                                   e.converged && ref.converged),
                            th, {{"lambda", l}}));
        out.push_back(entry(dH_dlambda_residual(F, l, pp, ospec), th, {{"lambda", l}}));
        out.push_back(entry(dH_solution_form_residual(F, F.trace(), l, pp, ospec), th, {{"lambda", l}}));
      }
      return out;
    });
  }
  if (wants("homogeneity")) {
    const std::vector<HalfSpacePoint> points{{1.0, 1.0}, {0.0, 1.3}, {2.5, 0.4}};
    for (const auto& X : points) {
      for (double scale : {2.0, 3.0}) {
        tasks.push_back([&, X, scale]() {
          const double th = thresholds["homogeneity"];
          IdentityResidual r = IdentityResidual::make("homogeneity", 0, 0, 0, true);
          if (!zero) {
            const auto h = homogeneity_residual(alpha, X, scale, fp, fspec);
            r = IdentityResidual::make("homogeneity", h.scaled, h.reference,
                                       h.error_estimate * std::abs(h.reference), h.converged);
          }
          return std::vector<VerifyEntry>{
              entry(r, th, {{"alpha", alpha}, {"x", X.x_radius}, {"t", X.t}, {"scale", scale}})};
        });
      }
    }
  }
  if (wants("eigen")) {
    tasks.push_back([&]() {
      const double th = thresholds["eigen"];
      IdentityResidual res = IdentityResidual::make("eigen", 0, 0, 0, true);
      if (!zero) {
        const auto r = frac_laplacian_pv(RadialProfile::model_v_alpha(fp, alpha), 1.0, fp, fspec);
        res = IdentityResidual::make("eigen", r.value, lambda_alpha(fp, alpha), r.error_estimate, r.converged);
        // The eigen check is stated as an absolute difference.
        res.rel_residual = res.abs_residual;
      }
      return std::vector<VerifyEntry>{entry(res, th, {{"alpha", alpha}, {"x", 1.0}})};
    });
  }
  if (wants("dirichlet")) {
    tasks.push_back([&]() {
      const double th = thresholds["dirichlet"];
      const auto u = zero ? RadialProfile::zero(N) : RadialProfile::bump(N, 1.0, 4);
      const auto F = ExtensionField::poisson_of(u, fp, fspec);
      QuadratureSpec loose = ospec;
      loose.rel_tol = 1e-6;
      const auto bulk = halfspace_dirichlet_energy(F, loose);
      const auto form = hs_bilinear_form(u, u, fp, loose);
      const double k = kappa_s(s);
      auto r = IdentityResidual::make("dirichlet trace energy", bulk.value, k * form.value,
                                      bulk.error_estimate + k * form.error_estimate,
                                      bulk.converged && form.converged);
      return std::vector<VerifyEntry>{
          entry(r, th, {{"bump_radius", zero ? 0.0 : 1.0}, {"bump_power", zero ? 0.0 : 4.0}})};
    });
  }

  const auto groups = parallel_map<std::vector<VerifyEntry>>(tasks.size(), opt_.jobs, [&](std::size_t i) {
    return tasks[i]();
  });

  bool pass = true;
  bool converged = true;
  json::Value list = json::Array{};
  std::ostringstream csv;
  csv << "identity,context,lhs,rhs,abs_residual,rel_residual,quadrature_error,threshold,converged,pass\n";
  for (const auto& g : groups) {
    for (const auto& e : g) {
      const auto& r = e.residual;
      const bool ok = r.rel_residual <= e.threshold;
      pass = pass && ok;
      converged = converged && r.converged;
      json::Value o = json::Object{};
      o.set("identity", r.identity_name).set("context", e.context);
      o.set("lhs", r.lhs).set("rhs", r.rhs).set("abs_residual", r.abs_residual);
      o.set("rel_residual", r.rel_residual).set("quadrature_error", r.quadrature_error);
      o.set("threshold", e.threshold).set("converged", r.converged).set("pass", ok);
      list.push(std::move(o));
      using json::csv_number;
      csv << r.identity_name << ',' << e.context_text << ',' << csv_number(r.lhs) << ',' << csv_number(r.rhs) << ','
          << csv_number(r.abs_residual) << ',' << csv_number(r.rel_residual) << ','
          << csv_number(r.quadrature_error) << ',' << csv_number(e.threshold) << ',' << (r.converged ? 1 : 0)
          << ',' << (ok ? 1 : 0) << '\n';
      if (!ok) log_->warn("{} failed: rel residual {} > {}", r.identity_name, r.rel_residual, e.threshold);
    }
  }
  if (format_or("json") == "csv") {
    emit(csv.str());
  } else {
    json::Value doc = document("verify");
    doc.set("which", opt_.which);
    doc.set("params",
            json::Value::object({{"N", N}, {"s", s}, {"ell", ell}, {"p", p ? json::Value(*p) : json::Value()}}));
    doc.set("field", zero ? "zero" : "singular solution");
    json::Value th = json::Object{};
    for (const auto& [k, v] : thresholds) th.set(k, v);
    doc.set("thresholds", std::move(th));
    doc.set("identities", std::move(list));
    doc.set("converged", converged).set("pass", pass);
    emit(doc);
  }
  if (!converged) {
    log_->error("quadrature did not converge for at least one identity");
    return kNonConvergence;
  }
  return pass ? kOk : kIdentityFailure;
}

// ---------------------------------------------------------------------------
// extend-eval

inline int Runner::cmd_extend_eval() {
  if (opt_.s.empty()) throw UsageError("extend-eval needs --s");
  const double s = single_real(opt_.s, "--s");
  const int sources = !opt_.profile.empty() + opt_.constant.has_value() + !opt_.alpha.empty() + opt_.zero;
  if (sources != 1) throw UsageError("extend-eval needs exactly one of --profile, --constant, --alpha, --zero");
  if (opt_.points.empty()) throw UsageError("extend-eval needs at least one --point x,t");

  std::optional<RadialProfile> u;
  int N = opt_.N.empty() ? -1 : single_int(opt_.N, "--N");
  if (!opt_.profile.empty()) {
    std::ifstream f(opt_.profile);
    if (!f) throw UsageError("cannot open profile '" + opt_.profile + "'");
    try {
      u = parse_profile(f);
    } catch (const FormatError& e) {
      const std::string msg = opt_.profile + ":" + std::string(e.what()).substr(5);
      return error_document("extend-eval", "format", msg, kDataFormat);
    }
    if (N >= 0 && N != u->N()) {
      return error_document("extend-eval", "parameter", "parameter rejected: --N does not match the profile header",
                            kParameterRejected);
    }
    N = u->N();
  }
  if (N < 0) throw UsageError("extend-eval needs --N unless a profile file is given");
  const FracParams fp{N, s};
  if (auto v = fp.kernel_violation(); !v.empty()) {
    return error_document("extend-eval", "parameter", "parameter rejected: " + v, kParameterRejected);
  }
  if (opt_.constant) u = RadialProfile::constant(N, *opt_.constant);
  if (opt_.zero) u = RadialProfile::zero(N);
  if (!opt_.alpha.empty()) u = RadialProfile::model_v_alpha(fp, single_real(opt_.alpha, "--alpha"));

  std::vector<HalfSpacePoint> points;
  for (const auto& text : opt_.points) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw UsageError("--point must be x,t");
    points.push_back({parse_real(parts[0], "--point"), parse_real(parts[1], "--point")});
  }
  QuadratureSpec spec = field_spec();
  if (opt_.tol) spec.rel_tol = *opt_.tol;
  const auto field = ExtensionField::poisson_of(*u, fp, spec);
  const auto values = parallel_map<QuadratureResult>(points.size(), opt_.jobs,
                                                     [&](std::size_t i) { return field.value(points[i]); });
  bool converged = true;
  for (const auto& v : values) converged = converged && v.converged;

  if (format_or("csv") == "csv") {
    std::ostringstream csv;
    csv << "x,t,U,error,converged\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      csv << json::csv_number(points[i].x_radius) << ',' << json::csv_number(points[i].t) << ','
          << json::csv_number(values[i].value) << ',' << json::csv_number(values[i].error_estimate) << ','
          << (values[i].converged ? 1 : 0) << '\n';
    }
    emit(csv.str());
  } else {
    json::Value rows = json::Array{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows.push(json::Value::object({{"x", points[i].x_radius},
                                     {"t", points[i].t},
                                     {"U", values[i].value},
                                     {"error", values[i].error_estimate},
                                     {"converged", values[i].converged}}));
    }
    json::Value doc = document("extend-eval");
    doc.set("N", N).set("s", s).set("rows", std::move(rows));
    emit(doc);
  }
  if (!converged) {
    log_->error("quadrature did not converge at one or more points");
    return kNonConvergence;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

inline int Runner::run(int argc, const char* const* argv) {
  static const std::set<std::string> commands{"classify", "lambda-table", "jl-threshold", "verify", "extend-eval"};
  std::vector<std::string> args(argv + 1, argv + argc);

  try {
    // Config values go in right after the subcommand so that later flags override them.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw UsageError("cannot open config file '" + config_path + "'");
      std::vector<std::pair<std::string, std::string>> pairs;
      try {
        pairs = read_config(f);
      } catch (const FormatError& e) {
        log_->error("{}:{}", config_path, std::string(e.what()).substr(5));
        return kDataFormat;
      }
      auto pos = std::find_if(args.begin(), args.end(), [](const std::string& a) { return commands.count(a) > 0; });
      if (pos != args.end()) ++pos;
      std::vector<std::string> injected;
      for (const auto& [k, v] : pairs) {
        if (k == "zero" || k == "timestamp") {
          if (v == "true" || v == "1") injected.push_back("--" + k);
          else if (v != "false" && v != "0") throw UsageError("config key '" + k + "' expects true or false");
        } else {
          injected.push_back("--" + k);
          injected.push_back(v);
        }
      }
      args.insert(pos, injected.begin(), injected.end());
    }

    CLI::App app{"Fractional Hardy-Henon toolkit: regimes, spectral constants, extensions and identities"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto common = [&](CLI::App* sub) {
      sub->add_option("--N", opt_.N, "dimension (integer, list a,b,c or range a:b)");
      sub->add_option("--s", opt_.s, "fractional order in (0,1); number, list or min:max:count[:lin|log]");
      sub->add_option("--ell", opt_.ell, "weight exponent ell > -2s (default 0)");
      sub->add_option("--p", opt_.p, "nonlinearity exponent p > 1");
      sub->add_option("--alpha", opt_.alpha, "spectral parameter alpha in [0,(N-2s)/2)");
      sub->add_option("--R", opt_.R, "radii (list or range)");
      sub->add_option("--tol", opt_.tol, "pass threshold override (verify) or quadrature tolerance (extend-eval)");
      sub->add_option("--jobs", opt_.jobs, "worker threads")->check(CLI::PositiveNumber);
      sub->add_option("--format", opt_.format, "json or csv");
      sub->add_option("--out", opt_.out, "output path (default stdout)");
      sub->add_option("--config", opt_.config, "key=value config file; flags override it");
      sub->add_flag("--timestamp", opt_.timestamp, "include a UTC timestamp");
      sub->add_flag("--zero", opt_.zero, "use the zero field / zero trace");
      sub->add_option("--max-subdivisions", opt_.max_subdivisions, "quadrature subdivision cap")
          ->check(CLI::PositiveNumber);
      sub->add_option("--profile", opt_.profile, "profile file: 'N=<int> tail=<float>' then '<radius> <value>'");
      sub->add_option("--constant", opt_.constant, "constant trace value");
      sub->add_option("--point", opt_.points, "evaluation point x,t (repeatable)")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
      sub->add_option("--probe-cap", opt_.probe_cap, "largest p probed by jl-threshold");
    };
    auto* classify_cmd = app.add_subcommand("classify", "classify (N, s, ell, p) tuples into regimes");
    auto* table_cmd = app.add_subcommand("lambda-table", "tabulate lambda(alpha)");
    auto* jl_cmd = app.add_subcommand("jl-threshold", "smallest p where p lambda(alpha_tilde) = lambda(0)");
    auto* verify_cmd = app.add_subcommand("verify", "verify identities on the singular solution");
    auto* extend_cmd = app.add_subcommand("extend-eval", "evaluate the extension U(x,t) at points");
    for (auto* sub : {classify_cmd, table_cmd, jl_cmd, verify_cmd, extend_cmd}) common(sub);
    verify_cmd->add_option("which", opt_.which, "pohozaev | monotonicity | homogeneity | eigen | dirichlet | all")
        ->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForVersion& e) {
      out_ << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << '\n';
      return kUsage;
    }

    if (classify_cmd->parsed()) return cmd_classify();
    if (table_cmd->parsed()) return cmd_lambda_table();
    if (jl_cmd->parsed()) return cmd_jl_threshold();
    if (verify_cmd->parsed()) return cmd_verify();
    if (extend_cmd->parsed()) return cmd_extend_eval();
    err_ << "usage error: no subcommand\n";
    return kUsage;
  } catch (const UsageError& e) {
    err_ << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    log_->error("line {}: {}", e.line(), e.what());
    return kDataFormat;
  } catch (const ConvergenceError& e) {
    log_->error("{}", e.what());
    return kNonConvergence;
  } catch (const ParameterError& e) {
    log_->error("parameter rejected: {}", e.what());
    return kParameterRejected;
  } catch (const DomainError& e) {
    log_->error("parameter rejected: {}", e.what());
    return kParameterRejected;
  } catch (const DivergenceError& e) {
    log_->error("parameter rejected: {}", e.what());
    return kParameterRejected;
  } catch (const NotASolutionError& e) {
    log_->error("parameter rejected: {}", e.what());
    return kParameterRejected;
  } catch (const std::invalid_argument& e) {
    log_->error("parameter rejected: {}", e.what());
    return kParameterRejected;
  } catch (const std::exception& e) {
    log_->critical("internal error: {}", e.what());
    return kInternal;
  }
}

/// Entry point used by the executable and by tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Runner r(out, err);
  return r.run(argc, argv);
}

}  // namespace frachenon::cli
