#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analytic_box.hpp"
#include "boundary_law.hpp"
#include "disk_radial.hpp"
#include "errors.hpp"
#include "evolution.hpp"
#include "verification.hpp"

// Command-line front end. Every command renders its whole output to a string
// first and writes it in one go, so failures never leave partial files.
//
// Exit codes: 0 ok, 1 verify failure, 2 usage, 3 numerical, 4 I/O.

namespace dirac_billiard::cli {

enum class OutputFormat { CSV, JSON };
enum class GeometryKind { Box, Disk };
enum class LawKind { Static, Linear, Breathing };

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct Spectrum1DParams {
  double a = 0.5;
  int n_max = 10;
  friend bool operator==(const Spectrum1DParams&, const Spectrum1DParams&) = default;
};

struct SpectrumDiskParams {
  int k = 0;
  double a = 0.3;
  int n_max = 5;
  friend bool operator==(const SpectrumDiskParams&, const SpectrumDiskParams&) = default;
};

struct ModeParams {
  GeometryKind geometry = GeometryKind::Box;
  int n = 1;
  int k = 0;
  double a = 0.5;
  double b = 1.0;
  double t = 0.0;
  std::size_t points = 129;
  friend bool operator==(const ModeParams&, const ModeParams&) = default;
};

/// b is the wall length at t = 0 for every law (the mean length when breathing).
struct EvolveParams {
  GeometryKind geometry = GeometryKind::Box;
  LawKind law = LawKind::Linear;
  int n = 1;
  int k = 0;
  double a = 0.5;
  double b = 1.0;
  double eps = 0.0;
  double omega = 0.0;
  std::size_t points = 513;
  double t_end = 1.0;
  std::optional<double> dt;
  double cfl = 0.5;
  std::size_t record_every = 1;
  friend bool operator==(const EvolveParams&, const EvolveParams&) = default;
};

struct FermiParams {
  double l0 = 1.0;
  double eps = 0.1;
  double omega = 2.0 * kPi;
  int n = 1;
  double t_end = 10.0;
  std::size_t points = 513;
  std::optional<double> dt;
  double cfl = 0.5;
  std::size_t record_every = 10;
  friend bool operator==(const FermiParams&, const FermiParams&) = default;
};

struct VerifyParams {
  friend bool operator==(const VerifyParams&, const VerifyParams&) = default;
};

using Command = std::variant<Spectrum1DParams, SpectrumDiskParams, ModeParams, EvolveParams,
                             FermiParams, VerifyParams>;

struct RunConfig {
  Command command;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::JSON;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Thrown by parse_args for --help; carries the text to print (exit 0).
struct HelpRequested {
  std::string text;
};

// ---------------------------------------------------------------------------
// Number and enum rendering
// ---------------------------------------------------------------------------

/// 17 significant digits, C locale: round-trips every double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* to_string(OutputFormat f) { return f == OutputFormat::CSV ? "csv" : "json"; }
inline const char* to_string(GeometryKind g) { return g == GeometryKind::Box ? "box" : "disk"; }
inline const char* to_string(LawKind l) {
  switch (l) {
    case LawKind::Static: return "static";
    case LawKind::Linear: return "linear";
    case LawKind::Breathing: return "breathing";
  }
  return "?";
}

inline const char* command_name(const Command& c) {
  static constexpr const char* kNames[] = {"spectrum-1d", "spectrum-disk", "mode",
                                           "evolve",      "fermi",         "verify"};
  return kNames[c.index()];
}

namespace detail {

inline double parse_real(const std::string& flag, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) {
    throw UsageError(flag + ": expected a finite number (got '" + s + "')");
  }
  return v;
}

template <class I>
I parse_integer(const std::string& flag, const std::string& s) {
  I v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw UsageError(flag + ": expected an integer (got '" + s + "')");
  }
  return v;
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::CSV;
  if (s == "json") return OutputFormat::JSON;
  throw UsageError("--format: must be one of csv, json (got '" + s + "')");
}

inline GeometryKind parse_geometry(const std::string& s) {
  if (s == "box") return GeometryKind::Box;
  if (s == "disk") return GeometryKind::Disk;
  throw UsageError("--geometry: must be one of box, disk (got '" + s + "')");
}

inline LawKind parse_law(const std::string& s) {
  if (s == "static") return LawKind::Static;
  if (s == "linear") return LawKind::Linear;
  if (s == "breathing") return LawKind::Breathing;
  throw UsageError("--law: must be one of static, linear, breathing (got '" + s + "')");
}

inline void require(bool ok, const std::string& flag, const std::string& rule, const std::string& got) {
  if (!ok) throw UsageError(flag + ": must satisfy " + rule + " (got " + got + ")");
}

/// String-valued options of one subcommand, keyed by long name without dashes.
class FlagTable {
 public:
  explicit FlagTable(CLI::App* sub) : sub_(sub) {}

  void add(const std::string& key, const std::string& help) {
    options_[key] = sub_->add_option("--" + key, values_[key], help)->type_name("VALUE");
  }
  void add_output() {
    options_["output"] = sub_->add_option("-o,--output", values_["output"], "output file (default stdout)")
                             ->type_name("PATH");
  }
  bool has_key(const std::string& key) const { return options_.count(key) != 0; }
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : options_) out.push_back(k);
    return out;
  }
  std::optional<std::string> get(const std::string& key) const {
    const auto it = options_.find(key);
    if (it == options_.end() || it->second->count() == 0) return std::nullopt;
    return values_.at(key);
  }
  double real(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_real("--" + key, *v) : fallback;
  }
  int integer(const std::string& key, int fallback) const {
    const auto v = get(key);
    return v ? parse_integer<int>("--" + key, *v) : fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (!v->empty() && v->front() == '-') {
      throw UsageError("--" + key + ": must be a positive integer (got " + *v + ")");
    }
    return parse_integer<std::size_t>("--" + key, *v);
  }

 private:
  CLI::App* sub_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

/// Whether `key` appears as an explicit flag on the command line.
inline bool given_explicitly(const std::vector<std::string>& argv, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& tok : argv) {
    if (tok == flag || tok.rfind(flag + "=", 0) == 0) return true;
    if (key == "output" && (tok == "-o" || tok.rfind("-o=", 0) == 0)) return true;
  }
  return false;
}

inline std::string json_scalar_to_arg(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return fmt17(v.get<double>());
  throw UsageError("--config: key '" + key + "' must be a number or a string");
}

inline nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  try {
    nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw UsageError("--config: '" + path + "' must hold a JSON object");
    return doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("--config: '" + path + "' is not valid JSON (" + e.what() + ")");
  }
}

// --- domain checks ---------------------------------------------------------

inline void validate(const Spectrum1DParams& p) {
  require(std::abs(p.a) < 1.0 && p.a != 0.0, "--a", "0 < |a| < 1", fmt17(p.a));
  require(p.n_max >= 1 && p.n_max <= 100000, "--n-max", "1 <= n-max <= 100000", std::to_string(p.n_max));
}

inline void validate(const SpectrumDiskParams& p) {
  require(std::abs(p.a) <= kMaxDiskRate, "--a", "|a| <= 0.95", fmt17(p.a));
  require(std::abs(p.k) <= 50, "--k", "|k| <= 50", std::to_string(p.k));
  require(p.n_max >= 1 && p.n_max <= 100, "--n-max", "1 <= n-max <= 100", std::to_string(p.n_max));
}

inline void validate_wall_start(double a, double b, double t_end, const char* time_flag) {
  require(b > 0.0, "--b", "b > 0", fmt17(b));
  if (a < 0.0) {
    const double collapse = -b / a;
    require(t_end < collapse, time_flag, "t < -b/a = " + fmt17(collapse) + " (wall collapse)",
            fmt17(t_end));
  }
}

inline void validate(const ModeParams& p) {
  if (p.geometry == GeometryKind::Box) {
    require(std::abs(p.a) < 1.0 && p.a != 0.0, "--a", "0 < |a| < 1", fmt17(p.a));
    require(p.n != 0, "--n", "n != 0", std::to_string(p.n));
    require(p.k == 0, "--k", "k = 0 for --geometry box", std::to_string(p.k));
  } else {
    require(std::abs(p.a) <= kMaxDiskRate, "--a", "|a| <= 0.95", fmt17(p.a));
    require(p.n >= 1 && p.n <= 100, "--n", "1 <= n <= 100", std::to_string(p.n));
    require(std::abs(p.k) <= 50, "--k", "|k| <= 50", std::to_string(p.k));
  }
  require(p.t >= 0.0, "--t", "t >= 0", fmt17(p.t));
  validate_wall_start(p.a, p.b, p.t, "--t");
  require(p.points >= 3 && p.points <= 1000000, "--points", "3 <= points <= 1000000",
          std::to_string(p.points));
}

inline void validate_stepping(double t_end, const std::optional<double>& dt, double cfl,
                              std::size_t points, std::size_t record_every) {
  require(t_end > 0.0, "--t-end", "t-end > 0", fmt17(t_end));
  if (dt) require(*dt > 0.0, "--dt", "dt > 0", fmt17(*dt));
  require(cfl > 0.0 && cfl <= kMaxAutoCfl, "--cfl", "0 < cfl <= 0.5", fmt17(cfl));
  require(points >= grid_calculus::SbpDerivative::kMinPoints && points <= 1000000, "--points",
          "8 <= points <= 1000000", std::to_string(points));
  require(record_every >= 1, "--record-every", "record-every >= 1", std::to_string(record_every));
}

inline void validate_breathing(double mean, double eps, double omega, const char* mean_flag) {
  require(mean > 0.0, mean_flag, std::string(mean_flag + 2) + " > 0", fmt17(mean));
  require(std::abs(eps) < 1.0, "--eps", "|eps| < 1", fmt17(eps));
  require(omega >= 0.0, "--omega", "omega >= 0", fmt17(omega));
  require(mean * std::abs(eps) * omega < 1.0, "--omega",
          std::string(mean_flag + 2) + " * |eps| * omega < 1 (subluminal wall)", fmt17(omega));
}

inline void validate(const EvolveParams& p) {
  const bool moving_exact = p.law == LawKind::Linear && p.a != 0.0;
  if (p.geometry == GeometryKind::Box) {
    require(p.k == 0, "--k", "k = 0 for --geometry box", std::to_string(p.k));
    if (moving_exact) {
      require(p.n != 0, "--n", "n != 0", std::to_string(p.n));
    } else {
      require(p.n >= 1, "--n", "n >= 1", std::to_string(p.n));
    }
  } else {
    require(p.n >= 1 && p.n <= 100, "--n", "1 <= n <= 100", std::to_string(p.n));
    require(std::abs(p.k) <= 50, "--k", "|k| <= 50", std::to_string(p.k));
  }
  switch (p.law) {
    case LawKind::Static:
      require(p.b > 0.0, "--b", "b > 0", fmt17(p.b));
      break;
    case LawKind::Linear:
      require(std::abs(p.a) < 1.0, "--a", "|a| < 1", fmt17(p.a));
      if (p.geometry == GeometryKind::Disk) {
        require(std::abs(p.a) <= kMaxDiskRate, "--a", "|a| <= 0.95 for --geometry disk", fmt17(p.a));
      }
      validate_wall_start(p.a, p.b, p.t_end, "--t-end");
      break;
    case LawKind::Breathing:
      validate_breathing(p.b, p.eps, p.omega, "--b");
      break;
  }
  validate_stepping(p.t_end, p.dt, p.cfl, p.points, p.record_every);
}

inline void validate(const FermiParams& p) {
  validate_breathing(p.l0, p.eps, p.omega, "--l0");
  require(p.n >= 1, "--n", "n >= 1", std::to_string(p.n));
  validate_stepping(p.t_end, p.dt, p.cfl, p.points, p.record_every);
}

inline void validate(const VerifyParams&) {}

}  // namespace detail

// ---------------------------------------------------------------------------
// parse_args / render
// ---------------------------------------------------------------------------

/// Parses argv (without the program name). `--config <path>` supplies values
/// for flags that are not given explicitly. Throws UsageError on any unknown
/// flag, unknown config key or domain violation, HelpRequested for --help.
inline RunConfig parse_args(std::span<const std::string> argv_in) {
  std::vector<std::string> argv(argv_in.begin(), argv_in.end());

  CLI::App app{"Massless Dirac particle in a box or disk with a moving wall", "dirac_billiard"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "help for every command");

  struct Sub {
    CLI::App* app;
    detail::FlagTable flags;
  };
  std::map<std::string, Sub> subs;
  auto make = [&](const char* name, const char* about) -> detail::FlagTable& {
    CLI::App* s = app.add_subcommand(name, about);
    auto [it, _] = subs.emplace(name, Sub{s, detail::FlagTable(s)});
    auto& f = it->second.flags;
    f.add("config", "JSON file with default values for the flags of this command");
    f.add("format", "csv | json");
    f.add_output();
    return f;
  };

  auto& f1 = make("spectrum-1d", "eigenvalues of the linearly moving box");
  f1.add("a", "wall rate, 0 < |a| < 1 (default 0.5)");
  f1.add("n-max", "number of eigenvalues (default 10)");

  auto& fd = make("spectrum-disk", "eigenvalues of the linearly moving disk (shooting)");
  fd.add("k", "angular number (default 0)");
  fd.add("a", "radius rate, |a| <= 0.95 (default 0.3)");
  fd.add("n-max", "number of eigenvalues (default 5)");

  auto& fm = make("mode", "exact eigenmode sampled at time t");
  fm.add("geometry", "box | disk (default box)");
  fm.add("n", "mode index (default 1)");
  fm.add("k", "angular number, disk only (default 0)");
  fm.add("a", "wall rate (default 0.5)");
  fm.add("b", "wall position at t = 0 (default 1)");
  fm.add("t", "time (default 0)");
  fm.add("points", "grid points on [0, L(t)] (default 129)");

  auto& fe = make("evolve", "propagate an eigenmode under a wall law; writes t,L,norm,energy");
  fe.add("geometry", "box | disk (default box)");
  fe.add("law", "static | linear | breathing (default linear)");
  fe.add("n", "initial mode index (default 1)");
  fe.add("k", "angular number, disk only (default 0)");
  fe.add("a", "linear wall rate (default 0.5)");
  fe.add("b", "wall position at t = 0, mean when breathing (default 1)");
  fe.add("eps", "breathing amplitude (default 0)");
  fe.add("omega", "breathing frequency (default 0)");
  fe.add("points", "grid points (default 513)");
  fe.add("t-end", "duration (default 1)");
  fe.add("dt", "fixed time step (default: from --cfl)");
  fe.add("cfl", "Courant factor in (0, 0.5] (default 0.5)");
  fe.add("record-every", "steps between samples (default 1)");

  auto& ff = make("fermi", "static mode n in a breathing box L0 (1 + eps sin(omega t))");
  ff.add("l0", "mean box length (default 1)");
  ff.add("eps", "relative amplitude (default 0.1)");
  ff.add("omega", "drive frequency (default 2 pi)");
  ff.add("n", "initial static mode (default 1)");
  ff.add("t-end", "duration (default 10)");
  ff.add("points", "grid points (default 513)");
  ff.add("dt", "fixed time step (default: from --cfl)");
  ff.add("cfl", "Courant factor in (0, 0.5] (default 0.5)");
  ff.add("record-every", "steps between samples (default 10)");

  make("verify", "run the invariant suites of every module");

  auto run_cli11 = [&app](std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        std::ostringstream os;
        app.exit(e, os, os);
        throw HelpRequested{os.str()};
      }
      throw UsageError(e.what());
    }
  };
  run_cli11(argv);

  std::string name;
  for (auto& [n, s] : subs) {
    if (app.got_subcommand(s.app)) name = n;
  }
  const detail::FlagTable* flags = &subs.at(name).flags;

  // Merge the config file under the explicit flags and parse again.
  if (auto cfg_path = flags->get("config")) {
    const nlohmann::json doc = detail::load_config(*cfg_path);
    std::vector<std::string> merged = argv;
    for (const auto& [key, value] : doc.items()) {
      if (key == "config" || !flags->has_key(key)) {
        throw UsageError("--config: unknown key '" + key + "' for command " + name);
      }
      if (detail::given_explicitly(argv, key)) continue;
      merged.push_back("--" + key);
      merged.push_back(detail::json_scalar_to_arg(key, value));
    }
    app.clear();
    run_cli11(merged);
  }

  RunConfig cfg;
  const auto& f = *flags;
  if (name == "spectrum-1d") {
    Spectrum1DParams p;
    p.a = f.real("a", p.a);
    p.n_max = f.integer("n-max", p.n_max);
    cfg.command = p;
  } else if (name == "spectrum-disk") {
    SpectrumDiskParams p;
    p.k = f.integer("k", p.k);
    p.a = f.real("a", p.a);
    p.n_max = f.integer("n-max", p.n_max);
    cfg.command = p;
  } else if (name == "mode") {
    ModeParams p;
    if (auto g = f.get("geometry")) p.geometry = detail::parse_geometry(*g);
    p.n = f.integer("n", p.n);
    p.k = f.integer("k", p.k);
    p.a = f.real("a", p.a);
    p.b = f.real("b", p.b);
    p.t = f.real("t", p.t);
    p.points = f.count("points", p.points);
    cfg.command = p;
  } else if (name == "evolve") {
    EvolveParams p;
    if (auto g = f.get("geometry")) p.geometry = detail::parse_geometry(*g);
    if (auto l = f.get("law")) p.law = detail::parse_law(*l);
    p.n = f.integer("n", p.n);
    p.k = f.integer("k", p.k);
    p.a = f.real("a", p.a);
    p.b = f.real("b", p.b);
    p.eps = f.real("eps", p.eps);
    p.omega = f.real("omega", p.omega);
    p.points = f.count("points", p.points);
    p.t_end = f.real("t-end", p.t_end);
    if (auto d = f.get("dt")) p.dt = detail::parse_real("--dt", *d);
    p.cfl = f.real("cfl", p.cfl);
    p.record_every = f.count("record-every", p.record_every);
    cfg.command = p;
  } else if (name == "fermi") {
    FermiParams p;
    p.l0 = f.real("l0", p.l0);
    p.eps = f.real("eps", p.eps);
    p.omega = f.real("omega", p.omega);
    p.n = f.integer("n", p.n);
    p.t_end = f.real("t-end", p.t_end);
    p.points = f.count("points", p.points);
    if (auto d = f.get("dt")) p.dt = detail::parse_real("--dt", *d);
    p.cfl = f.real("cfl", p.cfl);
    p.record_every = f.count("record-every", p.record_every);
    cfg.command = p;
  } else {
    cfg.command = VerifyParams{};
  }

  const bool tabular = name == "mode" || name == "evolve" || name == "fermi" || name == "verify";
  cfg.format = tabular ? OutputFormat::CSV : OutputFormat::JSON;
  if (auto fmt = f.get("format")) cfg.format = detail::parse_format(*fmt);
  if (auto out = f.get("output")) {
    if (out->empty()) throw UsageError("--output: path must not be empty");
    cfg.output_path = *out;
  }
  std::visit([](const auto& p) { detail::validate(p); }, cfg.command);
  return cfg;
}

inline RunConfig parse_args(std::initializer_list<std::string> argv) {
  const std::vector<std::string> v(argv);
  return parse_args(std::span<const std::string>(v));
}

/// Argument vector that parses back to `cfg`; every field is spelled out.
inline std::vector<std::string> render(const RunConfig& cfg) {
  std::vector<std::string> out{command_name(cfg.command)};
  auto put = [&out](const char* key, const std::string& v) {
    out.push_back(std::string("--") + key);
    out.push_back(v);
  };
  auto put_i = [&put](const char* key, long long v) { put(key, std::to_string(v)); };
  auto put_r = [&put](const char* key, double v) { put(key, fmt17(v)); };

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Spectrum1DParams>) {
          put_r("a", p.a);
          put_i("n-max", p.n_max);
        } else if constexpr (std::is_same_v<P, SpectrumDiskParams>) {
          put_i("k", p.k);
          put_r("a", p.a);
          put_i("n-max", p.n_max);
        } else if constexpr (std::is_same_v<P, ModeParams>) {
          put("geometry", to_string(p.geometry));
          put_i("n", p.n);
          put_i("k", p.k);
          put_r("a", p.a);
          put_r("b", p.b);
          put_r("t", p.t);
          put_i("points", static_cast<long long>(p.points));
        } else if constexpr (std::is_same_v<P, EvolveParams>) {
          put("geometry", to_string(p.geometry));
          put("law", to_string(p.law));
          put_i("n", p.n);
          put_i("k", p.k);
          put_r("a", p.a);
          put_r("b", p.b);
          put_r("eps", p.eps);
          put_r("omega", p.omega);
          put_i("points", static_cast<long long>(p.points));
          put_r("t-end", p.t_end);
          if (p.dt) put_r("dt", *p.dt);
          put_r("cfl", p.cfl);
          put_i("record-every", static_cast<long long>(p.record_every));
        } else if constexpr (std::is_same_v<P, FermiParams>) {
          put_r("l0", p.l0);
          put_r("eps", p.eps);
          put_r("omega", p.omega);
          put_i("n", p.n);
          put_r("t-end", p.t_end);
          put_i("points", static_cast<long long>(p.points));
          if (p.dt) put_r("dt", *p.dt);
          put_r("cfl", p.cfl);
          put_i("record-every", static_cast<long long>(p.record_every));
        }
      },
      cfg.command);
  put("format", to_string(cfg.format));
  if (cfg.output_path) put("output", *cfg.output_path);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline std::string render_series(const ObservableSeries& series, OutputFormat format) {
  if (series.samples.empty()) throw DomainError("write_series: series is empty");
  if (format == OutputFormat::CSV) {
    std::string out = "t,L,norm,energy\n";
    for (const auto& s : series.samples) {
      out += fmt17(s.t) + ',' + fmt17(s.L) + ',' + fmt17(s.norm) + ',' + fmt17(s.energy) + '\n';
    }
    return out;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : series.samples) {
    rows.push_back({{"t", s.t}, {"L", s.L}, {"norm", s.norm}, {"energy", s.energy}});
  }
  nlohmann::ordered_json doc;
  doc["samples"] = std::move(rows);
  return doc.dump(2) + "\n";
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

/// Serializes first, so an empty series or bad format never touches `path`.
inline void write_series(const ObservableSeries& series, const std::string& path,
                         OutputFormat format) {
  write_text_file(path, render_series(series, format));
}

namespace detail {

inline std::string spectrum_1d_output(const Spectrum1DParams& p, OutputFormat fmt) {
  std::vector<double> lams;
  for (int n = 1; n <= p.n_max; ++n) lams.push_back(eigenvalue_1d(n, p.a));
  if (fmt == OutputFormat::CSV) {
    std::string out = "n,lambda\n";
    for (std::size_t i = 0; i < lams.size(); ++i) out += std::to_string(i + 1) + ',' + fmt17(lams[i]) + '\n';
    return out;
  }
  nlohmann::ordered_json doc;
  doc["case"] = "box1d";
  doc["a"] = p.a;
  doc["eigenvalues"] = lams;
  return doc.dump() + "\n";
}

inline std::string spectrum_disk_output(const SpectrumDiskParams& p, OutputFormat fmt) {
  const DiskSpectrum spec = disk_spectrum(p.k, p.a, p.n_max);
  if (static_cast<int>(spec.eigenvalues.size()) < p.n_max) {
    (void)disk_eigenvalues(p.k, p.a, p.n_max);  // raises IncompleteSpectrum with the details
  }
  if (fmt == OutputFormat::CSV) {
    std::string out = "n,lambda,residual\n";
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
      out += std::to_string(i + 1) + ',' + fmt17(spec.eigenvalues[i]) + ',' +
             fmt17(spec.residuals[i]) + '\n';
    }
    return out;
  }
  nlohmann::ordered_json doc;
  doc["case"] = "disk";
  doc["k"] = p.k;
  doc["a"] = p.a;
  doc["numerically_defined"] = p.k <= -1;
  doc["eigenvalues"] = spec.eigenvalues;
  doc["residuals"] = spec.residuals;
  return doc.dump() + "\n";
}

inline std::string mode_output(const ModeParams& p, OutputFormat fmt) {
  const Grid grid(p.points);
  FieldState s;
  double lambda = 0.0;
  if (p.geometry == GeometryKind::Box) {
    const Mode1D mode = make_mode_1d(p.n, p.a, p.b);
    s = exact_mode_state_1d(mode, p.t, grid, p.t);
    lambda = mode.lambda;
  } else {
    const DiskMode mode = make_disk_mode(p.k, p.n, p.a, p.b);
    s = exact_mode_state_disk(mode, p.t, grid, p.t);
    lambda = mode.lambda;
  }
  const double L = boundary_position(s.law, p.t);
  if (fmt == OutputFormat::CSV) {
    std::string out = "x,re_psi1,im_psi1,re_psi2,im_psi2\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out += fmt17(grid[j] * L) + ',' + fmt17(s.psi1[j].real()) + ',' + fmt17(s.psi1[j].imag()) +
             ',' + fmt17(s.psi2[j].real()) + ',' + fmt17(s.psi2[j].imag()) + '\n';
    }
    return out;
  }
  std::vector<double> x, r1, i1, r2, i2;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    x.push_back(grid[j] * L);
    r1.push_back(s.psi1[j].real());
    i1.push_back(s.psi1[j].imag());
    r2.push_back(s.psi2[j].real());
    i2.push_back(s.psi2[j].imag());
  }
  nlohmann::ordered_json doc;
  doc["case"] = p.geometry == GeometryKind::Box ? "box1d" : "disk";
  doc["n"] = p.n;
  doc["k"] = p.k;
  doc["a"] = p.a;
  doc["b"] = p.b;
  doc["t"] = p.t;
  doc["lambda"] = lambda;
  doc["x"] = x;
  doc["re_psi1"] = r1;
  doc["im_psi1"] = i1;
  doc["re_psi2"] = r2;
  doc["im_psi2"] = i2;
  return doc.dump() + "\n";
}

inline EvolutionConfig stepping(double t_end, const std::optional<double>& dt, double cfl,
                                std::size_t record_every) {
  EvolutionConfig c;
  if (dt) {
    c.dt = *dt;
  } else {
    c.dt = AutoStep{cfl};
  }
  c.t_end = t_end;
  c.record_every = record_every;
  return c;
}

inline FieldState evolve_initial_state(const EvolveParams& p) {
  const Grid grid(p.points);
  BoundaryLaw law = [&] {
    switch (p.law) {
      case LawKind::Static: return BoundaryLaw(StaticWall{p.b}, p.t_end);
      case LawKind::Linear: return linear_law(p.a, p.b, p.t_end);
      case LawKind::Breathing: break;
    }
    return BoundaryLaw(BreathingWall{p.b, p.eps, p.omega}, p.t_end);
  }();
  const bool linear = p.law == LawKind::Linear;
  if (p.geometry == GeometryKind::Box) {
    if (linear && p.a != 0.0) return exact_mode_state_1d(make_mode_1d(p.n, p.a, p.b), 0.0, grid, p.t_end);
    return static_mode_state(make_static_mode(p.n, p.b), grid, std::move(law));
  }
  const DiskMode mode = make_disk_mode(p.k, p.n, linear ? p.a : 0.0, p.b);
  FieldState s = exact_mode_state_disk(mode, 0.0, grid, p.t_end);
  s.law = std::move(law);
  return s;
}

inline ObservableSeries evolve_series(const EvolveParams& p) {
  const FieldState initial = evolve_initial_state(p);
  ObservableSeries series;
  evolve_observed(initial, stepping(p.t_end, p.dt, p.cfl, p.record_every),
                  [&series](const FieldState& s) {
                    series.samples.push_back({s.t, boundary_position(s.law, s.t), norm(s), energy(s)});
                  });
  return series;
}

inline ObservableSeries fermi_series(const FermiParams& p) {
  const BoundaryLaw law(BreathingWall{p.l0, p.eps, p.omega}, p.t_end);
  return run_fermi(p.n, law, p.points, stepping(p.t_end, p.dt, p.cfl, p.record_every));
}

inline std::vector<RunConfig> sample_configs() {
  EvolveParams ev;
  ev.geometry = GeometryKind::Disk;
  ev.law = LawKind::Breathing;
  ev.eps = 0.1;
  ev.omega = 3.0;
  ev.dt = 1e-3;
  return {RunConfig{Spectrum1DParams{-0.3, 7}, std::nullopt, OutputFormat::JSON},
          RunConfig{SpectrumDiskParams{-2, 0.1, 4}, "out.json", OutputFormat::CSV},
          RunConfig{ModeParams{GeometryKind::Disk, 2, 1, 0.25, 2.0, 0.5, 33}, std::nullopt,
                    OutputFormat::JSON},
          RunConfig{ev, "series.csv", OutputFormat::CSV},
          RunConfig{FermiParams{}, std::nullopt, OutputFormat::CSV},
          RunConfig{VerifyParams{}, std::nullopt, OutputFormat::CSV}};
}

inline void cli_checks(verification::Report& r) {
  static constexpr const char* m = "cli-io";
  r.guarded(m, "round trip", [](verification::Report& rr) {
    double mismatches = 0.0;
    for (const RunConfig& c : sample_configs()) {
      if (!(parse_args(render(c)) == c)) mismatches += 1.0;
    }
    rr.at_most(m, "configs with parse_args(render(c)) != c", mismatches, 0.0);
  });
  r.guarded(m, "determinism", [](verification::Report& rr) {
    const Spectrum1DParams sp{0.5, 10};
    const ModeParams mp{GeometryKind::Box, 3, 0, 0.5, 1.0, 0.25, 65};
    double differing = 0.0;
    for (OutputFormat f : {OutputFormat::CSV, OutputFormat::JSON}) {
      if (spectrum_1d_output(sp, f) != spectrum_1d_output(sp, f)) differing += 1.0;
      if (mode_output(mp, f) != mode_output(mp, f)) differing += 1.0;
    }
    rr.at_most(m, "repeated renders that differ byte-wise", differing, 0.0);
  });
}

}  // namespace detail

/// Executes a validated config, writing to cfg.output_path or `out`.
/// Diagnostics go to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string content;
  int code = kExitOk;
  try {
    content = std::visit(
        [&](const auto& p) -> std::string {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, Spectrum1DParams>) {
            return detail::spectrum_1d_output(p, cfg.format);
          } else if constexpr (std::is_same_v<P, SpectrumDiskParams>) {
            return detail::spectrum_disk_output(p, cfg.format);
          } else if constexpr (std::is_same_v<P, ModeParams>) {
            return detail::mode_output(p, cfg.format);
          } else if constexpr (std::is_same_v<P, EvolveParams>) {
            return render_series(detail::evolve_series(p), cfg.format);
          } else if constexpr (std::is_same_v<P, FermiParams>) {
            return render_series(detail::fermi_series(p), cfg.format);
          } else {
            std::ostringstream report;
            const bool ok = verification::run_all(report, detail::cli_checks);
            if (!ok) code = kExitVerifyFailed;
            return report.str();
          }
        },
        cfg.command);
  } catch (const Error& e) {
    err << "error: " << command_name(cfg.command) << " failed: " << e.what() << '\n';
    return kExitNumerical;
  }
  try {
    if (cfg.output_path) {
      write_text_file(*cfg.output_path, content);
    } else {
      out << content;
      out.flush();
      if (!out) throw IoError("failed writing to standard output");
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return code;
}

/// parse_args + run with the exit-code mapping of the command-line tool.
inline int main_entry(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return run(cfg, out, err);
}

}  // namespace dirac_billiard::cli
