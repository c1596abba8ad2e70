#include "bubblelab/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "bubblelab/diagnostics.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/numerics.hpp"

namespace bubblelab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool to_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

template <class Int>
bool to_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) {
    double v;
    if (!to_real(part, v)) throw std::invalid_argument("not a number: '" + std::string(part) + "'");
    out.push_back(v);
  }
  return out;
}

InitSpec parse_init(std::string_view value) {
  value = trim(value);
  InitSpec spec;
  if (value == "constant") return spec;
  if (value.starts_with("file:")) {
    spec.kind = InitSpec::Kind::File;
    spec.path = std::string(trim(value.substr(5)));
    if (spec.path.empty()) throw std::invalid_argument("file: needs a path");
    return spec;
  }
  if (value.starts_with("bubble:")) {
    const std::vector<double> v = parse_real_list(value.substr(7));
    if (v.size() != 6) throw std::invalid_argument("bubble: needs lambda,a1,a2,rot1,rot2,rot3");
    spec.kind = InitSpec::Kind::Bubble;
    spec.bubble.lambda = v[0];
    spec.bubble.center = Vec2(v[1], v[2]);
    spec.bubble.rot = RotationParam(Vec3(v[3], v[4], v[5]));
    return spec;
  }
  throw std::invalid_argument("init must be constant, bubble:... or file:...");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  using Setter = std::function<bool(RunConfig&, std::string_view)>;
  auto real_key = [](double RunConfig::*field) {
    return Setter([field](RunConfig& c, std::string_view v) { return to_real(v, c.*field); });
  };
  auto flow_real = [](double FlowConfig::*field) {
    return Setter([field](RunConfig& c, std::string_view v) { return to_real(v, c.flow.*field); });
  };
  const std::map<std::string, Setter, std::less<>> keys = {
      {"subcommand",
       [](RunConfig& c, std::string_view v) {
         c.subcommand = std::string(trim(v));
         return !c.subcommand.empty();
       }},
      {"grid_n", [](RunConfig& c, std::string_view v) { return to_int(v, c.flow.grid_n); }},
      {"dt_safety", flow_real(&FlowConfig::dt_safety)},
      {"t_end", flow_real(&FlowConfig::t_end)},
      {"e_infinity", flow_real(&FlowConfig::e_infinity)},
      {"stop_lambda_h", flow_real(&FlowConfig::stop_lambda_h)},
      {"sample_every", [](RunConfig& c, std::string_view v) { return to_int(v, c.flow.sample_every); }},
      {"dist_every", [](RunConfig& c, std::string_view v) { return to_int(v, c.flow.dist_every); }},
      {"max_steps", [](RunConfig& c, std::string_view v) { return to_int(v, c.flow.max_steps); }},
      {"stop_after_event",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v != "true" && v != "false") return false;
         c.flow.stop_after_event = v == "true";
         return true;
       }},
      {"init",
       [](RunConfig& c, std::string_view v) {
         c.flow.init = parse_init(v);
         return true;
       }},
      {"lambda", real_key(&RunConfig::lambda)},
      {"lambdas",
       [](RunConfig& c, std::string_view v) {
         c.lambdas = parse_real_list(v);
         return true;
       }},
      {"seed", [](RunConfig& c, std::string_view v) { return to_int(v, c.seed); }},
      {"pairing_count", [](RunConfig& c, std::string_view v) { return to_int(v, c.pairing_count); }},
      {"out_csv",
       [](RunConfig& c, std::string_view v) {
         c.out_csv = std::string(trim(v));
         return true;
       }},
      {"out_json",
       [](RunConfig& c, std::string_view v) {
         c.out_json = std::string(trim(v));
         return true;
       }},
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw ParseError(line_no, "unknown key '" + key + "'");
    if (cfg.entries.count(key)) throw ParseError(line_no, "repeated key '" + key + "'");
    bool ok = false;
    try {
      ok = it->second(cfg, value);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(line_no, key + ": " + ex.what());
    }
    if (!ok) throw ParseError(line_no, "bad value for '" + key + "': '" + std::string(value) + "'");
    cfg.entries[key] = std::string(value);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

void check_scale(double lambda, int grid_n, const std::string& what) {
  if (!(lambda >= kLambdaMin)) throw ValidationError(what + ": lambda = " + format_real(lambda) + " violates lambda >= 2");
  const double lh = lambda / grid_n;
  if (lh > kMaxLambdaH + 1e-12)
    throw ValidationError(what + ": lambda h = " + format_real(lh) + " > 0.2 at grid_n = " + std::to_string(grid_n));
}

}  // namespace

void validate(const RunConfig& c) {
  static const std::vector<std::string> subcommands = {"greens-table", "bubble-scan", "flow", "loj-check", "dist-fit"};
  if (std::find(subcommands.begin(), subcommands.end(), c.subcommand) == subcommands.end())
    throw ValidationError("unknown subcommand '" + c.subcommand + "'");
  const FlowConfig& f = c.flow;
  if (f.grid_n < 16) throw ValidationError("grid_n must be at least 16");
  if (!(f.dt_safety > 0.0 && f.dt_safety <= kMaxLambdaH)) throw ValidationError("dt_safety must lie in (0, 0.2]");
  if (!(f.t_end > 0.0) || !std::isfinite(f.t_end)) throw ValidationError("t_end must be positive");
  if (f.sample_every < 1) throw ValidationError("sample_every must be at least 1");
  if (f.dist_every < 0) throw ValidationError("dist_every must be non-negative");
  if (f.max_steps < 0) throw ValidationError("max_steps must be non-negative");
  if (!std::isfinite(f.e_infinity)) throw ValidationError("e_infinity must be finite");
  if (!(f.stop_lambda_h >= 0.0)) throw ValidationError("stop_lambda_h must be non-negative");
  if (c.pairing_count < 1) throw ValidationError("pairing_count must be at least 1");
  if (c.entries.count("lambda")) check_scale(c.lambda, f.grid_n, "lambda");
  for (double l : c.lambdas) check_scale(l, f.grid_n, "lambdas");
  if (f.init.kind == InitSpec::Kind::Bubble) {
    check_scale(f.init.bubble.lambda, f.grid_n, "init");
    const Vec2& a = f.init.bubble.center;
    if (!(a.x() >= 0.0 && a.x() < 1.0 && a.y() >= 0.0 && a.y() < 1.0))
      throw ValidationError("init: attachment point must lie in [0,1)^2");
  }
}

// --- manifests ---------------------------------------------------------------------------

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

Manifest make_manifest(const std::string& subcommand, const std::map<std::string, std::string>& entries) {
  std::ostringstream os;
  os << "bubblelab " << kVersion << '\n' << "subcommand=" << subcommand << '\n';
  for (const auto& [k, v] : entries)
    if (k != "subcommand") os << k << '=' << v << '\n';
  os << "floats: IEEE-754 binary64, written with 17 significant digits\n";
  Manifest m;
  m.text = os.str();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(m.text)));
  m.hash = buf;
  return m;
}

void write_manifest_file(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# manifest " << manifest.hash << '\n' << manifest.text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// --- serialization -----------------------------------------------------------------------

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_series(std::ostream& os, const std::vector<DiagnosticsRecord>& records, const std::string& manifest_hash) {
  if (!manifest_hash.empty()) os << "# manifest " << manifest_hash << '\n';
  os << kFlowColumns << '\n';
  for (const auto& r : records) {
    for (double v : {r.t, r.energy, r.tension_l2, r.lambda, r.a1, r.a2, r.ratio_scale, r.ratio_energy, r.dist_z})
      os << format_real(v) << ',';
    os << r.events << '\n';
  }
}

void write_scan(std::ostream& os, const std::vector<ScanRow>& rows, const std::string& manifest_hash) {
  if (!manifest_hash.empty()) os << "# manifest " << manifest_hash << '\n';
  os << kScanColumns << '\n';
  for (const auto& r : rows) {
    os << format_real(r.lambda);
    for (double v : {r.energy, r.gap, r.dE_dlambda, r.leading_term, r.tension_l2, r.pairing_sup, r.far_field_sup})
      os << ',' << format_real(v);
    os << '\n';
  }
}

void write_summary(std::ostream& os, nlohmann::json summary, const std::string& manifest_hash) {
  if (!manifest_hash.empty()) summary["manifest"] = manifest_hash;
  os << summary.dump(2) << '\n';
}

nlohmann::json scan_summary(const std::vector<ScanRow>& rows, const ScanFit& fit) {
  using nlohmann::json;
  json lambdas = json::array();
  for (const auto& r : rows) lambdas.push_back(r.lambda);
  json s;
  s["lambdas"] = lambdas;
  s["fits"] = {
      {"gap_slope", {{"value", fit.gap_slope}, {"target", -2.0}, {"tolerance", 0.1}}},
      {"gap_prefactor_over_8pi2", {{"value", fit.gap_prefactor}, {"target", 1.0}, {"tolerance", 0.05}}},
      {"far_field_slope", {{"value", fit.far_field_slope}, {"target", -1.0}, {"tolerance", 0.1}}},
      {"tension_slope", {{"value", fit.tension_slope}, {"target", -1.0}, {"tolerance", 0.15}}},
      {"pairing_slope", {{"value", fit.pairing_slope}, {"target", -2.0}, {"tolerance", 0.3}}},
      {"leading_residual_slope", {{"value", fit.leading_residual_slope}, {"target", -4.0}, {"tolerance", 0.5}}},
  };
  s["verdict"] = {{"gap", fit.gap_ok},         {"far_field", fit.far_field_ok}, {"tension", fit.tension_ok},
                  {"pairing", fit.pairing_ok}, {"leading", fit.leading_ok},     {"all", fit.all_ok()}};
  return s;
}

std::size_t CsvTable::rows() const { return columns.empty() ? events.size() : columns.begin()->second.size(); }

const std::vector<double>& CsvTable::column(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
  return it->second;
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.starts_with("# manifest ")) t.manifest_hash = line.substr(11);
      continue;
    }
    const auto fields = split(line, ',');
    if (t.header.empty()) {
      for (auto f : fields) {
        t.header.emplace_back(trim(f));
        if (t.header.back() != "events") t.columns[t.header.back()];
      }
      continue;
    }
    if (fields.size() != t.header.size()) throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " fields");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (t.header[i] == "events") {
        t.events.emplace_back(trim(fields[i]));
        continue;
      }
      double v;
      const std::string_view f = trim(fields[i]);
      if (f == "nan" || f == "-nan")
        v = std::nan("");
      else if (f == "inf")
        v = HUGE_VAL;
      else if (f == "-inf")
        v = -HUGE_VAL;
      else if (!to_real(f, v))
        throw ParseError(line_no, "not a number in column " + t.header[i]);
      t.columns[t.header[i]].push_back(v);
    }
  }
  if (t.header.empty()) throw ParseError(line_no, "missing CSV header");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

// --- loj-check ---------------------------------------------------------------------------

namespace {

nlohmann::json bounded_entry(const std::vector<double>& v) {
  nlohmann::json j;
  j["factor"] = kBoundedFactor;
  if (v.empty()) {
    j["pass"] = false;
    j["reason"] = "empty window";
    return j;
  }
  j["max"] = *std::max_element(v.begin(), v.end());
  j["median"] = median(v);
  j["pass"] = bounded_by_median(v, kBoundedFactor);
  return j;
}

std::vector<double> head(const std::vector<double>& v, std::size_t n) { return {v.begin(), v.begin() + n}; }

}  // namespace

nlohmann::json loj_check_flow(const CsvTable& series, const LojCheckOptions& options) {
  using nlohmann::json;
  const auto& t = series.column("t");
  const auto& e = series.column("energy");
  const auto& tau = series.column("tension_l2");
  const auto& lam = series.column("lambda");
  const std::size_t n = resolvable_window(lam, e, tau, 1.0 / options.grid_n, options.e_infinity);

  json v;
  v["window"] = {{"samples", n},
                 {"t_lo", n ? t.front() : 0.0},
                 {"t_hi", n ? t[n - 1] : 0.0},
                 {"lambda_hi", n ? lam[n - 1] : 0.0},
                 {"grid_n", options.grid_n}};
  json crit;
  crit["ratio_scale_bounded"] = bounded_entry(head(series.column("ratio_scale"), n));
  crit["ratio_energy_bounded"] = bounded_entry(head(series.column("ratio_energy"), n));
  std::vector<double> ed(n), tw(n);
  for (std::size_t i = 0; i < n; ++i) {
    ed[i] = e[i] - options.e_infinity;
    tw[i] = tau[i];
  }
  const std::vector<double> ode = ode_ratio_check(ed, tw);
  crit["ode_ratio_bounded"] = bounded_entry(ode);
  if (!ode.empty()) {
    const auto at = std::max_element(ode.begin(), ode.end()) - ode.begin();
    crit["ode_ratio_bounded"]["energy_gap_at_max"] = ed[static_cast<std::size_t>(at)];
    // |log E_d|^{-1} is singular at E_d = 1; the same ratio restricted to
    // |log E_d| >= 1 is reported, not judged.
    std::vector<double> small;
    for (std::size_t i = 0; i < n; ++i)
      if (ed[i] <= std::exp(-1.0)) small.push_back(ode[i]);
    v["info"]["ode_ratio_gap_below_1_over_e"] =
        small.empty() ? json{{"samples", 0}}
                      : json{{"samples", small.size()},
                             {"max", *std::max_element(small.begin(), small.end())},
                             {"median", median(small)}};
  }

  if (series.has("dist_z")) {
    const auto& d = series.column("dist_z");
    std::vector<double> q;
    for (std::size_t i = 0; i < n; ++i)
      if (std::isfinite(d[i])) q.push_back(d[i] / (tau[i] * log_envelope(tau[i])));
    if (q.size() >= 2) {
      const double med = median(q);
      const double mx = *std::max_element(q.begin(), q.end());
      crit["dist_envelope"] = {{"samples", q.size()}, {"max", mx}, {"median", med}, {"factor", 1.5},
                               {"pass", mx <= 1.5 * med}};
    }
  }

  bool monotone = true;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] > e[i - 1] + 1e-8 * e.front()) monotone = false;
  crit["energy_monotone"] = {{"pass", monotone}};
  v["criteria"] = crit;

  std::vector<double> all_t, all_ed;
  for (std::size_t i = 0; i < t.size(); ++i) {
    all_t.push_back(t[i]);
    all_ed.push_back(e[i] - options.e_infinity);
  }
  try {
    const FitResult f = fit_decay(all_t, all_ed);
    v["decay_fit"] = {{"model", f.model},
                      {"rate", f.rate},
                      {"r2_holdout", f.r2_holdout},
                      {"t_lo", f.t_lo},
                      {"t_hi", f.t_hi},
                      {"exp_sqrt", {{"constants", f.exp_sqrt.constants}, {"r2_holdout", f.exp_sqrt.r2_holdout}}},
                      {"power", {{"constants", f.power.constants}, {"r2_holdout", f.power.r2_holdout}}}};
  } catch (const InsufficientData& ex) {
    v["decay_fit"] = {{"model", nullptr}, {"reason", ex.what()}};
  }
  return v;
}

nlohmann::json loj_check_scan(const CsvTable& scan) {
  std::vector<ScanRow> rows(scan.rows());
  const std::vector<std::pair<const char*, double ScanRow::*>> cols = {
      {"lambda", &ScanRow::lambda},         {"energy", &ScanRow::energy},
      {"gap", &ScanRow::gap},               {"dE_dlambda", &ScanRow::dE_dlambda},
      {"leading_term", &ScanRow::leading_term}, {"tension_l2", &ScanRow::tension_l2},
      {"pairing_sup", &ScanRow::pairing_sup},   {"far_field_sup", &ScanRow::far_field_sup}};
  for (const auto& [name, field] : cols) {
    const auto& c = scan.column(name);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].*field = c[i];
  }
  const ScanFit fit = fit_scan(rows);
  nlohmann::json s = scan_summary(rows, fit);
  nlohmann::json crit;
  crit["gap_law"] = {{"pass", fit.gap_ok}, {"slope", fit.gap_slope}, {"prefactor_over_8pi2", fit.gap_prefactor}};
  crit["far_field_slope"] = {{"pass", fit.far_field_ok}, {"slope", fit.far_field_slope}};
  crit["tension_slope"] = {{"pass", fit.tension_ok}, {"slope", fit.tension_slope}};
  crit["pairing_slope"] = {{"pass", fit.pairing_ok}, {"slope", fit.pairing_slope}};
  crit["leading_residual_slope"] = {{"pass", fit.leading_ok}, {"slope", fit.leading_residual_slope}};
  s["criteria"] = crit;
  return s;
}

bool verdict_passed(const nlohmann::json& verdict) {
  if (!verdict.contains("criteria")) return false;
  for (const auto& [k, c] : verdict["criteria"].items())
    if (!c.value("pass", false)) return false;
  return true;
}

std::vector<std::string> write_plot_scripts(const std::string& series_path, const CsvTable& series,
                                            const std::string& out_dir, const LojCheckOptions& options) {
  std::vector<std::string> written;
  auto script = [&](const std::string& name, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<std::string>& plots) {
    const std::string path = out_dir + "/" + name + ".gp";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set terminal pngcairo size 900,600\n"
        << "set output '" << name << ".png'\n"
        << "set xlabel '" << xlabel << "'\n"
        << "set ylabel '" << ylabel << "'\n"
        << "plot ";
    for (std::size_t i = 0; i < plots.size(); ++i) out << (i ? ", \\\n     " : "") << "'" << series_path << "' " << plots[i];
    out << '\n';
    written.push_back(path);
  };
  const std::string einf = format_real(options.e_infinity);
  if (series.has("t")) {
    script("energy_vs_t", "t", "E", {"using 1:2 with lines title 'E(t)'"});
    script("log_ed_vs_sqrt_t", "sqrt(t)", "log(E - E_inf)",
           {"using (sqrt($1)):(($2 - " + einf + ") > 0 ? log($2 - " + einf + ") : NaN) with points title 'log E_d'"});
    script("ratios_vs_t", "t", "ratio",
           {"using 1:7 with lines title 'ratio_scale'", "using 1:8 with lines title 'ratio_energy'"});
  }
  if (series.has("gap")) {
    script("log_gap_vs_log_lambda", "log lambda", "log(E - 4 pi)",
           {"using (log($1)):(log($3)) with linespoints title 'gap'",
            "using (log($1)):(log(8*pi**2/$1**2)) with lines title '8 pi^2 / lambda^2'"});
  }
  return written;
}

}  // namespace bubblelab
