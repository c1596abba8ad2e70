/// @file cli_io.hpp
/// @brief Flat key=value configuration, deterministic CSV/JSON output and run manifests.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bubblelab/bubble_scan.hpp"
#include "bubblelab/flow_engine.hpp"

namespace bubblelab {

inline constexpr const char* kVersion = "0.1.0";

/// Column order of the flow series.
inline constexpr const char* kFlowColumns = "t,energy,tension_l2,lambda,a1,a2,ratio_scale,ratio_energy,dist_z,events";
/// Column order of a bubble scan.
inline constexpr const char* kScanColumns = "lambda,energy,gap,dE_dlambda,leading_term,tension_l2,pairing_sup,far_field_sup";

struct RunConfig {
  std::string subcommand = "flow";
  FlowConfig flow;
  double lambda = 0.0;  // 0 when absent
  std::vector<double> lambdas;
  std::uint64_t seed = 1;
  int pairing_count = 50;
  std::string out_csv;
  std::string out_json;
  /// Keys as written, for the manifest echo.
  std::map<std::string, std::string> entries;
};

/// Lines are `key=value`; blank lines and `#` comments are skipped. Throws
/// ParseError (with the 1-based line) for malformed lines, unknown or repeated
/// keys and unparsable values, and ValidationError for violated preconditions.
RunConfig parse_config(std::string_view text);
RunConfig parse_config_file(const std::string& path);

/// Parses `constant`, `bubble:lambda,a1,a2,rot1,rot2,rot3` or `file:path`.
InitSpec parse_init(std::string_view value);

/// Comma-separated list of reals.
std::vector<double> parse_real_list(std::string_view text);

/// Checks every physical precondition; throws ValidationError naming the first violation.
void validate(const RunConfig& config);

// --- manifests --------------------------------------------------------------------------

struct Manifest {
  std::string text;  // config echo, version and float note
  std::string hash;  // 16 hex digits
};

std::uint64_t fnv1a(std::string_view data);
Manifest make_manifest(const std::string& subcommand, const std::map<std::string, std::string>& entries);
void write_manifest_file(const std::string& path, const Manifest& manifest);

// --- serialization ----------------------------------------------------------------------

/// A 17-significant-digit decimal.
std::string format_real(double v);

/// Header plus one row per record. A non-empty hash adds a leading `# manifest <hash>` line.
void write_series(std::ostream& os, const std::vector<DiagnosticsRecord>& records, const std::string& manifest_hash = {});
void write_scan(std::ostream& os, const std::vector<ScanRow>& rows, const std::string& manifest_hash = {});

/// Sorted-key JSON with two-space indentation; a non-empty hash is stored under "manifest".
void write_summary(std::ostream& os, nlohmann::json summary, const std::string& manifest_hash = {});

nlohmann::json scan_summary(const std::vector<ScanRow>& rows, const ScanFit& fit);

/// A CSV read back: numeric columns by name plus the raw text of `events`.
struct CsvTable {
  std::string manifest_hash;
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> columns;
  std::vector<std::string> events;
  std::size_t rows() const;
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const { return columns.count(name) > 0; }
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

// --- loj-check ---------------------------------------------------------------------------

struct LojCheckOptions {
  int grid_n = 256;  // grid of the flow run, for the lambda h <= 0.2 window
  double e_infinity = kSphereEnergy;
};

/// Verdict for a flow series: bounded ratio_scale, ratio_energy and ODE ratio over
/// the resolvable window, the dist_z envelope when dist_z was sampled, and the
/// decay fit (reported, never judged). Keys: "criteria", "window", "decay_fit".
nlohmann::json loj_check_flow(const CsvTable& series, const LojCheckOptions& options);
/// Verdict for a bubble scan: the fit_scan slopes and prefactor.
nlohmann::json loj_check_scan(const CsvTable& scan);
/// True when every entry under "criteria" has "pass": true.
bool verdict_passed(const nlohmann::json& verdict);

/// Gnuplot scripts for the figures of a series; returns the written paths.
std::vector<std::string> write_plot_scripts(const std::string& series_path, const CsvTable& series,
                                            const std::string& out_dir, const LojCheckOptions& options);

}  // namespace bubblelab
