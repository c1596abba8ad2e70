// bubblelab command line: greens-table, bubble-scan, flow, loj-check, dist-fit.
// Exit status: 0 when every in-run assertion holds, 2 on a criterion failure, 1 on error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bubblelab/adapted_bubble.hpp"
#include "bubblelab/bubble_scan.hpp"
#include "bubblelab/cli_io.hpp"
#include "bubblelab/diagnostics.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/flow_engine.hpp"
#include "bubblelab/greens_torus.hpp"

namespace fs = std::filesystem;
using namespace bubblelab;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFailed = 2;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string sibling(const std::string& path, const std::string& ext) {
  return fs::path(path).replace_extension(ext).string();
}

int greens_table(const std::string& out_path, int grid_n, const std::vector<double>& center, double split) {
  const std::map<std::string, std::string> entries = {{"grid_n", std::to_string(grid_n)},
                                                      {"center", format_real(center[0]) + "," + format_real(center[1])},
                                                      {"ewald_split", format_real(split)}};
  const Manifest m = make_manifest("greens-table", entries);
  write_manifest_file(out_path + ".manifest", m);

  const GreensTable table = GreensTable::build(ToroidalGrid(grid_n), Vec2(center[0], center[1]), EwaldOptions{split});
  {
    auto out = open_out(out_path);
    out << "# manifest " << m.hash << '\n';
    table.write_csv(out);
  }
  nlohmann::json summary = nlohmann::json::parse(table.summary_json());
  const bool j_ok = std::abs(table.j_constant + 2.0 * kPi) <= 1e-4;
  const bool g_ok = table.grad_regular_zero.norm() <= 1e-6;
  summary["verdict"] = {{"j_constant", j_ok}, {"grad_regular_zero", g_ok}};
  auto js = open_out(sibling(out_path, ".json"));
  write_summary(js, summary, m.hash);
  std::cout << "J = " << format_real(table.j_constant) << "  |grad_y J(0,0)| = " << format_real(table.grad_regular_zero.norm())
            << '\n';
  return j_ok && g_ok ? kOk : kFailed;
}

int bubble_scan_cmd(const std::string& out_path, const std::vector<double>& lambdas, int grid_n, std::uint64_t seed,
                    int pairing_count) {
  std::ostringstream list;
  for (std::size_t i = 0; i < lambdas.size(); ++i) list << (i ? "," : "") << format_real(lambdas[i]);
  RunConfig cfg = parse_config("subcommand=bubble-scan\ngrid_n=" + std::to_string(grid_n) + "\nlambdas=" + list.str() +
                               "\nseed=" + std::to_string(seed) + "\npairing_count=" + std::to_string(pairing_count) + "\n");
  const Manifest m = make_manifest(cfg.subcommand, cfg.entries);
  write_manifest_file(out_path + ".manifest", m);

  ScanOptions opt;
  opt.grid_n = grid_n;
  opt.seed = seed;
  opt.pairing_count = pairing_count;
  std::vector<ScanRow> rows;
  for (double l : lambdas) {
    rows.push_back(scan_point(l, opt));
    std::cerr << "lambda " << l << ": gap " << format_real(rows.back().gap) << '\n';
  }
  {
    auto out = open_out(out_path);
    write_scan(out, rows, m.hash);
  }
  if (rows.size() < 2) return kOk;
  const ScanFit fit = fit_scan(rows);
  auto js = open_out(sibling(out_path, ".json"));
  write_summary(js, scan_summary(rows, fit), m.hash);
  return fit.all_ok() ? kOk : kFailed;
}

int flow_cmd(const std::string& config_path) {
  const RunConfig cfg = parse_config_file(config_path);
  if (cfg.out_csv.empty()) throw ValidationError("flow needs out_csv");
  const Manifest m = make_manifest("flow", cfg.entries);
  write_manifest_file(cfg.out_csv + ".manifest", m);

  auto out = open_out(cfg.out_csv);
  out << "# manifest " << m.hash << '\n' << kFlowColumns << '\n';
  const FlowResult res = run(cfg.flow, [&](const DiagnosticsRecord& r) {
    std::ostringstream row;
    write_series(row, {r});
    const std::string text = row.str();
    out << text.substr(text.find('\n') + 1) << std::flush;
  });

  nlohmann::json s;
  s["records"] = res.records.size();
  s["steps"] = res.final_state ? res.final_state->steps : 0;
  s["t_final"] = res.final_state ? res.final_state->t : 0.0;
  s["energy_final"] = res.final_state ? res.final_state->energy : 0.0;
  s["rejected_steps"] = res.rejected_steps;
  s["max_sphere_defect"] = res.max_sphere_defect;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : res.events)
    events.push_back({{"t_pre", e.t_pre},
                      {"energy_pre", e.energy_pre},
                      {"lambda_pre", e.lambda_pre},
                      {"t_post", e.t_post},
                      {"energy_post", e.energy_post},
                      {"closed", e.closed},
                      {"drop_over_4pi", e.drop() / kSphereEnergy}});
  s["singular_events"] = events;
  const bool on_sphere = res.max_sphere_defect <= 1e-12;
  s["verdict"] = {{"energy_monotone", res.energy_monotone}, {"on_sphere", on_sphere}};
  if (!cfg.out_json.empty()) {
    auto js = open_out(cfg.out_json);
    write_summary(js, s, m.hash);
  }
  return res.energy_monotone && on_sphere ? kOk : kFailed;
}

int loj_check_cmd(const std::string& series_path, const std::string& out_path, const std::string& plot_dir, int grid_n,
                  double e_infinity) {
  const CsvTable table = read_csv_file(series_path);
  LojCheckOptions opt{grid_n, e_infinity};
  nlohmann::json verdict = table.has("gap") ? loj_check_scan(table) : loj_check_flow(table, opt);
  const std::string dir = plot_dir.empty() ? fs::path(out_path).parent_path().string() : plot_dir;
  const auto scripts =
      write_plot_scripts(fs::absolute(series_path).string(), table, dir.empty() ? std::string(".") : dir, opt);
  verdict["plot_scripts"] = scripts;
  verdict["series"] = series_path;
  auto out = open_out(out_path);
  write_summary(out, verdict, table.manifest_hash);
  const bool ok = verdict_passed(verdict);
  std::cout << (ok ? "pass" : "fail") << '\n';
  return ok ? kOk : kFailed;
}

int dist_fit_cmd(const std::string& field_path, double seed_lambda, const std::vector<double>& center,
                 const std::vector<double>& rot) {
  const ToroidalField3 u = project_to_sphere(read_binary_file(field_path));
  BubbleParams seed;
  seed.lambda = seed_lambda;
  if (center.size() == 2)
    seed.center = Vec2(center[0], center[1]);
  else
    seed.center = detect_bubble(u).center;
  if (rot.size() == 3) seed.rot = RotationParam(Vec3(rot[0], rot[1], rot[2]));
  seed.validate();
  nlohmann::json j;
  try {
    const DistResult r = dist_to_Z(u, seed);
    const Vec3& aa = r.argmin.rot.axis_angle();
    j = {{"dist", r.dist},
         {"evaluations", r.evaluations},
         {"lambda", r.argmin.lambda},
         {"center", {r.argmin.center.x(), r.argmin.center.y()}},
         {"rotation", {aa.x(), aa.y(), aa.z()}},
         {"converged", true}};
  } catch (const NotConverged& ex) {
    j = {{"converged", false}, {"reason", ex.what()}};
    write_summary(std::cout, j);
    return kFailed;
  }
  write_summary(std::cout, j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adapted bubbles and harmonic map flow on the flat square torus"};
  app.require_subcommand(1);

  std::string out, series, field, config, plots;
  int grid_n = 128;
  std::vector<double> center = {0.0, 0.0};
  double split = kPi;
  auto* gt = app.add_subcommand("greens-table", "Tabulate G and grad G on a grid; report J and grad_y J(0,0)");
  gt->add_option("--out", out, "CSV output path")->required();
  gt->add_option("--grid-n", grid_n, "samples per side")->check(CLI::Range(16, 1 << 14));
  gt->add_option("--center", center, "pole location a1,a2")->delimiter(',')->expected(2);
  gt->add_option("--split", split, "Ewald splitting time")->check(CLI::PositiveNumber);

  std::vector<double> lambdas = {20, 28, 40, 56, 80};
  int scan_n = 512;
  std::uint64_t seed = 1;
  int pairing_count = 50;
  auto* bs = app.add_subcommand("bubble-scan", "Energy, tension and pairing of adapted bubbles per lambda");
  bs->add_option("--lambdas", lambdas, "comma-separated scales")->delimiter(',');
  bs->add_option("--out", out, "CSV output path")->required();
  bs->add_option("--grid-n", scan_n, "coarse grid (the fine grid is twice as fine)");
  bs->add_option("--seed", seed, "seed of the random test fields");
  bs->add_option("--pairing-count", pairing_count, "number of random tangent fields");

  auto* fl = app.add_subcommand("flow", "Run harmonic map flow from a key=value config");
  fl->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);

  int loj_n = 256;
  double e_inf = kSphereEnergy;
  auto* lc = app.add_subcommand("loj-check", "Judge a flow series or bubble scan; write plot scripts");
  lc->add_option("--series", series, "flow or scan CSV")->required()->check(CLI::ExistingFile);
  lc->add_option("--out", out, "JSON verdict path")->required();
  lc->add_option("--plots", plots, "directory for gnuplot scripts (default: next to --out)");
  lc->add_option("--grid-n", loj_n, "grid of the flow run");
  lc->add_option("--e-infinity", e_inf, "limit energy");

  double seed_lambda = 0.0;
  std::vector<double> dcenter, drot;
  auto* df = app.add_subcommand("dist-fit", "Distance from a stored field to the bubble family");
  df->add_option("--field", field, "binary field")->required()->check(CLI::ExistingFile);
  df->add_option("--seed-lambda", seed_lambda, "initial scale")->required();
  df->add_option("--center", dcenter, "initial center (default: detected)")->delimiter(',')->expected(2);
  df->add_option("--rotation", drot, "initial axis-angle")->delimiter(',')->expected(3);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gt) return greens_table(out, grid_n, center, split);
    if (*bs) return bubble_scan_cmd(out, lambdas, scan_n, seed, pairing_count);
    if (*fl) return flow_cmd(config);
    if (*lc) return loj_check_cmd(series, out, plots, loj_n, e_inf);
    if (*df) return dist_fit_cmd(field, seed_lambda, dcenter, drot);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kError;
  }
  return kError;
}
