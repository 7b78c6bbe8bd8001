// Command-line front end: model ingestion, analysis dispatch, JSON reports.
//
// Subcommands: check, verify, scan, simulate, region. Reports are single
// JSON documents on standard output; a short human summary goes to standard
// error when that stream is a terminal. Exit codes: 0 certified-stable or
// query success, 1 not-certified, 2 falsified-unstable, 64 usage error,
// 65 input format error, 70 internal error.

#include <CLI11.hpp>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fracnd/io.hpp"
#include "fracnd/lmi.hpp"
#include "fracnd/model.hpp"
#include "fracnd/oracle.hpp"
#include "fracnd/region.hpp"
#include "fracnd/sdpcore.hpp"
#include "fracnd/version.hpp"

namespace {

using fracnd::Json;

constexpr int kExitCertified = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitFalsified = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInput = 65;
constexpr int kExitInternal = 70;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot open input file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json point_to_json(const fracnd::ComplexPoint& p) {
  Json arr = Json::array();
  for (const auto& c : p) arr.push_back(Json::array({c.real(), c.imag()}));
  return arr;
}

Json report_skeleton(const std::string& command,
                     const fracnd::HybridRoesserModel& m,
                     const std::string& path) {
  Json rep = Json::object();
  rep["tool"] = {{"name", fracnd::kToolName}, {"version", fracnd::kToolVersion}};
  rep["command"] = command;
  rep["model"] = {{"path", path},
                  {"fingerprint", fracnd::model_fingerprint(m)},
                  {"nu", m.nu},
                  {"dims", m.dims},
                  {"r", m.r},
                  {"n", m.n()}};
  rep["warnings"] = fracnd::model_warnings(m);
  return rep;
}

void emit(const Json& rep, bool tty_summary) {
  std::cout << rep.dump(2) << "\n";
  if (!tty_summary) return;
  std::ostringstream os;
  os << rep["command"].get<std::string>() << " "
     << rep["model"]["path"].get<std::string>() << ": "
     << rep["verdict"].get<std::string>();
  if (rep.contains("residuals") && rep["residuals"].contains("lambda_max_z"))
    os << "  lambda_max(Z)=" << rep["residuals"]["lambda_max_z"].dump();
  if (rep.contains("scan"))
    os << "  min|Delta|=" << rep["scan"]["min_abs_delta"].dump();
  if (rep.contains("simulation"))
    os << "  decayed=" << rep["simulation"]["decayed"].dump();
  std::cerr << os.str() << "\n";
  for (const auto& w : rep["warnings"])
    std::cerr << "  warning: " << w.get<std::string>() << "\n";
}

struct SharedArgs {
  std::string model_path;
  double margin_base = 1e-6;
  double tol = fracnd::kMembershipTol;
  int samples = 100;
  double radius_cap = 0.0;  // 0 = model-scaled default
  std::uint64_t seed = 12345;
  int jobs = 0;  // 0 = hardware default
};

fracnd::ScanConfig scan_config(const SharedArgs& args,
                               const fracnd::HybridRoesserModel& m) {
  fracnd::ScanConfig cfg;
  cfg.samples_per_dim = args.samples;
  cfg.radius_cap =
      args.radius_cap > 0.0 ? args.radius_cap : fracnd::default_radius_cap(m);
  cfg.seed = args.seed;
  return cfg;
}

int effective_jobs(int jobs_flag) {
  if (jobs_flag > 0) return jobs_flag;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Json run_scan(const fracnd::HybridRoesserModel& m, const SharedArgs& args,
              bool* falsified) {
  const fracnd::ScanConfig cfg = scan_config(args, m);
  const auto points = fracnd::sample_region(fracnd::region_for_model(m), cfg);
  const auto res = fracnd::det_scan(m, points, effective_jobs(args.jobs));
  const double threshold = fracnd::falsification_threshold(m);
  *falsified = res.min_abs_delta < threshold;
  Json out = Json::object();
  out["samples_per_dim"] = cfg.samples_per_dim;
  out["evaluated"] = res.evaluated;
  out["seed"] = cfg.seed;
  out["radius_cap"] = cfg.radius_cap;
  out["min_abs_delta"] = res.min_abs_delta;
  out["argmin"] = point_to_json(res.argmin);
  out["threshold"] = threshold;
  out["falsified"] = *falsified;
  return out;
}

Json residuals_json(const fracnd::VerificationReport& rep) {
  Json out = Json::object();
  out["lambda_max_z"] = rep.lambda_max_z;
  out["min_eig_u"] = rep.min_eig_u;
  if (rep.min_eig_v) out["min_eig_v"] = *rep.min_eig_v;
  out["eps_z"] = rep.tols.eps_z;
  out["eps_p"] = rep.tols.eps_p;
  out["accepted"] = rep.accepted;
  return out;
}

// ----------------------------------------------------------------- check

int cmd_check(const SharedArgs& args, const std::string& form_str,
              bool with_scan, bool with_sim, bool tty) {
  const Timer total;
  const auto m = fracnd::parse_model_text(read_file(args.model_path));
  const auto form = fracnd::certificate_form_from_string(form_str);
  Json rep = report_skeleton("check", m, args.model_path);
  rep["form"] = form_str;

  if (form == fracnd::CertificateForm::Corollary2 &&
      fracnd::corollary2_structurally_limited(m)) {
    rep["warnings"].push_back(
        "corollary2 with discrete coordinates: difference vectors supported "
        "on a discrete block annihilate both the multiplier image and G, so "
        "strict negativity of Z is unattainable for this model shape");
  }

  fracnd::SynthesisOptions opts;
  opts.tols = fracnd::VerifyTolerances::from_model(m, args.margin_base);
  const Timer synth_timer;
  const auto outcome = fracnd::synthesize_certificate(m, form, opts);
  const double synth_ms = synth_timer.ms();

  rep["synthesis"] = {{"status", fracnd::to_string(outcome.solve.status)},
                      {"best_slack", outcome.solve.best_slack},
                      {"newton_steps", outcome.solve.newton_steps},
                      {"outer_rounds", outcome.solve.outer_rounds},
                      {"detail", outcome.solve.detail}};

  std::string verdict = "not-certified";
  if (outcome.certificate) {
    // Self-check: the certificate must survive its own serialization and
    // re-verify on load before the tool may claim success.
    const Json cert_json = fracnd::certificate_to_json(*outcome.certificate);
    const auto reparsed = fracnd::certificate_from_json(cert_json);
    const auto recheck = fracnd::verify_certificate(m, reparsed, opts.tols);
    rep["certificate"] = cert_json;
    rep["residuals"] = residuals_json(*outcome.verification);
    rep["self_check"] = {{"reparsed_accepted", recheck.accepted},
                         {"lambda_max_z", recheck.lambda_max_z}};
    if (recheck.accepted) verdict = "certified-stable";
  }

  bool falsified = false;
  if (with_scan) rep["scan"] = run_scan(m, args, &falsified);
  if (falsified) verdict = "falsified-unstable";

  if (with_sim && m.r == 1 && m.k() == 2) {
    fracnd::SimulationGrid grid;
    grid.x1_boundary = Eigen::MatrixXd::Ones(grid.steps_j, m.dims[0]);
    grid.x2_boundary = Eigen::MatrixXd::Ones(grid.steps_t, m.dims[1]);
    const auto traj = fracnd::simulate_1p1(m, grid);
    const auto decay = fracnd::decay_check(traj, 0.1, 0.01);
    rep["simulation"] = {{"h", grid.h},
                         {"steps_t", grid.steps_t},
                         {"steps_j", grid.steps_j},
                         {"head_peak", decay.head_peak},
                         {"tail_peak", decay.tail_peak},
                         {"decayed", decay.decayed}};
  } else if (with_sim) {
    rep["warnings"].push_back(
        "simulation skipped: it supports exactly one continuous and one "
        "discrete coordinate");
  }

  rep["verdict"] = verdict;
  rep["timings_ms"] = {{"total", total.ms()}, {"synthesis", synth_ms}};
  emit(rep, tty);
  if (verdict == "certified-stable") return kExitCertified;
  return falsified ? kExitFalsified : kExitNotCertified;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const SharedArgs& args, const std::string& cert_path,
               double eps_z_flag, double eps_p_flag, bool tty) {
  const Timer total;
  const auto m = fracnd::parse_model_text(read_file(args.model_path));
  const auto cert = fracnd::parse_certificate_text(read_file(cert_path));
  fracnd::VerifyTolerances tols =
      fracnd::VerifyTolerances::from_model(m, args.margin_base);
  if (eps_z_flag > 0.0) tols.eps_z = eps_z_flag;
  if (eps_p_flag > 0.0) tols.eps_p = eps_p_flag;

  Json rep = report_skeleton("verify", m, args.model_path);
  rep["certificate_path"] = cert_path;
  rep["form"] = fracnd::to_string(cert.form);
  const auto vrep = fracnd::verify_certificate(m, cert, tols);
  rep["residuals"] = residuals_json(vrep);
  rep["verdict"] = vrep.accepted ? "certified-stable" : "not-certified";
  rep["timings_ms"] = {{"total", total.ms()}};
  emit(rep, tty);
  return vrep.accepted ? kExitCertified : kExitNotCertified;
}

// ------------------------------------------------------------------ scan

int cmd_scan(const SharedArgs& args, bool tty) {
  const Timer total;
  const auto m = fracnd::parse_model_text(read_file(args.model_path));
  Json rep = report_skeleton("scan", m, args.model_path);
  bool falsified = false;
  rep["scan"] = run_scan(m, args, &falsified);
  rep["verdict"] = falsified ? "falsified-unstable" : "not-certified";
  rep["timings_ms"] = {{"total", total.ms()}};
  emit(rep, tty);
  return falsified ? kExitFalsified : kExitCertified;
}

// -------------------------------------------------------------- simulate

int cmd_simulate(const SharedArgs& args, double h, int steps_t, int steps_j,
                 double boundary_value, double tail_fraction, double ratio,
                 const std::string& csv_path, bool tty) {
  const Timer total;
  const auto m = fracnd::parse_model_text(read_file(args.model_path));
  if (m.r != 1 || m.k() != 2)
    throw std::invalid_argument(
        "model: the simulator supports exactly one continuous and one "
        "discrete coordinate");
  fracnd::SimulationGrid grid;
  grid.h = h;
  grid.steps_t = steps_t;
  grid.steps_j = steps_j;
  grid.x1_boundary =
      Eigen::MatrixXd::Constant(steps_j, m.dims[0], boundary_value);
  grid.x2_boundary =
      Eigen::MatrixXd::Constant(steps_t, m.dims[1], boundary_value);
  const auto traj = fracnd::simulate_1p1(m, grid);
  const auto decay = fracnd::decay_check(traj, tail_fraction, ratio);

  Json rep = report_skeleton("simulate", m, args.model_path);
  rep["simulation"] = {{"h", h},
                       {"steps_t", steps_t},
                       {"steps_j", steps_j},
                       {"boundary_value", boundary_value},
                       {"tail_fraction", tail_fraction},
                       {"ratio", ratio},
                       {"head_peak", decay.head_peak},
                       {"tail_peak", decay.tail_peak},
                       {"decayed", decay.decayed}};
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv)
      throw std::invalid_argument("cannot open CSV output file: " + csv_path);
    fracnd::write_csv(traj, h, csv);
    rep["simulation"]["csv"] = csv_path;
  }
  rep["verdict"] = "not-certified";
  rep["timings_ms"] = {{"total", total.ms()}};
  emit(rep, tty);
  return kExitCertified;
}

// ---------------------------------------------------------------- region

int cmd_region(const SharedArgs& args,
               const std::vector<std::string>& point_specs, bool tty) {
  const Timer total;
  const auto m = fracnd::parse_model_text(read_file(args.model_path));
  const auto region = fracnd::region_for_model(m);
  Json rep = report_skeleton("region", m, args.model_path);
  Json points = Json::array();
  for (const auto& spec : point_specs) {
    fracnd::ComplexPoint p;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) p.push_back(fracnd::parse_complex(part));
    const bool inside = fracnd::in_region(region, p, args.tol);
    Json entry = Json::object();
    entry["point"] = point_to_json(p);
    entry["in_region"] = inside;
    points.push_back(std::move(entry));
  }
  rep["points"] = std::move(points);
  rep["verdict"] = "not-certified";
  rep["timings_ms"] = {{"total", total.ms()}};
  emit(rep, tty);
  return kExitCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stability analysis for hybrid continuous-discrete fractional-order "
      "multidimensional state-space models"};
  app.require_subcommand(1);

  SharedArgs shared;
  if (const char* env = std::getenv("FRACND_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      std::cerr << "FRACND_SEED: not a valid unsigned integer: " << env
                << "\n";
      return kExitInput;
    }
    shared.seed = static_cast<std::uint64_t>(v);
  }

  const auto add_model_arg = [&shared](CLI::App* sub) {
    sub->add_option("model", shared.model_path, "model JSON file")
        ->required();
  };
  const auto add_scan_args = [&shared](CLI::App* sub) {
    sub->add_option("--samples", shared.samples,
                    "samples per coordinate (default 100)");
    sub->add_option("--radius-cap", shared.radius_cap,
                    "largest sampled modulus (default 2*(1+max row sum))");
    sub->add_option("--seed", shared.seed,
                    "sampling seed (default 12345, or FRACND_SEED)");
    sub->add_option("--jobs", shared.jobs,
                    "scan worker threads (default: available parallelism)");
  };

  auto* check = app.add_subcommand(
      "check", "synthesize a certificate, optionally cross-check oracles");
  std::string form_str = "theorem2";
  bool with_scan = false, with_sim = false;
  add_model_arg(check);
  check->add_option("--form", form_str, "certificate shape (default theorem2)")
      ->check(CLI::IsMember({"theorem2", "corollary1", "corollary2"}));
  check->add_option("--margin", shared.margin_base,
                    "margin base, scaled by 1 + max row sum (default 1e-6)");
  check->add_flag("--scan", with_scan,
                  "also scan |Delta| over the region; may upgrade the "
                  "verdict to falsified-unstable");
  check->add_flag("--simulate", with_sim,
                  "also run the default simulation when the model has one "
                  "continuous and one discrete coordinate");
  add_scan_args(check);

  auto* verify = app.add_subcommand("verify", "re-check a stored certificate");
  std::string cert_path;
  double eps_z_flag = 0.0, eps_p_flag = 0.0;
  add_model_arg(verify);
  verify->add_option("--cert", cert_path, "certificate JSON file")->required();
  verify->add_option("--margin", shared.margin_base,
                     "margin base, scaled by 1 + max row sum (default 1e-6)");
  verify->add_option("--eps-z", eps_z_flag,
                     "absolute acceptance threshold for lambda_max(Z)");
  verify->add_option("--eps-p", eps_p_flag,
                     "absolute positivity threshold for U/V blocks");

  auto* scan = app.add_subcommand(
      "scan", "sample the region and report the smallest |Delta|");
  add_model_arg(scan);
  add_scan_args(scan);

  auto* simulate = app.add_subcommand(
      "simulate", "run the 1+1-coordinate simulator and a decay check");
  double h = 0.05, boundary_value = 1.0, tail_fraction = 0.1, ratio = 0.01;
  int steps_t = 400, steps_j = 20;
  std::string csv_path;
  add_model_arg(simulate);
  // The step-size flag spells out --h, so this subcommand keeps only the
  // long form of the help flag.
  simulate->set_help_flag("--help", "print help and exit");
  simulate->add_option("--h", h, "time step (default 0.05)");
  simulate->add_option("--steps-t", steps_t, "time samples (default 400)");
  simulate->add_option("--steps-j", steps_j, "shift samples (default 20)");
  simulate->add_option("--boundary-value", boundary_value,
                       "constant boundary data value (default 1)");
  simulate->add_option("--tail-fraction", tail_fraction,
                       "window share for the decay check (default 0.1)");
  simulate->add_option("--ratio", ratio,
                       "decay acceptance ratio (default 0.01)");
  simulate->add_option("--csv", csv_path, "write the trajectory as CSV");

  auto* region = app.add_subcommand(
      "region", "test points for region membership");
  std::vector<std::string> point_specs;
  add_model_arg(region);
  region
      ->add_option("--point", point_specs,
                   "comma-separated complex coordinates, e.g. \"0.5+0.5j,2\" "
                   "(repeatable)")
      ->required();
  region->add_option("--tol", shared.tol,
                     "membership tolerance base (default 1e-10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const bool tty = isatty(STDERR_FILENO) != 0;
  try {
    if (app.got_subcommand(check))
      return cmd_check(shared, form_str, with_scan, with_sim, tty);
    if (app.got_subcommand(verify))
      return cmd_verify(shared, cert_path, eps_z_flag, eps_p_flag, tty);
    if (app.got_subcommand(scan)) return cmd_scan(shared, tty);
    if (app.got_subcommand(simulate))
      return cmd_simulate(shared, h, steps_t, steps_j, boundary_value,
                          tail_fraction, ratio, csv_path, tty);
    if (app.got_subcommand(region)) return cmd_region(shared, point_specs, tty);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fracnd::SingularAtPoint& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
