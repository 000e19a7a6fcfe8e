/// @file lagrflow_main.cpp
/// @brief Command-line front end: list the family catalog, verify a
///        configured solution, and export particle trajectories and
///        vorticity snapshots as deterministic CSV.
///
/// Exit codes: 0 on success, 1 when verification fails or the numerics give
/// out (the offending check is named on stderr), 2 on configuration or
/// usage errors (with the field path when one is known).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lagrflow/errors.hpp"
#include "lagrflow/expr.hpp"
#include "lagrflow/families.hpp"
#include "lagrflow/verify.hpp"

namespace {

using namespace lagrflow;

/// 17 significant digits round-trip doubles exactly; the C locale keeps the
/// decimal separator a point regardless of the environment.
std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CommonArgs {
  std::string config_path;
  std::string family_id;
  std::string out_dir = ".";
  bool json = false;
  double tol = 0.0;       // 0 = keep the default
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_tol) {
  cmd->add_option("config", args.config_path,
                  "configuration file (JSON); see `list --json` for the "
                  "catalog shapes");
  cmd->add_option("--family", args.family_id,
                  "use the catalog configuration of this family instead of "
                  "a file");
  cmd->add_option("--out", args.out_dir, "output directory (created if "
                  "missing)");
  cmd->add_flag("--json", args.json, "machine-readable stdout");
  if (with_tol)
    cmd->add_option("--tol", args.tol,
                    "constancy tolerance override (default 1e-6)")
        ->check(CLI::PositiveNumber);
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&args](std::uint64_t v) {
        args.seed = v;
        args.seed_set = true;
      },
      "seed override for randomized draws");
}

FamilyConfig load_config(const CommonArgs& args) {
  if (!args.config_path.empty() && !args.family_id.empty())
    throw ConfigError(
        "config: give either a configuration file or --family, not both");
  FamilyConfig cfg;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in)
      throw ConfigError("config: cannot open '" + args.config_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    cfg = FamilyConfig::from_json(text);
  } else if (!args.family_id.empty()) {
    cfg = catalog_config(args.family_id);
  } else {
    throw ConfigError("config: provide a configuration file or --family <id>");
  }
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

std::filesystem::path ensure_out_dir(const CommonArgs& args) {
  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Time samples across the usable horizon, endpoints included.
std::vector<double> time_samples(const FlowMap& fm) {
  const double te = std::min(fm.tc.t1, fm.tc.t_end);
  const int nt = std::max(fm.grid_t, 2);
  std::vector<double> times(static_cast<std::size_t>(nt));
  for (int it = 0; it < nt; ++it)
    times[static_cast<std::size_t>(it)] =
        fm.tc.t0 + (te - fm.tc.t0) * it / double(nt - 1);
  return times;
}

bool excluded_at(const FlowMap& fm, const Vec3& z) {
  for (const ExprPtr& e : fm.exclusions) {
    Env<double> env{{"z1", z[0]}, {"z2", z[1]}, {"z3", z[2]}};
    if (std::abs(eval(e, env)) < 1e-3) return true;
  }
  return false;
}

/// The same deterministic lattice the verifier walks.
std::vector<Vec3> lattice_points(const FlowMap& fm) {
  std::vector<Vec3> zs;
  const int n = std::max(fm.grid_n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 z{};
        const int idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          z[a] = fm.box_lo[a] +
                 (fm.box_hi[a] - fm.box_lo[a]) * idx[a] / double(n - 1);
        }
        if (!excluded_at(fm, z)) zs.push_back(z);
      }
    }
  }
  if (zs.empty())
    throw ConfigError("domain: every lattice point is excluded");
  return zs;
}

std::vector<Vec3> draw_particles(const FlowMap& fm, int count) {
  std::mt19937_64 gen(fm.seed);
  std::vector<Vec3> zs;
  for (int p = 0; p < count; ++p) {
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      Vec3 z{};
      for (int a = 0; a < 3; ++a) {
        const double u = double(gen() >> 11) * 0x1p-53;
        z[a] = fm.box_lo[a] + (fm.box_hi[a] - fm.box_lo[a]) * u;
      }
      if (!excluded_at(fm, z)) {
        zs.push_back(z);
        found = true;
      }
    }
    if (!found)
      throw ConfigError("domain: could not draw particles off the excluded "
                        "set");
  }
  return zs;
}

/// Sidecar note for downstream consumers: empty object normally, horizon
/// metadata when the run was cut short by a guard.
void write_advisory(const std::filesystem::path& dir, const FlowMap& fm) {
  nlohmann::json js = nlohmann::json::object();
  if (fm.tc.truncated) {
    js["truncated"] = true;
    js["t_end"] = fm.tc.t_end;
    js["reason"] = fm.tc.truncation_reason;
    js["requested_t1"] = fm.tc.t1;
  }
  std::ofstream out(dir / "advisory.json", std::ios::binary);
  out << js.dump(2) << "\n";
}

void write_trajectories(const std::filesystem::path& path, const FlowMap& fm,
                        const std::vector<Vec3>& particles,
                        const std::vector<double>& times) {
  std::ofstream out(path, std::ios::binary);
  out << "particle_id,t,x1,x2,x3,u1,u2,u3\n";
  for (std::size_t p = 0; p < particles.size(); ++p) {
    const SpatialSample s = fm.v.sample(particles[p]);
    for (double t : times) {
      const Vec3 x = fm.phi(s, t);
      const Vec3 u = fm.velocity(s, t);
      out << p << ',' << fmt(t) << ',' << fmt(x[0]) << ',' << fmt(x[1])
          << ',' << fmt(x[2]) << ',' << fmt(u[0]) << ',' << fmt(u[1]) << ','
          << fmt(u[2]) << '\n';
    }
  }
}

std::size_t write_vorticity(const std::filesystem::path& path,
                            const FlowMap& fm,
                            const std::vector<double>& times) {
  const std::vector<Vec3> zs = lattice_points(fm);
  std::vector<SpatialSample> samples;
  samples.reserve(zs.size());
  for (const Vec3& z : zs) samples.push_back(fm.v.sample(z));

  std::ofstream out(path, std::ios::binary);
  out << "t,x1,x2,x3,w1,w2,w3\n";
  std::size_t rows = 0;
  for (double t : times) {
    for (const SpatialSample& s : samples) {
      const Vec3 x = fm.phi(s, t);
      const Vec3 w = fm.vorticity(s, t);
      out << fmt(t) << ',' << fmt(x[0]) << ',' << fmt(x[1]) << ','
          << fmt(x[2]) << ',' << fmt(w[0]) << ',' << fmt(w[1]) << ','
          << fmt(w[2]) << '\n';
      ++rows;
    }
  }
  return rows;
}

int cmd_list(bool json) {
  const std::vector<FamilyInfo>& reg = family_registry();
  if (json) {
    nlohmann::json out = nlohmann::json::array();
    for (const FamilyInfo& info : reg) {
      nlohmann::json row;
      row["id"] = info.id;
      row["m"] = info.m;
      row["kind"] = info.kind;
      row["anchor"] = info.anchor;
      row["parameters"] = info.parameters;
      row["catalog"] = nlohmann::json::parse(catalog_config(info.id).to_json());
      out.push_back(std::move(row));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  for (const FamilyInfo& info : reg) {
    std::printf("%-22s m=%d  %-11s  %s\n", info.id.c_str(), info.m,
                info.kind.c_str(), info.anchor.c_str());
  }
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const FamilyConfig cfg = load_config(args);
  const FlowMap fm = build_solution(cfg);
  VerifyOptions opt;
  if (args.tol > 0.0) opt.constancy_tol = args.tol;
  const VerificationReport rep = constancy_report(fm, opt);

  const std::filesystem::path dir = ensure_out_dir(args);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << rep.to_json();
  }

  if (args.json) {
    std::cout << rep.to_json();
  } else {
    for (const CheckResult& c : rep.checks) {
      std::printf("%s  %-20s residual %.3g (tol %.3g)  at %s\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                  c.tolerance, c.location.empty() ? "-" : c.location.c_str());
    }
    if (rep.truncated)
      std::printf("note: horizon truncated at t=%.6g (%s)\n", rep.t_end,
                  rep.truncation_reason.c_str());
    std::printf("%s: %s\n", rep.family.c_str(),
                rep.pass ? "all checks passed" : "verification FAILED");
  }
  if (!rep.pass) {
    for (const CheckResult& c : rep.checks) {
      if (!c.pass) {
        std::cerr << "error: check '" << c.name << "' failed (residual "
                  << c.residual << " > tol " << c.tolerance << ")\n";
        break;
      }
    }
    return 1;
  }
  return 0;
}

int cmd_sample(const CommonArgs& args, bool with_trajectories) {
  const FamilyConfig cfg = load_config(args);
  const FlowMap fm = build_solution(cfg);
  const std::vector<double> times = time_samples(fm);
  const std::filesystem::path dir = ensure_out_dir(args);

  nlohmann::json summary;
  summary["family"] = fm.family;
  if (with_trajectories) {
    const std::vector<Vec3> particles = draw_particles(fm, 10);
    write_trajectories(dir / "trajectories.csv", fm, particles, times);
    summary["trajectories"] = (dir / "trajectories.csv").string();
    summary["particles"] = particles.size();
  }
  const std::size_t rows = write_vorticity(dir / "vorticity.csv", fm, times);
  summary["vorticity"] = (dir / "vorticity.csv").string();
  summary["vorticity_rows"] = rows;
  summary["time_samples"] = times.size();
  summary["truncated"] = fm.tc.truncated;
  write_advisory(dir, fm);
  summary["advisory"] = (dir / "advisory.json").string();

  if (args.json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    if (with_trajectories)
      std::printf("wrote %s (10 particles x %zu times)\n",
                  (dir / "trajectories.csv").string().c_str(), times.size());
    std::printf("wrote %s (%zu rows)\n",
                (dir / "vorticity.csv").string().c_str(), rows);
    std::printf("wrote %s\n", (dir / "advisory.json").string().c_str());
    if (fm.tc.truncated)
      std::printf("note: horizon truncated at t=%.6g (%s)\n", fm.tc.t_end,
                  fm.tc.truncation_reason.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit incompressible-flow maps phi(z,t) = A(t) v(z): "
               "catalog, verification, and field export"};
  app.require_subcommand(1);

  CLI::App* list = app.add_subcommand("list", "list the family catalog");
  bool list_json = false;
  list->add_flag("--json", list_json,
                 "embed the full catalog configurations as JSON");

  CommonArgs verify_args;
  CLI::App* verify =
      app.add_subcommand("verify", "run the constancy checks and write "
                         "report.json");
  add_common(verify, verify_args, /*with_tol=*/true);

  CommonArgs sample_args;
  CLI::App* sample =
      app.add_subcommand("sample", "export particle trajectories and "
                         "vorticity snapshots");
  add_common(sample, sample_args, /*with_tol=*/false);

  CommonArgs vort_args;
  CLI::App* vorticity =
      app.add_subcommand("vorticity", "export vorticity snapshots only");
  add_common(vorticity, vort_args, /*with_tol=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) return cmd_list(list_json);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (sample->parsed()) return cmd_sample(sample_args, true);
    if (vorticity->parsed()) return cmd_sample(vort_args, false);
  } catch (const lagrflow::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lagrflow::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lagrflow::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
