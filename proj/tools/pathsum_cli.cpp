#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifdef PATHSUM_HAVE_OPENMP
#include <omp.h>
#endif

#include "pathsum/cdt.hpp"
#include "pathsum/config.hpp"
#include "pathsum/error.hpp"
#include "pathsum/many_body.hpp"
#include "pathsum/oracle.hpp"
#include "pathsum/special.hpp"
#include "pathsum/two_level.hpp"
#include "pathsum/verify.hpp"

using namespace pathsum;

namespace {

constexpr double pi = std::numbers::pi;

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2 };

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os_ << (k ? "," : "") << cells[k];
    os_ << '\n';
  }
  void values(const std::vector<double>& v) {
    std::vector<std::string> cells;
    for (double x : v) cells.push_back(num(x));
    row(cells);
  }
  // Tables after the first are separated by one blank line.
  void next_table() { os_ << '\n'; }

 private:
  std::ostream& os_;
};

Quadrature parse_rule(ConfigSection& sec, Quadrature fallback) {
  return sec.choice("rule", {"trapezoid", "gregory4"}, fallback == Quadrature::trapezoid ? 0 : 1) == 0
             ? Quadrature::trapezoid
             : Quadrature::gregory4;
}

int run_bloch_siegert(ConfigSection& sec, std::ostream& out) {
  BlochSiegertParams p;
  p.beta = sec.number("beta");
  p.omega = sec.number("omega", 1.0);
  p.omega0 = sec.number("omega0", p.omega);
  p.validate();
  const double t_max = sec.number("t_max", 3.0 * pi / p.beta + 2.0);
  const int n = sec.integer("grid_points", 2001);
  const Quadrature rule = parse_rule(sec, Quadrature::gregory4);
  std::vector<int> orders = sec.has("orders") ? sec.integers("orders") : std::vector<int>{3, 7, 13};
  if (sec.has("order")) orders = {sec.integer("order", 13)};
  const double rtol = sec.number("oracle_rtol", 1e-9);
  sec.finish();

  const TimeGrid g(0.0, t_max, n, rule);
  const auto h = bloch_siegert_lab(p);
  const auto R = propagate([&](double t) { return h.matrix(t); }, g, rtol);
  std::vector<std::vector<double>> P;
  for (int o : orders) P.push_back(transition_probability(p, g, o));

  CsvWriter csv(out);
  std::vector<std::string> head{"t", "P_oracle"};
  for (int o : orders) head.push_back("P_" + std::to_string(o));
  csv.header(head);
  std::vector<double> t(n), Po(n);
  for (int i = 0; i < n; ++i) {
    t[i] = g.t(i);
    Po[i] = std::norm(R.U[i](1, 0));
    std::vector<double> row{t[i], Po[i]};
    for (const auto& col : P) row.push_back(col[i]);
    csv.values(row);
  }

  const auto sf = p.resonant() ? spin_flip_time(p, orders.back()) : SpinFlipTime{NAN, false};
  csv.next_table();
  csv.header({"quantity", "value"});
  csv.row({"t_sf", num(sf.t)});
  csv.row({"t_sf_from_radical", sf.radical ? "1" : "0"});
  csv.row({"t_sf_oracle_first_peak", num(first_peak_time(t, Po))});
  return kOk;
}

int run_cdt(ConfigSection& sec, std::ostream& out) {
  BlochSiegertParams p;
  p.beta = sec.number("beta");
  p.omega = sec.number("omega");
  p.omega0 = sec.number("omega0", 1.0);
  p.validate();
  const double period = 2.0 * pi / p.omega;
  const double t_max = sec.number("periods", 3.0) * period;
  const int n = sec.integer("grid_points", 2001);
  const int avg_periods = sec.integer("average_periods", 10);
  const int samples = sec.integer("samples_per_period", 400);
  const bool with_oracle = sec.integer("oracle", 0) != 0;
  const int n_delta = sec.integer("delta_rows", 10);
  sec.finish();
  if (n_delta < 0) throw ParseError("[cdt]: delta_rows must be non-negative");

  const TimeGrid g(0.0, t_max, n);
  const double avg_line = mean_return_probability(p);
  std::vector<Mat> U;
  if (with_oracle) {
    const auto h = bloch_siegert_lab(p);
    U = propagate([&](double t) { return h.matrix(t); }, g, 1e-10).U;
  }

  CsvWriter csv(out);
  std::vector<std::string> head{"t", "P_upup", "P_psi", "sigma_x", "sigma_x_full", "P_upup_average"};
  if (with_oracle) head.insert(head.end(), {"P_upup_oracle", "P_psi_oracle", "sigma_x_oracle"});
  csv.header(head);
  const Eigen::Vector2cd minus(1 / std::sqrt(2.0), -1 / std::sqrt(2.0)), plus(1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
  for (int i = 0; i < n; ++i) {
    const double t = g.t(i);
    std::vector<double> row{t, return_probability_acc0(p, t), psi_transition_acc0(p, t), sigma_x_acc0(p, t),
                            sigma_x_acc0(p, t, false), avg_line};
    if (with_oracle) {
      row.push_back(std::norm(U[i](0, 0)));
      row.push_back(std::norm(plus.dot(U[i] * minus)));
      row.push_back(2.0 * std::real(std::conj(U[i](0, 0)) * U[i](1, 0)));
    }
    csv.values(row);
  }

  csv.next_table();
  csv.header({"quantity", "value"});
  csv.row({"four_beta_over_omega", num(4.0 * p.beta / p.omega)});
  csv.row({"P_upup_average_numeric",
           num(time_average([&](double t) { return return_probability_acc0(p, t); }, period, avg_periods, samples))});
  csv.row({"P_upup_average_bessel", num(avg_line)});
  csv.row({"P_psi_average_numeric",
           num(time_average([&](double t) { return psi_transition_acc0(p, t); }, period, avg_periods, samples))});

  if (n_delta > 0) {
    const auto r = fluctuation_extrema(0.5, bessel_j0_zero(n_delta) + 0.5);
    csv.next_table();
    csv.header({"n", "struve_root", "j0_zero", "delta", "delta_times_2pi_n"});
    for (std::size_t k = 0; k < r.roots.size() && static_cast<int>(k) < n_delta; ++k)
      csv.row({std::to_string(k + 1), num(r.roots[k]), num(r.j0_zeros[k]), num(r.gaps[k]),
               num(r.gaps[k] * 2.0 * pi * (k + 1))});
  }
  return kOk;
}

// Relative geometry paths resolve against the config file's directory.
std::filesystem::path config_dir;

SpinGeometry load_geometry(ConfigSection& sec) {
  if (sec.has("geometry")) {
    std::filesystem::path path = sec.text("geometry", "");
    if (path.is_relative() && !config_dir.empty()) path = config_dir / path;
    return SpinGeometry::read(path.string());
  }
  const std::string kind = sec.text("synthetic", "");
  if (kind.empty()) throw ParseError("[spin-diffusion]: give either 'geometry = PATH' or 'synthetic = chain|dumbbell'");
  const unsigned seed = sec.seed("seed", 1);
  const double jitter = sec.number("jitter", 0.2);
  if (kind == "chain") return synthetic_chain(sec.integer("sites", 6), sec.number("spacing", 2.2), jitter, seed);
  if (kind == "dumbbell")
    return synthetic_dumbbell(sec.integer("sites_per_cluster", 3), sec.number("intra", 2.0), sec.number("gap", 7.0),
                              jitter, seed);
  throw ParseError("[spin-diffusion]: synthetic must be 'chain' or 'dumbbell', got '" + kind + "'");
}

int site_index(const SpinGeometry& geom, const std::string& token) {
  for (int i = 0; i < geom.size(); ++i)
    if (geom.labels[i] == token) return i;
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end && *end == '\0' && !token.empty() && v >= 0 && v < geom.size()) return static_cast<int>(v);
  throw ParseError("unknown site '" + token + "' (use a label or a 0-based index)");
}

// "singletons", "single", or groups like "H1,H2; H3,H4,H5".
std::vector<std::vector<int>> parse_partition(const SpinGeometry& geom, const std::string& spec) {
  std::vector<std::vector<int>> part;
  if (spec == "singletons") {
    for (int i = 0; i < geom.size(); ++i) part.push_back({i});
    return part;
  }
  if (spec == "single") {
    part.emplace_back();
    for (int i = 0; i < geom.size(); ++i) part.back().push_back(i);
    return part;
  }
  std::istringstream groups(spec);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<int> block;
    std::istringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ParseError("empty site in partition '" + spec + "'");
      block.push_back(site_index(geom, item.substr(b, e - b + 1)));
    }
    part.push_back(block);
  }
  return part;
}

std::vector<double> parse_offsets(ConfigSection& sec, const SpinGeometry& geom) {
  // Offsets in rad/ms; ppm values need the spectrometer frequency.
  std::vector<double> off;
  if (sec.has("offsets")) off = sec.numbers("offsets");
  if (sec.has("offsets_ppm")) {
    const double mhz = sec.number("spectrometer_mhz");
    for (double ppm : sec.numbers("offsets_ppm")) off.push_back(2.0 * pi * ppm * mhz * 1e-3);
  }
  if (sec.has("offset_all")) {
    const double v = sec.number("offset_all");
    off.assign(geom.size(), v);
    if (sec.has("offset_exempt"))
      for (const auto& w : sec.words("offset_exempt")) off[site_index(geom, w)] = 0.0;
  }
  if (!off.empty() && static_cast<int>(off.size()) != geom.size())
    throw ParseError("[spin-diffusion]: " + std::to_string(off.size()) + " offsets for " + std::to_string(geom.size()) +
                     " sites");
  return off;
}

int run_spin_diffusion(ConfigSection& sec, std::ostream& out) {
  const SpinGeometry geom = load_geometry(sec);
  const double khz = sec.number("mas_khz", 10.0);
  const MasSchedule mas{2.0 * pi * khz};
  const double rotor = khz > 0 ? 1.0 / khz : 0.0;
  double t_max = sec.number("t_max", 0.0);
  const double periods = sec.number("rotor_periods", 3.0);
  if (t_max <= 0.0) {
    if (rotor == 0.0) throw ParseError("[spin-diffusion]: t_max is required when mas_khz = 0");
    t_max = periods * rotor;
  }
  const int n = sec.integer("grid_points", 1001);
  const Quadrature rule = parse_rule(sec, Quadrature::trapezoid);
  const double lambda = sec.number("lambda", kNoCutoff);
  const auto partition = parse_partition(geom, sec.text("partition", "singletons"));
  const int initial = site_index(geom, sec.text("initial", geom.labels.empty() ? "0" : geom.labels[0]));
  const auto offsets = parse_offsets(sec, geom);
  const std::vector<double> sweep = sec.has("lambda_sweep") ? sec.numbers("lambda_sweep") : std::vector<double>{};
  const std::vector<double> rotor_sweep = sec.has("sweep_khz") ? sec.numbers("sweep_khz") : std::vector<double>{};
  const double sweep_time = sec.number("sweep_time", 0.05);
  std::vector<int> truncate;
  if (sec.has("truncate_blocks")) truncate = sec.integers("truncate_blocks");
  sec.finish();
  if (!rotor_sweep.empty() && (rotor_sweep.size() != 3 || rotor_sweep[2] <= 0.0 || rotor_sweep[1] < rotor_sweep[0]))
    throw ParseError("[spin-diffusion]: sweep_khz expects 'start, stop, step' with step > 0");

  std::vector<std::string> block_labels;
  for (std::size_t b = 0; b < partition.size(); ++b) block_labels.push_back("B" + std::to_string(b));
  auto h = sector_hamiltonian(geom, mas, offsets);
  const TimeGrid g(0.0, t_max, n, rule);
  const auto bg = block_graph(h, partition, lambda, g, block_labels);
  GreenOptions gopt;
  for (int b : truncate) {
    if (b < 0 || b >= static_cast<int>(partition.size())) throw ParseError("truncate_blocks: no block " + std::to_string(b));
    gopt.truncated.push_back(b);
  }
  const auto r = spin_diffusion(bg, initial, gopt);

  CsvWriter csv(out);
  std::vector<std::string> head{"t"};
  for (const auto& l : geom.labels) head.push_back("P_" + l);
  head.push_back("total");
  csv.header(head);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row{g.t(i)};
    for (int s = 0; s < geom.size(); ++s) row.push_back(r.probability[s][i]);
    row.push_back(r.total[i]);
    csv.values(row);
  }

  csv.next_table();
  csv.header({"lambda", "blocks", "edges_kept", "edges_dropped", "components", "coupling_max"});
  std::vector<double> lambdas{lambda};
  lambdas.insert(lambdas.end(), sweep.begin(), sweep.end());
  for (double l : lambdas) {
    const auto b = l == lambda ? bg : block_graph(h, partition, l, g);
    csv.row({num(l), std::to_string(partition.size()), std::to_string(b.edges.size()), std::to_string(b.dropped.size()),
             std::to_string(b.components), num(b.coupling_max)});
  }

  if (!rotor_sweep.empty()) {
    csv.next_table();
    csv.header({"mas_khz", "P_return_fixed_time", "P_return_two_rotor_periods"});
    const int steps = static_cast<int>(std::floor((rotor_sweep[1] - rotor_sweep[0]) / rotor_sweep[2] + 1e-9));
    for (int k = 0; k <= steps; ++k) {
      const double f = rotor_sweep[0] + k * rotor_sweep[2];
      auto hs = sector_hamiltonian(geom, MasSchedule{2.0 * pi * f}, offsets);
      const TimeGrid gf(0.0, sweep_time, n, rule);
      const double a = spin_diffusion(hs, partition, lambda, initial, gf, gopt).probability[initial].back();
      double b = NAN;
      if (f > 0.0) {
        const TimeGrid g2(0.0, 2.0 / f, n, rule);
        b = spin_diffusion(hs, partition, lambda, initial, g2, gopt).probability[initial].back();
      }
      csv.values({f, a, b});
    }
  }
  return kOk;
}

int run_verify_cmd(ConfigSection& sec, std::ostream& out) {
  VerifyOptions opt;
  opt.grid_points = sec.integer("grid_points", opt.grid_points);
  opt.rule = parse_rule(sec, Quadrature::gregory4);
  opt.seed = sec.seed("seed", opt.seed);
  sec.finish();
  const auto rep = run_verify(opt);
  out << format_report(rep);
  out << (rep.passed() ? "all checks passed\n" : "verify FAILED\n");
  return rep.passed() ? kOk : kCheckFailed;
}

void set_threads(int n) {
  if (n <= 0) {
    if (const char* env = std::getenv("PATHSUM_THREADS")) n = std::atoi(env);
  }
#ifdef PATHSUM_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-sum propagators: two-level drives, CDT closed forms and dipolar spin diffusion"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  int threads = 0, grid_points = 0, order = -1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file with [section] headers");
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--threads", threads, "thread cap (fallback: PATHSUM_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--grid-points", grid_points, "override grid_points")->check(CLI::Range(3, 1 << 20));
  };
  auto* bs = app.add_subcommand("bloch-siegert", "transition probability vs the oracle, orders n, t_sf");
  auto* cdt = app.add_subcommand("cdt", "CDT closed forms, averages and the Struve table");
  auto* sd = app.add_subcommand("spin-diffusion", "single-excitation spin diffusion under MAS");
  auto* vf = app.add_subcommand("verify", "invariant suite");
  for (auto* s : {bs, cdt, sd, vf}) add_common(s);
  bs->add_option("--order", order, "single Neumann order instead of the config list")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    set_threads(threads);
    Config cfg = config_path.empty() ? Config{} : Config::read(config_path);
    if (!config_path.empty()) config_dir = std::filesystem::path(config_path).parent_path();
    if (grid_points > 0) cfg.set(name, "grid_points", std::to_string(grid_points), "--grid-points");
    if (order >= 0) cfg.set(name, "order", std::to_string(order), "--order");
    ConfigSection sec(cfg, name);

    std::ofstream file;
    std::ostringstream buffer;
    int rc = kOk;
    if (name == "bloch-siegert") rc = run_bloch_siegert(sec, buffer);
    else if (name == "cdt") rc = run_cdt(sec, buffer);
    else if (name == "spin-diffusion") rc = run_spin_diffusion(sec, buffer);
    else rc = run_verify_cmd(sec, buffer);

    if (out_path.empty()) {
      std::cout << buffer.str();
    } else {
      file.open(out_path);
      if (!file) throw Error("cannot write '" + out_path + "'");
      file << buffer.str();
    }
    return rc;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
