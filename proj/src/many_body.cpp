#include "pathsum/many_body.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "pathsum/error.hpp"

namespace pathsum {

void SpinGeometry::validate() const {
  if (positions.size() < 2) throw Error("spin geometry needs at least two sites");
  if (!labels.empty() && labels.size() != positions.size()) throw Error("one label per site expected");
  for (const auto& p : positions)
    if (!p.allFinite()) throw Error("non-finite spin coordinate");
  for (std::size_t a = 0; a < positions.size(); ++a)
    for (std::size_t b = a + 1; b < positions.size(); ++b)
      if ((positions[a] - positions[b]).norm() == 0.0)
        throw Error("sites " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
}

SpinGeometry SpinGeometry::parse(const std::string& text) {
  SpinGeometry g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label)) continue;
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw ParseError("geometry line " + std::to_string(lineno) + ": expected 'label x y z'");
    std::string extra;
    if (ls >> extra) throw ParseError("geometry line " + std::to_string(lineno) + ": unexpected '" + extra + "'");
    g.labels.push_back(label);
    g.positions.emplace_back(x, y, z);
  }
  g.validate();
  return g;
}

SpinGeometry SpinGeometry::read(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open geometry file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

SpinGeometry synthetic_chain(int n, double spacing, double jitter, unsigned seed) {
  if (n < 2 || !(spacing > 2.0 * jitter) || jitter < 0.0) throw Error("synthetic chain needs n ≥ 2 and spacing > 2·jitter");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  SpinGeometry g;
  for (int k = 0; k < n; ++k) {
    const double dx = u(rng), dy = u(rng), dz = u(rng);
    g.positions.emplace_back(k * spacing + dx, dy, dz);
    g.labels.push_back("H" + std::to_string(k + 1));
  }
  return g;
}

SpinGeometry synthetic_dumbbell(int n_per, double intra, double gap, double jitter, unsigned seed) {
  if (n_per < 1 || !(intra > 2.0 * jitter) || !(gap > intra * n_per)) throw Error("invalid dumbbell dimensions");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  SpinGeometry g;
  for (int side = 0; side < 2; ++side)
    for (int k = 0; k < n_per; ++k) {
      // Sites on a small ring around each centre.
      const double a = 2.0 * std::numbers::pi * k / n_per;
      const double rad = n_per > 1 ? intra / (2.0 * std::sin(std::numbers::pi / n_per)) : 0.0;
      const double dx = u(rng), dy = u(rng), dz = u(rng);
      g.positions.emplace_back(side * gap + dx, rad * std::cos(a) + dy, rad * std::sin(a) + dz);
      g.labels.push_back(std::string(side ? "B" : "A") + std::to_string(k + 1));
    }
  return g;
}

double mas_xi(double psi, double phi, double omega_r_t) {
  const double s = std::sin(psi), c = std::cos(psi);
  return 2.0 * std::sqrt(2.0) * s * c * std::sin(phi + omega_r_t) + s * s * std::cos(2.0 * phi + 2.0 * omega_r_t);
}

CouplingSchedule::CouplingSchedule(int n, std::vector<PairCoupling> pairs, MasSchedule mas)
    : n_(n), pairs_(std::move(pairs)), mas_(mas) {
  if (mas.omega_r < 0.0) throw Error("rotor angular velocity must be non-negative");
}

double CouplingSchedule::omega(const PairCoupling& p, double t) const {
  const double wt = mas_.is_static() ? 0.0 : mas_.omega_r * t;
  return p.scale * 0.5 * mas_xi(p.psi, p.phi, wt);
}

Eigen::MatrixXd CouplingSchedule::at(double t) const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& p : pairs_) w(p.i, p.j) = w(p.j, p.i) = omega(p, t);
  return w;
}

CouplingSchedule coupling_schedule(const SpinGeometry& geom, const MasSchedule& mas) {
  geom.validate();
  std::vector<PairCoupling> pairs;
  for (int i = 0; i < geom.size(); ++i)
    for (int j = i + 1; j < geom.size(); ++j) {
      const Eigen::Vector3d r = geom.positions[j] - geom.positions[i];
      const double d = r.norm();
      PairCoupling p;
      p.i = i;
      p.j = j;
      p.scale = geom.prefactor / (d * d * d);
      p.psi = std::acos(std::clamp(r.z() / d, -1.0, 1.0));
      p.phi = std::atan2(r.y(), r.x());
      pairs.push_back(p);
    }
  return CouplingSchedule(geom.size(), std::move(pairs), mas);
}

Mat SectorHamiltonian::operator()(double t) const {
  const int n = size();
  const Eigen::MatrixXd w = couplings.at(t);
  Mat H = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double d = offsets.empty() ? 0.0 : offsets[i];
    for (int l = 0; l < n; ++l) {
      if (l == i) continue;
      d -= 0.5 * w(i, l);
      H(i, l) = -0.25 * w(i, l);
    }
    H(i, i) = d + (keep_common_phase ? common_phase(t) : 0.0);
  }
  return H;
}

double SectorHamiltonian::common_phase(double t) const {
  double c = 0.0;
  for (const auto& p : couplings.pairs()) c += 0.25 * couplings.omega(p, t);
  for (double o : offsets) c -= 0.5 * o;
  return c;
}

SectorHamiltonian sector_hamiltonian(const SpinGeometry& geom, const MasSchedule& mas, std::vector<double> offsets) {
  if (!offsets.empty() && static_cast<int>(offsets.size()) != geom.size())
    throw Error("one offset per site expected");
  SectorHamiltonian h;
  h.couplings = coupling_schedule(geom, mas);
  h.offsets = std::move(offsets);
  return h;
}

BlockGraph block_graph(const SectorHamiltonian& h, const std::vector<std::vector<int>>& partition, double lambda,
                       const TimeGrid& grid, std::vector<std::string> labels) {
  if (!(lambda > 0.0)) throw Error("cutoff Λ must be positive");
  const int nb = static_cast<int>(partition.size()), N = h.size();
  std::vector<int> block_of(N, -1);
  for (int b = 0; b < nb; ++b)
    for (int k : partition[b]) {
      if (k < 0 || k >= N) throw Error("partition index " + std::to_string(k) + " out of range");
      if (block_of[k] >= 0) throw Error("partition blocks overlap at index " + std::to_string(k));
      block_of[k] = b;
    }
  for (int k = 0; k < N; ++k)
    if (block_of[k] < 0) throw Error("partition does not cover site " + std::to_string(k));

  std::vector<Mat> samples(grid.n_points);
  Eigen::MatrixXd peak = Eigen::MatrixXd::Zero(nb, nb);
  for (int i = 0; i < grid.n_points; ++i) {
    samples[i] = h(grid.t(i));
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        const int a = block_of[r], b = block_of[c];
        if (a != b) peak(a, b) = std::max(peak(a, b), std::abs(samples[i](r, c)));
      }
  }
  BlockGraph out{DynamicalGraph(grid, partition, labels), {}, {}, peak.maxCoeff(), 0};
  const double floor = std::isinf(lambda) ? 0.0 : out.coupling_max / lambda;
  Eigen::MatrixXi keep = Eigen::MatrixXi::Ones(nb, nb);
  for (int a = 0; a < nb; ++a)
    for (int b = a + 1; b < nb; ++b) {
      const double I_ab = std::max(peak(a, b), peak(b, a));
      if (I_ab == 0.0) {
        keep(a, b) = keep(b, a) = 0;
        continue;
      }
      if (I_ab < floor) {
        keep(a, b) = keep(b, a) = 0;
        out.dropped.emplace_back(a, b);
      } else {
        out.edges.emplace_back(a, b);
      }
    }
  std::vector<int> slot(N);
  for (int b = 0; b < nb; ++b)
    for (std::size_t k = 0; k < partition[b].size(); ++k) slot[partition[b][k]] = static_cast<int>(k);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      if (!keep(a, b)) continue;
      const int da = static_cast<int>(partition[a].size()), db = static_cast<int>(partition[b].size());
      TwoTimeFunction w(grid, db, da, TwoTimeFunction::Profile::row);
      bool nonzero = false;
      for (int i = 0; i < grid.n_points; ++i) {
        cplx* blk = w.block(i, 0);
        for (int r = 0; r < db; ++r)
          for (int c = 0; c < da; ++c) {
            blk[r * da + c] = cplx(0.0, -1.0) * samples[i](partition[b][r], partition[a][c]);
            nonzero = nonzero || blk[r * da + c] != 0.0;
          }
      }
      if (nonzero) out.graph.set_edge(a, b, std::move(w));
    }
  // Connected components of the kept topology.
  std::vector<int> comp(nb, -1);
  for (int s = 0; s < nb; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = out.components;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < nb; ++u)
        if (u != v && keep(v, u) && peak(v, u) + peak(u, v) > 0.0 && comp[u] < 0) {
          comp[u] = out.components;
          stack.push_back(u);
        }
    }
    ++out.components;
  }
  return out;
}

namespace {

DiffusionResult diffuse(const BlockGraph& bg, int initial_site, const GreenOptions& gopt, const EvalOptions& eopt) {
  const DynamicalGraph& g = bg.graph;
  const int N = g.total_dim(), n = g.grid().n_points;
  if (initial_site < 0 || initial_site >= N) throw Error("initial site out of range");
  int source = -1, local = -1;
  for (int v = 0; v < g.size(); ++v)
    for (int k = 0; k < g.dim(v); ++k)
      if (g.indices(v)[k] == initial_site) source = v, local = k;

  DiffusionResult r{g.grid(), std::vector<std::vector<double>>(N, std::vector<double>(n, 0.0)),
                    std::vector<double>(n, 0.0)};
  PathSumBuilder builder(g, gopt);
  Evaluator ev(g, eopt);
  for (int b = 0; b < g.size(); ++b) {
    const PathSumExpression e = builder.green_function(source, b);
    if (e.root->kind == ExprNode::Kind::zero) continue;
    const std::vector<Mat> U = integrate_column(ev.evaluate_column(e.root, 0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < g.dim(b); ++k) {
        const double p = std::norm(U[i](k, local));
        r.probability[g.indices(b)[k]][i] = p;
        r.total[i] += p;
      }
  }
  return r;
}

}  // namespace

DiffusionResult spin_diffusion(const SectorHamiltonian& h, const std::vector<std::vector<int>>& partition,
                               double lambda, int initial_site, const TimeGrid& grid, const GreenOptions& gopt,
                               const EvalOptions& eopt) {
  return diffuse(block_graph(h, partition, lambda, grid), initial_site, gopt, eopt);
}

DiffusionResult spin_diffusion(const BlockGraph& bg, int initial_site, const GreenOptions& gopt,
                               const EvalOptions& eopt) {
  return diffuse(bg, initial_site, gopt, eopt);
}

DiffusionResult truncated_sigma_approximation(const SectorHamiltonian& h,
                                              const std::vector<std::vector<int>>& partition, double lambda,
                                              int initial_site, const TimeGrid& grid,
                                              const std::vector<std::string>& drop, std::vector<std::string> labels) {
  const BlockGraph bg = block_graph(h, partition, lambda, grid, std::move(labels));
  GreenOptions o;
  for (const auto& name : drop) o.truncated.push_back(bg.graph.vertex(name));
  return diffuse(bg, initial_site, o, {});
}

}  // namespace pathsum
