#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "pathsum/graph.hpp"

namespace pathsum {

// Proton μ0 γ² ħ / 4π in rad ms⁻¹ Å³ (times in ms, distances in Å).
inline constexpr double kProtonDipolarPrefactor = 754.74;

struct SpinGeometry {
  std::vector<Eigen::Vector3d> positions;
  std::vector<std::string> labels;
  double prefactor = kProtonDipolarPrefactor;

  int size() const { return static_cast<int>(positions.size()); }
  void validate() const;
  // One site per line: label x y z; '#' starts a comment.
  static SpinGeometry read(const std::string& path);
  static SpinGeometry parse(const std::string& text);
};

// Sites k·spacing along x, each displaced uniformly within ±jitter per axis.
SpinGeometry synthetic_chain(int n, double spacing, double jitter, unsigned seed);
// Two clusters of n_per sites (intra-cluster spacing) whose centres sit gap apart along x.
SpinGeometry synthetic_dumbbell(int n_per, double intra, double gap, double jitter, unsigned seed);

struct MasSchedule {
  double omega_r = 0.0;  // rotor angular velocity; 0 freezes t = 0
  bool is_static() const { return omega_r == 0.0; }
};

// ξ(t) = 2√2 sinψ cosψ sin(φ + ω_r t) + sin²ψ cos(2φ + 2ω_r t)
double mas_xi(double psi, double phi, double omega_r_t);

struct PairCoupling {
  int i = 0;
  int j = 0;
  double scale = 0.0;  // prefactor / r³
  double psi = 0.0;    // angle between r_ij and z
  double phi = 0.0;    // azimuth of r_ij
};

class CouplingSchedule {
 public:
  CouplingSchedule() = default;
  CouplingSchedule(int n, std::vector<PairCoupling> pairs, MasSchedule mas);
  int size() const { return n_; }
  const std::vector<PairCoupling>& pairs() const { return pairs_; }
  // ω_ij(t) = scale · ½ ξ_ij(t), symmetric N×N with zero diagonal.
  Eigen::MatrixXd at(double t) const;
  double omega(const PairCoupling& p, double t) const;

 private:
  int n_ = 0;
  std::vector<PairCoupling> pairs_;
  MasSchedule mas_;
};

CouplingSchedule coupling_schedule(const SpinGeometry& geom, const MasSchedule& mas);

// Single-excitation block of H^II + Σ offset_i I_z,i. Off-diagonal −ω_ij/4,
// diagonal offset_i − ½ Σ_{l≠i} ω_il; the common phase c(t) is dropped unless kept.
struct SectorHamiltonian {
  CouplingSchedule couplings;
  std::vector<double> offsets;
  bool keep_common_phase = false;

  int size() const { return couplings.size(); }
  Mat operator()(double t) const;
  double common_phase(double t) const;  // ¼ Σ_{k<l} ω_kl − ½ Σ offsets
};

SectorHamiltonian sector_hamiltonian(const SpinGeometry& geom, const MasSchedule& mas,
                                     std::vector<double> offsets = {});

struct BlockGraph {
  DynamicalGraph graph;
  std::vector<std::pair<int, int>> edges;  // undirected inter-block edges kept, a < b
  std::vector<std::pair<int, int>> dropped;
  double coupling_max = 0.0;               // largest inter-block peak coupling
  int components = 0;
};

inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

// Drops inter-block couplings whose peak max-abs entry over the grid is below max/Λ.
BlockGraph block_graph(const SectorHamiltonian& h, const std::vector<std::vector<int>>& partition, double lambda,
                       const TimeGrid& grid, std::vector<std::string> labels = {});

struct DiffusionResult {
  TimeGrid grid;
  std::vector<std::vector<double>> probability;  // [site][time]
  std::vector<double> total;                     // Σ_i probability
};

DiffusionResult spin_diffusion(const SectorHamiltonian& h, const std::vector<std::vector<int>>& partition,
                               double lambda, int initial_site, const TimeGrid& grid,
                               const GreenOptions& gopt = {}, const EvalOptions& eopt = {});
DiffusionResult spin_diffusion(const BlockGraph& bg, int initial_site, const GreenOptions& gopt = {},
                               const EvalOptions& eopt = {});
// Same, with the nested sub-resolvents of the named blocks replaced by isolated-block resolvents.
DiffusionResult truncated_sigma_approximation(const SectorHamiltonian& h,
                                              const std::vector<std::vector<int>>& partition, double lambda,
                                              int initial_site, const TimeGrid& grid,
                                              const std::vector<std::string>& drop, std::vector<std::string> labels = {});

}  // namespace pathsum
