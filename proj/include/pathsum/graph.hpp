#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathsum/star.hpp"

namespace pathsum {

// Vertices are blocks of a partition of the state indices; the edge a -> b
// carries −i P_b H(t') P_a as a one-time function of shape d_b × d_a.
class DynamicalGraph {
 public:
  DynamicalGraph(const TimeGrid& grid, std::vector<std::vector<int>> partition,
                 std::vector<std::string> labels = {});

  static DynamicalGraph from_hamiltonian(const std::function<Mat(double)>& H,
                                         const std::vector<std::vector<int>>& partition,
                                         const TimeGrid& grid, std::vector<std::string> labels = {});

  const TimeGrid& grid() const { return grid_; }
  int size() const { return static_cast<int>(blocks_.size()); }
  int dim(int v) const { return static_cast<int>(blocks_[v].size()); }
  int total_dim() const;
  const std::vector<int>& indices(int v) const { return blocks_[v]; }
  const std::string& label(int v) const { return labels_[v]; }
  int vertex(const std::string& label) const;

  // Adds or replaces the weight of a -> b (shape d_b × d_a).
  void set_edge(int from, int to, TwoTimeFunction w);
  bool has_edge(int from, int to) const { return edges_.count({from, to}) != 0; }
  const TwoTimeFunction& edge(int from, int to) const;
  const std::vector<int>& successors(int v) const { return out_[v]; }
  std::size_t edge_count() const { return edges_.size(); }

 private:
  TimeGrid grid_;
  std::vector<std::vector<int>> blocks_;
  std::vector<std::string> labels_;
  std::map<std::pair<int, int>, TwoTimeFunction> edges_;
  std::vector<std::vector<int>> out_;
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { identity, zero, edge, product, sum, resolvent };
  Kind kind;
  int rows = 0;
  int cols = 0;
  int from = -1;  // edge only
  int to = -1;
  std::vector<Expr> children;  // product: left to right
};

enum class Construction { simple_cycles, vertex_elimination };

struct GreenOptions {
  Construction construction = Construction::simple_cycles;
  std::vector<int> elimination_order;  // vertex_elimination only; default ascending
  int max_cycle_length = 0;            // 0: unlimited (simple_cycles only)
  // Vertices whose nested sub-resolvents are replaced by (1_* − W_vv)^{∗−1}.
  std::vector<int> truncated;
};

struct PathSumExpression {
  Expr root;
  int source = 0;
  int target = 0;
  std::vector<int> elimination_order;
  bool complete = true;  // false when max_cycle_length cut some cycles or paths

  int depth() const;                                        // resolvent nesting depth
  std::size_t node_count() const;                           // distinct nodes
  std::string dump(const DynamicalGraph& g) const;          // S-expression
};

// Builds G_{target,source}; caches sub-resolvents across calls.
class PathSumBuilder {
 public:
  explicit PathSumBuilder(const DynamicalGraph& g, GreenOptions opt = {});
  PathSumExpression green_function(int source, int target);

 private:
  struct MaskHash {
    std::size_t operator()(const std::pair<int, std::vector<std::uint64_t>>& k) const;
  };
  using Mask = std::vector<std::uint64_t>;

  Expr resolvent_at(int v, const Mask& S, bool nested);
  Expr path_sum(int source, int target, const Mask& S);
  Expr eliminate(int source, int target);
  Expr edge(int from, int to) const;

  const DynamicalGraph& g_;
  GreenOptions opt_;
  bool complete_ = true;
  std::unordered_map<std::pair<int, Mask>, Expr, MaskHash> memo_;
  std::map<std::vector<int>, Expr> prefix_memo_;
  std::vector<bool> truncated_;
};

PathSumExpression green_function(const DynamicalGraph& g, int source, int target, const GreenOptions& opt = {});

enum class ResolventMethod { direct, neumann };

struct EvalOptions {
  ResolventMethod method = ResolventMethod::direct;
  int neumann_order = 13;
};

// Evaluates expressions bottom-up; sub-results are memoized per node and
// shared between all expressions evaluated by the same instance.
class Evaluator {
 public:
  explicit Evaluator(const DynamicalGraph& g, EvalOptions opt = {}) : g_(g), opt_(opt) {}
  TwoTimeFunction evaluate(const Expr& e);
  Column evaluate_column(const Expr& e, int j);
  std::size_t cache_size() const { return cache_.size(); }
  void clear() {
    cache_.clear();
    column_cache_.clear();
  }

 private:
  TwoTimeFunction resolve(const TwoTimeFunction& K) const;
  Column compute_column(const Expr& e, int j);
  const DynamicalGraph& g_;
  EvalOptions opt_;
  // Holds the node alive so its address cannot be reused while cached.
  std::unordered_map<const ExprNode*, std::pair<Expr, TwoTimeFunction>> cache_;
  std::map<std::pair<const ExprNode*, int>, std::pair<Expr, Column>> column_cache_;
};

TwoTimeFunction evaluate(const PathSumExpression& expr, const DynamicalGraph& g, const EvalOptions& opt = {});

// U_{target,source}(t_i, t_j) for i >= j: integral of the evaluated Green function column.
std::vector<Mat> propagator_block(const DynamicalGraph& g, int source, int target, int j = 0,
                                  const GreenOptions& gopt = {}, const EvalOptions& eopt = {});

// Full propagator U(t_i, t_j) assembled from all blocks (dimension total_dim).
std::vector<Mat> full_propagator(const DynamicalGraph& g, int j = 0, const GreenOptions& gopt = {},
                                 const EvalOptions& eopt = {});

}  // namespace pathsum
