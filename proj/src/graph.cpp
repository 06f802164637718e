#include "pathsum/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "pathsum/error.hpp"
#include "pathsum/volterra.hpp"

namespace pathsum {

namespace {

constexpr double kZeroBlockThreshold = 1e-14;

Expr make_node(ExprNode::Kind kind, int rows, int cols, std::vector<Expr> children = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->rows = rows;
  n->cols = cols;
  n->children = std::move(children);
  return n;
}

Expr make_identity(int d) { return make_node(ExprNode::Kind::identity, d, d); }
Expr make_zero(int r, int c) { return make_node(ExprNode::Kind::zero, r, c); }

Expr make_product(const std::vector<Expr>& factors) {
  std::vector<Expr> kept;
  for (const Expr& f : factors) {
    if (f->kind == ExprNode::Kind::zero) return make_zero(factors.front()->rows, factors.back()->cols);
    if (f->kind == ExprNode::Kind::identity) continue;
    kept.push_back(f);
  }
  if (kept.empty()) return make_identity(factors.front()->rows);
  if (kept.size() == 1) return kept.front();
  return make_node(ExprNode::Kind::product, kept.front()->rows, kept.back()->cols, kept);
}

Expr make_sum(const std::vector<Expr>& terms, int rows, int cols) {
  std::vector<Expr> kept;
  for (const Expr& t : terms)
    if (t && t->kind != ExprNode::Kind::zero) kept.push_back(t);
  if (kept.empty()) return make_zero(rows, cols);
  if (kept.size() == 1) return kept.front();
  return make_node(ExprNode::Kind::sum, rows, cols, kept);
}

Expr make_resolvent(const Expr& K) {
  if (K->kind == ExprNode::Kind::zero) return make_identity(K->rows);
  return make_node(ExprNode::Kind::resolvent, K->rows, K->cols, {K});
}

}  // namespace

DynamicalGraph::DynamicalGraph(const TimeGrid& grid, std::vector<std::vector<int>> partition,
                               std::vector<std::string> labels)
    : grid_(grid), blocks_(std::move(partition)), labels_(std::move(labels)) {
  if (blocks_.empty()) throw Error("partition has no blocks");
  int total = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw Error("partition block is empty");
    total += static_cast<int>(b.size());
  }
  std::vector<int> seen(total, 0);
  for (const auto& b : blocks_)
    for (int k : b) {
      if (k < 0 || k >= total) throw Error("partition index " + std::to_string(k) + " out of range");
      if (seen[k]++) throw Error("partition blocks overlap at index " + std::to_string(k));
    }
  if (labels_.empty())
    for (std::size_t v = 0; v < blocks_.size(); ++v) labels_.push_back(std::to_string(v));
  if (labels_.size() != blocks_.size()) throw Error("one label per partition block expected");
  out_.assign(blocks_.size(), {});
}

int DynamicalGraph::total_dim() const {
  int s = 0;
  for (const auto& b : blocks_) s += static_cast<int>(b.size());
  return s;
}

int DynamicalGraph::vertex(const std::string& label) const {
  for (int v = 0; v < size(); ++v)
    if (labels_[v] == label) return v;
  throw Error("unknown vertex label '" + label + "'");
}

void DynamicalGraph::set_edge(int from, int to, TwoTimeFunction w) {
  if (from < 0 || to < 0 || from >= size() || to >= size()) throw Error("edge endpoint out of range");
  check_same_grid(grid_, w.grid());
  if (w.rows() != dim(to) || w.cols() != dim(from)) throw DimensionMismatch("edge weight shape");
  if (!has_edge(from, to)) {
    out_[from].push_back(to);
    std::sort(out_[from].begin(), out_[from].end());
  }
  edges_[{from, to}] = std::move(w);
}

const TwoTimeFunction& DynamicalGraph::edge(int from, int to) const {
  auto it = edges_.find({from, to});
  if (it == edges_.end()) throw Error("no edge " + labels_[from] + " -> " + labels_[to]);
  return it->second;
}

DynamicalGraph DynamicalGraph::from_hamiltonian(const std::function<Mat(double)>& H,
                                                const std::vector<std::vector<int>>& partition,
                                                const TimeGrid& grid, std::vector<std::string> labels) {
  DynamicalGraph g(grid, partition, std::move(labels));
  const int nv = g.size(), N = g.total_dim(), n = grid.n_points;
  // First pass: peak norm of every block, so zero blocks are never stored.
  std::vector<double> peak(static_cast<std::size_t>(nv) * nv, 0.0);
  std::vector<Mat> samples(n);
  for (int i = 0; i < n; ++i) {
    samples[i] = H(grid.t(i));
    if (samples[i].rows() != N || samples[i].cols() != N)
      throw DimensionMismatch("Hamiltonian dimension does not match the partition");
    if (!samples[i].allFinite()) throw Error("non-finite Hamiltonian sample");
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        double m = 0.0;
        for (int r : g.blocks_[b])
          for (int c : g.blocks_[a]) m = std::max(m, std::abs(samples[i](r, c)));
        peak[a * nv + b] = std::max(peak[a * nv + b], m);
      }
  }
  const double global = *std::max_element(peak.begin(), peak.end());
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      if (!(peak[a * nv + b] > kZeroBlockThreshold * global)) continue;
      TwoTimeFunction w(grid, g.dim(b), g.dim(a), TwoTimeFunction::Profile::row);
      for (int i = 0; i < n; ++i) {
        cplx* blk = w.block(i, 0);
        for (int r = 0; r < g.dim(b); ++r)
          for (int c = 0; c < g.dim(a); ++c)
            blk[r * g.dim(a) + c] = cplx(0.0, -1.0) * samples[i](g.blocks_[b][r], g.blocks_[a][c]);
      }
      g.set_edge(a, b, std::move(w));
    }
  return g;
}

// ---- expressions ----

int PathSumExpression::depth() const {
  std::unordered_map<const ExprNode*, int> memo;
  std::function<int(const Expr&)> rec = [&](const Expr& e) -> int {
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    int d = 0;
    for (const Expr& c : e->children) d = std::max(d, rec(c));
    if (e->kind == ExprNode::Kind::resolvent) ++d;
    memo[e.get()] = d;
    return d;
  };
  return rec(root);
}

std::size_t PathSumExpression::node_count() const {
  std::unordered_set<const ExprNode*> seen;
  std::function<void(const Expr&)> rec = [&](const Expr& e) {
    if (!seen.insert(e.get()).second) return;
    for (const Expr& c : e->children) rec(c);
  };
  rec(root);
  return seen.size();
}

std::string PathSumExpression::dump(const DynamicalGraph& g) const {
  std::ostringstream os;
  std::function<void(const Expr&)> rec = [&](const Expr& e) {
    switch (e->kind) {
      case ExprNode::Kind::identity: os << "(id " << e->rows << ")"; return;
      case ExprNode::Kind::zero: os << "(zero " << e->rows << " " << e->cols << ")"; return;
      case ExprNode::Kind::edge: os << "(w " << g.label(e->from) << " " << g.label(e->to) << ")"; return;
      case ExprNode::Kind::product: os << "(* "; break;
      case ExprNode::Kind::sum: os << "(+ "; break;
      case ExprNode::Kind::resolvent: os << "(res "; break;
    }
    for (std::size_t k = 0; k < e->children.size(); ++k) {
      if (k) os << " ";
      rec(e->children[k]);
    }
    os << ")";
  };
  rec(root);
  return os.str();
}

std::size_t PathSumBuilder::MaskHash::operator()(const std::pair<int, std::vector<std::uint64_t>>& k) const {
  std::size_t h = std::hash<int>()(k.first);
  for (std::uint64_t w : k.second) h ^= std::hash<std::uint64_t>()(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

PathSumBuilder::PathSumBuilder(const DynamicalGraph& g, GreenOptions opt) : g_(g), opt_(std::move(opt)) {
  truncated_.assign(g.size(), false);
  for (int v : opt_.truncated) {
    if (v < 0 || v >= g.size()) throw Error("truncated vertex out of range");
    truncated_[v] = true;
  }
  if (!opt_.elimination_order.empty()) {
    std::vector<int> sorted = opt_.elimination_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> all(g.size());
    std::iota(all.begin(), all.end(), 0);
    if (sorted != all) throw Error("elimination order must be a permutation of the vertices");
  }
}

Expr PathSumBuilder::edge(int from, int to) const {
  if (!g_.has_edge(from, to)) return nullptr;
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::edge;
  n->rows = g_.dim(to);
  n->cols = g_.dim(from);
  n->from = from;
  n->to = to;
  return n;
}

namespace {
bool in_mask(const std::vector<std::uint64_t>& S, int v) { return (S[v >> 6] >> (v & 63)) & 1U; }
void clear_bit(std::vector<std::uint64_t>& S, int v) { S[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }
}  // namespace

// G_v[S] = (1_* − Σ_{simple cycles v→ν1→…→νk→v in S} W_{νk→v} ∗ G_{νk}[…] ∗ … ∗ G_{ν1}[S∖{v}] ∗ W_{v→ν1})^{∗−1}
Expr PathSumBuilder::resolvent_at(int v, const Mask& S, bool nested) {
  if (nested && truncated_[v]) {
    Mask only(S.size(), 0);
    only[v >> 6] |= std::uint64_t{1} << (v & 63);
    return resolvent_at(v, only, false);
  }
  auto key = std::make_pair(v, S);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  std::vector<Expr> cycles;  // the self-loop closes with an empty path below

  Mask rest = S;
  clear_bit(rest, v);
  std::vector<int> path;  // ν1, ν2, ...
  Mask avail = rest;
  std::function<void(int)> dfs = [&](int u) {
    for (int w : g_.successors(u)) {
      if (w == v) {
        // Close the cycle; sub-resolvents see the graph minus v and the vertices before them.
        std::vector<Expr> factors;
        factors.push_back(edge(u, v));
        Mask sub = rest;
        std::vector<Mask> subs;
        for (int x : path) {
          subs.push_back(sub);
          clear_bit(sub, x);
        }
        for (int k = static_cast<int>(path.size()) - 1; k >= 0; --k) {
          factors.push_back(resolvent_at(path[k], subs[k], true));
          factors.push_back(edge(k == 0 ? v : path[k - 1], path[k]));
        }
        cycles.push_back(make_product(factors));
        continue;
      }
      if (!in_mask(avail, w)) continue;
      if (opt_.max_cycle_length > 0 && static_cast<int>(path.size()) + 1 >= opt_.max_cycle_length) {
        complete_ = false;
        continue;
      }
      clear_bit(avail, w);
      path.push_back(w);
      dfs(w);
      path.pop_back();
      avail[w >> 6] |= std::uint64_t{1} << (w & 63);
    }
  };
  dfs(v);

  Expr r = cycles.empty() ? make_identity(g_.dim(v))
                          : make_resolvent(make_sum(cycles, g_.dim(v), g_.dim(v)));
  memo_.emplace(std::move(key), r);
  return r;
}

// Σ over simple paths α→ν1→…→ω of G_ω[S∖{α,…}] ∗ W ∗ … ∗ G_{ν1}[S∖{α}] ∗ W_{α→ν1} ∗ G_α[S].
// Path prefixes are shared nodes, so on chains every target reuses the previous one.
Expr PathSumBuilder::path_sum(int source, int target, const Mask& S) {
  std::vector<Expr> terms;
  Mask avail = S;
  clear_bit(avail, source);
  std::vector<int> path{source};
  std::vector<Expr> prefix{resolvent_at(source, S, false)};
  std::function<void(int)> dfs = [&](int u) {
    for (int w : g_.successors(u)) {
      if (!in_mask(avail, w)) continue;
      if (opt_.max_cycle_length > 0 && static_cast<int>(path.size()) > opt_.max_cycle_length) {
        complete_ = false;
        continue;
      }
      path.push_back(w);
      const Expr inner = resolvent_at(w, avail, true);
      Expr& through = prefix_memo_[path];
      if (!through) through = make_product({inner, edge(u, w), prefix.back()});
      if (w == target) {
        const Expr outer = resolvent_at(w, avail, false);
        terms.push_back(outer == inner ? through : make_product({outer, edge(u, w), prefix.back()}));
      } else {
        clear_bit(avail, w);
        prefix.push_back(through);
        dfs(w);
        prefix.pop_back();
        avail[w >> 6] |= std::uint64_t{1} << (w & 63);
      }
      path.pop_back();
    }
  };
  dfs(source);
  return make_sum(terms, g_.dim(target), g_.dim(source));
}

Expr PathSumBuilder::eliminate(int source, int target) {
  const int nv = g_.size();
  // E[to][from]: effective weight from -> to on the remaining vertices.
  std::vector<std::vector<Expr>> E(nv, std::vector<Expr>(nv));
  for (int a = 0; a < nv; ++a)
    for (int b : g_.successors(a)) E[b][a] = edge(a, b);
  std::vector<int> order = opt_.elimination_order;
  if (order.empty()) {
    order.resize(nv);
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<bool> alive(nv, true);
  for (int v : order) {
    if (v == source || v == target) continue;
    alive[v] = false;
    const Expr gamma = E[v][v] ? make_resolvent(E[v][v]) : make_identity(g_.dim(v));
    for (int t = 0; t < nv; ++t) {
      if (!alive[t] || !E[t][v]) continue;
      for (int f = 0; f < nv; ++f) {
        if (!alive[f] || !E[v][f]) continue;
        const Expr through = make_product({E[t][v], gamma, E[v][f]});
        E[t][f] = E[t][f] ? make_sum({E[t][f], through}, g_.dim(t), g_.dim(f)) : through;
      }
    }
  }
  auto loop = [&](int v) { return E[v][v] ? E[v][v] : make_zero(g_.dim(v), g_.dim(v)); };
  if (source == target) return make_resolvent(loop(source));
  const Expr gamma_t = make_resolvent(loop(target));
  Expr K = loop(source);
  if (E[source][target] && E[target][source])
    K = make_sum({K, make_product({E[source][target], gamma_t, E[target][source]})}, g_.dim(source),
                 g_.dim(source));
  const Expr g_source = make_resolvent(K);
  if (!E[target][source]) return make_zero(g_.dim(target), g_.dim(source));
  return make_product({gamma_t, E[target][source], g_source});
}

PathSumExpression PathSumBuilder::green_function(int source, int target) {
  if (source < 0 || target < 0 || source >= g_.size() || target >= g_.size())
    throw Error("green_function: vertex out of range");
  PathSumExpression out;
  out.source = source;
  out.target = target;
  complete_ = true;
  if (opt_.construction == Construction::vertex_elimination) {
    out.elimination_order = opt_.elimination_order;
    if (out.elimination_order.empty()) {
      out.elimination_order.resize(g_.size());
      std::iota(out.elimination_order.begin(), out.elimination_order.end(), 0);
    }
    out.root = eliminate(source, target);
  } else {
    Mask S((g_.size() + 63) / 64, 0);
    for (int v = 0; v < g_.size(); ++v) S[v >> 6] |= std::uint64_t{1} << (v & 63);
    out.root = source == target ? resolvent_at(source, S, false) : path_sum(source, target, S);
  }
  out.complete = complete_;
  return out;
}

PathSumExpression green_function(const DynamicalGraph& g, int source, int target, const GreenOptions& opt) {
  PathSumBuilder b(g, opt);
  return b.green_function(source, target);
}

// ---- evaluation ----

TwoTimeFunction Evaluator::resolve(const TwoTimeFunction& K) const {
  if (opt_.method == ResolventMethod::neumann) return neumann(K, opt_.neumann_order, false).result();
  return solve_direct(K);
}

TwoTimeFunction Evaluator::evaluate(const Expr& e) {
  if (auto it = cache_.find(e.get()); it != cache_.end()) return it->second.second;
  TwoTimeFunction out;
  switch (e->kind) {
    case ExprNode::Kind::identity: out = TwoTimeFunction::identity(g_.grid(), e->rows); break;
    case ExprNode::Kind::zero: out = TwoTimeFunction::zero(g_.grid(), e->rows, e->cols); break;
    case ExprNode::Kind::edge: return g_.edge(e->from, e->to);
    case ExprNode::Kind::product: {
      // Right to left keeps one-time edge factors next to each other as long as possible.
      out = evaluate(e->children.back());
      for (int k = static_cast<int>(e->children.size()) - 2; k >= 0; --k)
        out = star_product(evaluate(e->children[k]), out);
      break;
    }
    case ExprNode::Kind::sum: {
      out = evaluate(e->children.front());
      for (std::size_t k = 1; k < e->children.size(); ++k) out = out + evaluate(e->children[k]);
      break;
    }
    case ExprNode::Kind::resolvent: out = resolve(evaluate(e->children.front())); break;
  }
  // Only resolvents are shared between expressions; caching anything else just costs memory.
  if (e->kind == ExprNode::Kind::resolvent) cache_.emplace(e.get(), std::make_pair(e, out));
  return out;
}

Column Evaluator::evaluate_column(const Expr& e, int j) {
  if (auto it = column_cache_.find({e.get(), j}); it != column_cache_.end()) return it->second.second;
  Column c = compute_column(e, j);
  if (e->kind == ExprNode::Kind::product || e->kind == ExprNode::Kind::resolvent)
    column_cache_.emplace(std::make_pair(e.get(), j), std::make_pair(e, c));
  return c;
}

Column Evaluator::compute_column(const Expr& e, int j) {
  switch (e->kind) {
    case ExprNode::Kind::identity: {
      Column c(g_.grid(), e->rows, e->cols, j);
      c.delta = Mat::Identity(e->rows, e->cols);
      c.has_delta = true;
      return c;
    }
    case ExprNode::Kind::zero: return Column(g_.grid(), e->rows, e->cols, j);
    case ExprNode::Kind::edge: return column(g_.edge(e->from, e->to), j);
    case ExprNode::Kind::product: {
      Column c = evaluate_column(e->children.back(), j);
      for (int k = static_cast<int>(e->children.size()) - 2; k >= 0; --k)
        c = star_apply(evaluate(e->children[k]), c);
      return c;
    }
    case ExprNode::Kind::sum: {
      Column c = evaluate_column(e->children.front(), j);
      for (std::size_t k = 1; k < e->children.size(); ++k) c = c + evaluate_column(e->children[k], j);
      return c;
    }
    case ExprNode::Kind::resolvent: {
      if (auto it = cache_.find(e.get()); it != cache_.end()) return column(it->second.second, j);
      const TwoTimeFunction K = evaluate(e->children.front());
      if (opt_.method == ResolventMethod::neumann) return neumann_column(K, opt_.neumann_order, j).result();
      return solve_column(K, j);
    }
  }
  throw Error("unreachable expression kind");
}

TwoTimeFunction evaluate(const PathSumExpression& expr, const DynamicalGraph& g, const EvalOptions& opt) {
  Evaluator ev(g, opt);
  return ev.evaluate(expr.root);
}

std::vector<Mat> propagator_block(const DynamicalGraph& g, int source, int target, int j,
                                  const GreenOptions& gopt, const EvalOptions& eopt) {
  const PathSumExpression e = green_function(g, source, target, gopt);
  Evaluator ev(g, eopt);
  return integrate_column(ev.evaluate_column(e.root, j));
}

std::vector<Mat> full_propagator(const DynamicalGraph& g, int j, const GreenOptions& gopt, const EvalOptions& eopt) {
  const int N = g.total_dim(), n = g.grid().n_points;
  std::vector<Mat> U(n - j, Mat::Zero(N, N));
  PathSumBuilder builder(g, gopt);
  Evaluator ev(g, eopt);
  for (int a = 0; a < g.size(); ++a)
    for (int b = 0; b < g.size(); ++b) {
      const PathSumExpression e = builder.green_function(a, b);
      if (e.root->kind == ExprNode::Kind::zero) continue;
      const std::vector<Mat> blk = integrate_column(ev.evaluate_column(e.root, j));
      for (int i = 0; i < n - j; ++i)
        for (int r = 0; r < g.dim(b); ++r)
          for (int c = 0; c < g.dim(a); ++c) U[i](g.indices(b)[r], g.indices(a)[c]) = blk[i](r, c);
    }
  return U;
}

}  // namespace pathsum
