// Exact discrete optimal transport by successive shortest augmenting paths
// on the bipartite atom graph, with Johnson potentials so Dijkstra only sees
// nonnegative reduced costs.

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mflk/measures.hpp"

namespace mflk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Residual supply/demand below this is treated as exhausted.
constexpr double kMassEps = 1e-15;

class FlowSolver {
 public:
  FlowSolver(Eigen::MatrixXd cost, Eigen::VectorXd supply, Eigen::VectorXd demand)
      : cost_(std::move(cost)),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        n_(static_cast<int>(cost_.rows())),
        m_(static_cast<int>(cost_.cols())),
        flow_(Eigen::MatrixXd::Zero(n_, m_)) {}

  Eigen::MatrixXd solve() {
    // Node layout: 0 = S, 1..n sources, n+1..n+m sinks, n+m+1 = T.
    const int nodes = n_ + m_ + 2;
    pot_.assign(static_cast<std::size_t>(nodes), 0.0);
    for (int j = 0; j < m_; ++j) pot_[sink(j)] = cost_.col(j).minCoeff();
    pot_[terminal()] = cost_.colwise().minCoeff().minCoeff();

    while (has_active(supply_) && has_active(demand_)) {
      if (!dijkstra()) throw std::runtime_error("wasserstein1: augmenting path search failed");
      augment();
    }
    return flow_;
  }

 private:
  int source(int i) const { return 1 + i; }
  int sink(int j) const { return 1 + n_ + j; }
  int terminal() const { return 1 + n_ + m_; }

  static bool has_active(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v[i] > kMassEps) return true;
    return false;
  }

  void relax(int from, int to, double raw_cost) {
    const double reduced = std::max(0.0, raw_cost + pot_[from] - pot_[to]);
    const double cand = dist_[from] + reduced;
    if (cand < dist_[to]) {
      dist_[to] = cand;
      prev_[to] = from;
    }
  }

  bool dijkstra() {
    const int nodes = n_ + m_ + 2;
    dist_.assign(static_cast<std::size_t>(nodes), kInf);
    prev_.assign(static_cast<std::size_t>(nodes), -1);
    std::vector<char> done(static_cast<std::size_t>(nodes), 0);
    dist_[0] = 0.0;
    for (int step = 0; step < nodes; ++step) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < nodes; ++v) {
        if (!done[v] && dist_[v] < best) {
          best = dist_[v];
          u = v;
        }
      }
      if (u < 0) break;
      done[u] = 1;
      if (u == terminal()) break;
      if (u == 0) {
        for (int i = 0; i < n_; ++i)
          if (supply_[i] > kMassEps) relax(0, source(i), 0.0);
      } else if (u <= n_) {
        const int i = u - 1;
        for (int j = 0; j < m_; ++j) relax(u, sink(j), cost_(i, j));
      } else {
        const int j = u - 1 - n_;
        for (int i = 0; i < n_; ++i)
          if (flow_(i, j) > 0.0) relax(u, source(i), -cost_(i, j));
        if (demand_[j] > kMassEps) relax(u, terminal(), 0.0);
      }
    }
    const double dt = dist_[terminal()];
    if (!(dt < kInf)) return false;
    for (int v = 0; v < nodes; ++v) pot_[v] += std::min(dist_[v], dt);
    return true;
  }

  void augment() {
    // Bottleneck over the S -> ... -> T path.
    double push = kInf;
    int v = terminal();
    while (v != 0) {
      const int u = prev_[v];
      if (u == 0) {
        push = std::min(push, supply_[v - 1]);
      } else if (v == terminal()) {
        push = std::min(push, demand_[u - 1 - n_]);
      } else if (u > n_) {  // reverse arc sink -> source
        push = std::min(push, flow_(v - 1, u - 1 - n_));
      }
      v = u;
    }
    v = terminal();
    while (v != 0) {
      const int u = prev_[v];
      if (u == 0) {
        supply_[v - 1] -= push;
        if (supply_[v - 1] <= kMassEps) supply_[v - 1] = 0.0;
      } else if (v == terminal()) {
        demand_[u - 1 - n_] -= push;
        if (demand_[u - 1 - n_] <= kMassEps) demand_[u - 1 - n_] = 0.0;
      } else if (u <= n_) {
        flow_(u - 1, v - 1 - n_) += push;
      } else {
        double& f = flow_(v - 1, u - 1 - n_);
        f -= push;
        if (f <= kMassEps) f = 0.0;
      }
      v = u;
    }
  }

  Eigen::MatrixXd cost_;
  Eigen::VectorXd supply_;
  Eigen::VectorXd demand_;
  int n_;
  int m_;
  Eigen::MatrixXd flow_;
  std::vector<double> pot_;
  std::vector<double> dist_;
  std::vector<int> prev_;
};

}  // namespace

TransportResult wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("wasserstein1: dimension mismatch");
  const auto oa = canonical_order(mu.atoms(), mu.weights());
  const auto ob = canonical_order(nu.atoms(), nu.weights());
  const int n = mu.size();
  const int m = nu.size();

  Eigen::MatrixXd cost(n, m);
  Eigen::VectorXd supply(n), demand(m);
  for (int i = 0; i < n; ++i) {
    supply[i] = mu.weights()[oa[i]];
    for (int j = 0; j < m; ++j) cost(i, j) = (mu.atom(oa[i]) - nu.atom(ob[j])).norm();
  }
  for (int j = 0; j < m; ++j) demand[j] = nu.weights()[ob[j]];

  const Eigen::MatrixXd flow = FlowSolver(cost, supply, demand).solve();

  TransportResult result;
  result.plan.mass = Eigen::MatrixXd::Zero(n, m);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (flow(i, j) == 0.0) continue;
      total += flow(i, j) * cost(i, j);
      result.plan.mass(oa[i], ob[j]) = flow(i, j);
    }
  }
  result.distance = total;
  return result;
}

}  // namespace mflk
