// Acceptance checks: one line per criterion, nonzero exit if any fails.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "pcp/cut_pursuit.hpp"
#include "pcp/generate.hpp"
#include "pcp/io.hpp"
#include "pcp/maxflow.hpp"
#include "pcp/primal_dual.hpp"

using namespace pcp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* status, const std::string& detail) {
  std::printf("criterion %2d: %-6s %s\n", id, status, detail.c_str());
  std::fflush(stdout);
}

void verdict(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  report(id, ok ? "PASS" : "FAIL", detail);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs a check and turns unexpected exceptions into a failure line.
void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("exception: ") + e.what());
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Collected for criterion 6.
struct TraceCheck {
  std::string name;
  const SolverTrace* trace;
  double slack;
  std::size_t num_vertices;
};

bool trace_ok(const SolverTrace& t, double slack, std::size_t nv, std::string& why) {
  if (t.rows.size() > nv) {
    why = "more outer iterations than vertices";
    return false;
  }
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const auto& a = t.rows[i - 1];
    const auto& b = t.rows[i];
    if (b.objective > a.objective + slack * std::abs(a.objective)) {
      why = fmt("objective rose at iter %zu (%.12g -> %.12g)", b.iter, a.objective, b.objective);
      return false;
    }
    if (b.components < a.components) {
      why = fmt("component count fell at iter %zu", b.iter);
      return false;
    }
  }
  return true;
}

FlowNetwork random_network(std::mt19937_64& rng, std::size_t n, std::vector<Edge>& edges) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  edges.clear();
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b)
      if (u(rng) < 0.35) edges.push_back({a, b});
  FlowNetwork net(n, edges);
  for (VertexId v = 0; v < n; ++v) net.set_terminal_caps(v, double(rng() % 16), double(rng() % 16));
  for (EdgeId e = 0; e < edges.size(); ++e) net.set_edge_caps(e, double(rng() % 10), double(rng() % 10));
  return net;
}

Instance grid_instance(std::size_t side, std::uint64_t seed) {
  GenOptions o;
  o.graph = GraphKind::grid;
  o.size = side;
  o.blocks = 4;
  o.noise = 0.3;
  o.weight = 0.5;
  o.seed = seed;
  return generate_instance(o);
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "pcp_acceptance";
  fs::create_directories(dir);
  std::vector<TraceCheck> traces;
  std::vector<PcpResult> keep;  // owns traces referenced above
  keep.reserve(16);

  guarded(1, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::vector<Edge> edges;
    std::size_t bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      FlowNetwork net = random_network(rng, 1 + rng() % 12, edges);
      const auto bf = brute_force_mincut(net);
      const CutResult c = solve_mincut(net);
      if (c.cut_value != bf.value || c.flow_value != bf.value || net.evaluate_cut(c.labeling) != bf.value) ++bad;
    }
    const double t = seconds_since(t0);
    verdict(1, bad == 0 && t < 10.0, fmt("1000 networks, %zu mismatches, %.2f s", bad, t));
  });

  guarded(2, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1002);
    std::vector<Edge> edges;
    std::size_t bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 12;
      FlowNetwork net = random_network(rng, n, edges);
      const std::size_t k = 1 + rng() % n;
      std::vector<std::vector<VertexId>> parts(k);
      for (VertexId v = 0; v < n; ++v) parts[v < k ? v : rng() % k].push_back(v);
      std::vector<CutLabel> expected(n);
      double value = 0.0;
      for (const auto& p : parts) {
        std::vector<int> local(n, -1);
        for (std::size_t i = 0; i < p.size(); ++i) local[p[i]] = int(i);
        std::vector<Edge> sub;
        std::vector<std::pair<double, double>> caps;
        for (EdgeId e = 0; e < edges.size(); ++e) {
          if (local[edges[e].u] < 0 || local[edges[e].v] < 0) continue;
          sub.push_back({VertexId(local[edges[e].u]), VertexId(local[edges[e].v])});
          caps.push_back({net.arc_cap(e, true), net.arc_cap(e, false)});
        }
        FlowNetwork s(p.size(), sub);
        for (std::size_t i = 0; i < p.size(); ++i) s.set_terminal_caps(VertexId(i), net.source_cap(p[i]), net.sink_cap(p[i]));
        for (EdgeId e = 0; e < sub.size(); ++e) s.set_edge_caps(e, caps[e].first, caps[e].second);
        const CutResult c = solve_mincut(s);
        value += c.cut_value;
        for (std::size_t i = 0; i < p.size(); ++i) expected[p[i]] = c.labeling[i];
      }
      const CutResult r = solve_mincut_restricted(net, parts, 4);
      if (r.labeling != expected || r.cut_value != value) ++bad;
    }
    const double t = seconds_since(t0);
    verdict(2, bad == 0 && t < 5.0, fmt("200 instances, %zu mismatches, %.2f s", bad, t));
  });

  // criteria 3-6 share the 64x64 grid
  const Instance grid = grid_instance(64, 2024);
  const QuadraticFidelity grid_f(grid.observations);
  double f3 = std::nan("");
  PcpConfig cfg3;
  cfg3.reduced_tol = 1e-8;

  guarded(3, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    keep.push_back(run_cut_pursuit(grid.graph, grid_f, cfg3));
    const PcpResult& r = keep.back();
    traces.push_back({"64x64 pcp", &r.trace, cfg3.reduced_tol, grid.graph.num_vertices()});
    f3 = r.trace.rows.back().objective;
    const double tp = seconds_since(t0);
    PrimalDualOptions pd;
    pd.tol = 1e-9;
    pd.max_iter = 1000000;
    pd.num_threads = omp_get_max_threads();
    const auto b = solve_primal_dual(grid.graph.topology(), grid_f, NodeValues(grid.graph.num_vertices(), 1), pd);
    const double rel = std::abs(f3 - b.objective) / std::abs(b.objective);
    const double t = seconds_since(t0);
    verdict(3, rel <= 1e-5 && t < 60.0,
            fmt("F_pcp=%.10g F_baseline=%.10g rel=%.2e, %zu components, pcp %.2f s, total %.2f s", f3, b.objective,
                rel, r.partition.num_components(), tp, t));
  });

  guarded(4, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    PcpConfig c = cfg3;
    c.balance = true;
    c.worker_count = 4;
    keep.push_back(run_cut_pursuit(grid.graph, grid_f, c));
    const PcpResult& r = keep.back();
    traces.push_back({"64x64 pcp-balanced", &r.trace, c.reduced_tol, grid.graph.num_vertices()});
    const double f4 = r.trace.rows.back().objective;
    const double rel = std::abs(f4 - f3) / std::abs(f3);
    const double t = seconds_since(t0);
    bool any_balanced = false;
    for (const auto& row : r.trace.rows) any_balanced = any_balanced || row.balanced;
    verdict(4, rel <= 1e-2 && t < 60.0 && any_balanced,
            fmt("F_balanced=%.10g rel=%.2e vs criterion 3, balancing active=%d, %.2f s", f4, rel,
                int(any_balanced), t));
  });

  guarded(5, [&] {
    bool same = true;
    std::string detail;
    for (bool balance : {false, true}) {
      std::string first;
      for (int threads : {1, 2, 8}) {
        PcpConfig c = cfg3;
        c.balance = balance;
        c.worker_count = 4;
        c.num_threads = threads;
        keep.push_back(run_cut_pursuit(grid.graph, grid_f, c));
        traces.push_back({fmt("64x64 determinism balance=%d threads=%d", int(balance), threads), &keep.back().trace,
                          c.reduced_tol, grid.graph.num_vertices()});
        const fs::path p = dir / fmt("sol_b%d_t%d.txt", int(balance), threads);
        write_rows(p.string(), keep.back().x);
        const std::string text = slurp(p);
        if (first.empty()) first = text;
        same = same && text == first;
      }
    }
    verdict(5, same, "solution files for 1, 2 and 8 workers, balancing off and on (cap from 4 workers)");
  });

  guarded(7, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    GenOptions o;
    o.problem = ProblemKind::lasso;
    o.size = 500;
    o.sensors = 40;
    o.blocks = 10;
    o.noise = 0.01;
    o.weight = 0.05;
    o.lambda = 0.02;
    o.seed = 3;
    const Instance inst = generate_instance(o);
    std::vector<double> y(inst.observations.flat().begin(), inst.observations.flat().end());
    const WeightedLassoNonneg f(y, *inst.leadfield, inst.lambda);
    PcpConfig c;
    c.reduced_tol = 1e-8;
    keep.push_back(run_cut_pursuit(inst.graph, f, c));
    const PcpResult& r = keep.back();
    traces.push_back({"lasso", &r.trace, c.reduced_tol, inst.graph.num_vertices()});
    bool nonneg = true;
    for (double a : r.x.flat()) nonneg = nonneg && a >= 0.0;
    PrimalDualOptions pd;
    pd.tol = 1e-10;
    pd.max_iter = 1000000;
    const auto b = solve_primal_dual(inst.graph.topology(), f, NodeValues(inst.graph.num_vertices(), 1), pd);
    const double fp = r.trace.rows.back().objective;
    const double rel = std::abs(fp - b.objective) / std::abs(b.objective);

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      NodeValues x(inst.graph.num_vertices(), 1);
      for (double& a : x.flat()) a = u(rng);
      NodeValues g(x.num_nodes(), 1);
      f.gradient_smooth(x, g);
      double gmax = 0.0;
      for (double a : g.flat()) gmax = std::max(gmax, std::abs(a));
      const double h = 1e-6;
      for (std::size_t i = 0; i < x.num_nodes(); i += 25) {
        const double keep_i = x.flat()[i];
        x.flat()[i] = keep_i + h;
        const double fp2 = f.eval_smooth(x);
        x.flat()[i] = keep_i - h;
        const double fm2 = f.eval_smooth(x);
        x.flat()[i] = keep_i;
        worst = std::max(worst, std::abs((fp2 - fm2) / (2 * h) - g.flat()[i]) / gmax);
      }
    }
    const double t = seconds_since(t0);
    verdict(7, nonneg && rel <= 1e-4 && worst <= 1e-5 && t < 60.0,
            fmt("x>=0: %d, F_pcp=%.10g F_baseline=%.10g rel=%.2e, gradient fd err=%.2e, %.2f s", int(nonneg), fp,
                b.objective, rel, worst, t));
  });

  guarded(8, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    GenOptions o;
    o.problem = ProblemKind::kl;
    o.graph = GraphKind::grid;
    o.size = 40;
    o.width = 50;
    o.blocks = 4;
    o.classes = 4;
    o.noise = 0.3;
    o.weight = 0.2;
    o.seed = 5;
    const Instance inst = generate_instance(o);
    const KLSimplex f(inst.observations, 0.1);
    PcpConfig c;
    keep.push_back(run_cut_pursuit(inst.graph, f, c));
    const PcpResult& r = keep.back();
    traces.push_back({"kl", &r.trace, c.reduced_tol, inst.graph.num_vertices()});
    double worst = 0.0;
    for (std::size_t v = 0; v < r.x.num_nodes(); ++v) {
      double s = 0.0, neg = 0.0;
      for (double a : r.x.row(v)) {
        s += a;
        neg = std::min(neg, a);
      }
      worst = std::max({worst, std::abs(s - 1.0), -neg});
    }
    NodeValues proj = inst.observations;
    for (std::size_t v = 0; v < proj.num_nodes(); ++v) project_simplex(proj.row(v));
    const double fy = eval_objective(f, inst.graph.topology(), proj);
    const double fx = r.trace.rows.back().objective;
    const double t = seconds_since(t0);
    verdict(8, worst <= 1e-9 && fx <= fy && r.max_sweep_increase <= 0.0 && t < 120.0,
            fmt("simplex violation=%.1e, F=%.10g <= F(proj y)=%.10g, largest sweep increase=%.1e, %.2f s", worst, fx,
                fy, r.max_sweep_increase, t));
  });

  guarded(6, [&] {
    bool ok = true;
    std::string why, names;
    for (const auto& tc : traces) {
      std::string w;
      if (!trace_ok(*tc.trace, tc.slack, tc.num_vertices, w)) {
        ok = false;
        why += " [" + tc.name + ": " + w + "]";
      }
    }
    verdict(6, ok && !traces.empty(), fmt("%zu acceptance traces checked%s", traces.size(), why.c_str()));
  });

  guarded(9, [&] {
    const Instance big = grid_instance(512, 9);
    const QuadraticFidelity f(big.observations);
    double times[2] = {0.0, 0.0};
    const int counts[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
      PcpConfig c;
      c.balance = true;
      c.worker_count = 4;
      c.num_threads = counts[i];
      keep.push_back(run_cut_pursuit(big.graph, f, c));
      times[i] = keep.back().trace.total_split_time();
    }
    const double ratio = times[1] / times[0];
    const int hw = omp_get_num_procs();
    const std::string detail = fmt("split time 1 worker %.3f s, 4 workers %.3f s, ratio %.2f (target <= 0.70), %d hardware threads",
                                   times[0], times[1], ratio, hw);
    if (hw < 4) {
      report(9, "REPORT", detail + "; not enforced below 4 hardware threads");
    } else {
      verdict(9, ratio <= 0.7, detail);
    }
  });

  guarded(10, [&] {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst[3] = {0.0, 0.0, 0.0};
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng() % 60;
      const std::size_t k = 1 + rng() % n;
      std::vector<std::vector<VertexId>> comps(k);
      for (VertexId v = 0; v < n; ++v) comps[v < k ? v : rng() % k].push_back(v);
      const Partition p(n, comps);

      NodeValues y(n, 1), xi(k, 1);
      for (double& a : y.flat()) a = 5.0 * g(rng);
      for (double& a : xi.flat()) a = 5.0 * g(rng);
      const QuadraticFidelity q(y);
      worst[0] = std::max(worst[0], rel(q.reduce(p)->eval(xi), q.eval(lift(p, xi))));

      LeadField phi{12, n, std::vector<double>(12 * n)};
      for (double& a : phi.data) a = g(rng);
      std::vector<double> yl(12), lam(n);
      for (double& a : yl) a = g(rng);
      for (double& a : lam) a = u(rng);
      const WeightedLassoNonneg l(yl, phi, lam);
      NodeValues xl(k, 1);
      for (double& a : xl.flat()) a = u(rng);
      worst[1] = std::max(worst[1], rel(l.reduce(p)->eval(xl), l.eval(lift(p, xl))));

      const std::size_t K = 2 + rng() % 4;
      NodeValues yk(n, K), xk(k, K);
      for (double& a : yk.flat()) a = u(rng);
      for (double& a : xk.flat()) a = u(rng);
      for (std::size_t v = 0; v < n; ++v) project_simplex(yk.row(v));
      for (std::size_t c = 0; c < k; ++c) project_simplex(xk.row(c));
      const KLSimplex kl(yk, 0.1);
      worst[2] = std::max(worst[2], rel(kl.reduce(p)->eval(xk), kl.eval(lift(p, xk))));
    }
    verdict(10, worst[0] <= 1e-12 && worst[1] <= 1e-12 && worst[2] <= 1e-12,
            fmt("largest relative mismatch: quadratic %.1e, lasso %.1e, kl %.1e", worst[0], worst[1], worst[2]));
  });

  std::printf("acceptance: %s\n", failures == 0 ? "all criteria met" : "FAILURES present");
  return failures == 0 ? 0 : 1;
}
