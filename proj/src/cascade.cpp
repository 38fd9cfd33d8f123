#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ksv/environment.hpp"
#include "ksv/error.hpp"
#include "ksv/parallel.hpp"
#include "ksv/rng.hpp"

namespace ksv {

Graph::Graph(std::size_t nodes, std::span<const std::pair<Arm, Arm>> edges) {
  std::vector<std::pair<Arm, Arm>> both;
  both.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= nodes || v >= nodes) throw ContractViolation("edge endpoint out of range");
    if (u == v) continue;
    both.emplace_back(u, v);
    both.emplace_back(v, u);
  }
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());

  offsets_.assign(nodes + 1, 0);
  for (auto [u, v] : both) ++offsets_[u + 1];
  for (std::size_t i = 0; i < nodes; ++i) offsets_[i + 1] += offsets_[i];
  neighbors_.resize(both.size());
  for (std::size_t i = 0; i < both.size(); ++i) neighbors_[i] = both[i].second;
}

Graph Graph::path(std::size_t nodes) {
  std::vector<std::pair<Arm, Arm>> e;
  for (Arm i = 0; i + 1 < nodes; ++i) e.emplace_back(i, i + 1);
  return Graph(nodes, e);
}

Graph Graph::complete(std::size_t nodes) {
  std::vector<std::pair<Arm, Arm>> e;
  for (Arm i = 0; i < nodes; ++i) {
    for (Arm j = i + 1; j < nodes; ++j) e.emplace_back(i, j);
  }
  return Graph(nodes, e);
}

namespace {

bool parse_int(std::string_view tok, long long& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

EdgeListLoad parse_edge_list(std::istream& in, const std::string& source) {
  EdgeListLoad out;
  std::unordered_map<long long, Arm> index;
  auto dense = [&](long long label) {
    auto [it, inserted] = index.emplace(label, static_cast<Arm>(out.labels.size()));
    if (inserted) out.labels.push_back(label);
    return it->second;
  };

  std::vector<std::pair<Arm, Arm>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    long long u = 0, v = 0;
    if (!(fields >> a >> b) || (fields >> extra) || !parse_int(a, u) || !parse_int(b, v)) {
      throw ConfigError(source, source + ":" + std::to_string(lineno) +
                                    ": expected two integer node ids, got '" + line + "'");
    }
    const Arm du = dense(u);
    const Arm dv = dense(v);
    if (du == dv) {
      ++out.self_loops_dropped;
      continue;
    }
    edges.emplace_back(std::min(du, dv), std::max(du, dv));
  }
  if (out.labels.empty()) throw ConfigError(source, source + ": edge list is empty");

  std::sort(edges.begin(), edges.end());
  const auto before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.duplicates_dropped = before - edges.size();
  out.graph = Graph(out.labels.size(), edges);
  return out;
}

EdgeListLoad load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open edge list " + path.string());
  return parse_edge_list(in, path.string());
}

CascadeEnv::CascadeEnv(Graph graph, double activation_p, std::size_t budget, QueryLimit limit,
                       std::size_t exact_sims, std::uint64_t exact_seed)
    : Oracle(graph.nodes(), budget, limit),
      graph_(std::move(graph)),
      p_(activation_p),
      exact_sims_(exact_sims),
      exact_seed_(exact_seed) {
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw ContractViolation("activation_p must lie in [0, 1]");
  if (exact_sims_ == 0) throw ContractViolation("cascade env needs exact_sims >= 1");
}

std::size_t CascadeEnv::simulate(std::span<const Arm> seeds, Rng& rng) const {
  if (p_ == 0.0) return seeds.size();

  // Per-thread scratch; stamps avoid clearing the visited array per cascade.
  thread_local std::vector<std::uint32_t> stamp;
  thread_local std::vector<Arm> frontier;
  thread_local std::uint32_t epoch = 0;
  if (stamp.size() < graph_.nodes()) stamp.assign(graph_.nodes(), 0);
  if (++epoch == 0) {
    std::fill(stamp.begin(), stamp.end(), 0);
    epoch = 1;
  }

  frontier.clear();
  for (Arm s : seeds) {
    if (stamp[s] != epoch) {
      stamp[s] = epoch;
      frontier.push_back(s);
    }
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  // frontier doubles as the activation queue: each node is expanded once.
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    for (Arm v : graph_.neighbors(frontier[head])) {
      if (stamp[v] == epoch) continue;
      if (coin(rng) < p_) {
        stamp[v] = epoch;
        frontier.push_back(v);
      }
    }
  }
  return frontier.size();
}

namespace {

constexpr std::size_t kSimsPerChunk = 1024;

SpreadEstimate finish(std::uint64_t sum, std::uint64_t sum_sq, std::size_t sims,
                      std::size_t nodes) {
  const double n = double(sims);
  const double scale = 1.0 / double(nodes);
  const double mean = double(sum) / n;
  const double var = sims > 1 ? std::max(0.0, (double(sum_sq) - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean * scale, std::sqrt(var / n) * scale, sims};
}

}  // namespace

SpreadEstimate CascadeEnv::spread(std::span<const Arm> seeds, std::size_t sims, Rng& rng) const {
  if (sims == 0) throw ContractViolation("cascade spread needs sims >= 1");
  const std::uint64_t base = rng();
  const auto chunks = static_cast<std::ptrdiff_t>((sims + kSimsPerChunk - 1) / kSimsPerChunk);
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
#pragma omp parallel for schedule(static) reduction(+ : sum, sum_sq) num_threads(worker_count())
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    Rng local = derive_rng({base, static_cast<std::uint64_t>(c)});
    const std::size_t lo = static_cast<std::size_t>(c) * kSimsPerChunk;
    const std::size_t hi = std::min(sims, lo + kSimsPerChunk);
    for (std::size_t s = lo; s < hi; ++s) {
      const std::uint64_t hit = simulate(seeds, local);
      sum += hit;
      sum_sq += hit * hit;
    }
  }
  return finish(sum, sum_sq, sims, graph_.nodes());
}

SpreadEstimate CascadeEnv::spread_serial(std::span<const Arm> seeds, std::size_t sims,
                                         Rng& rng) const {
  if (sims == 0) throw ContractViolation("cascade spread needs sims >= 1");
  const std::uint64_t base = rng();
  const std::size_t chunks = (sims + kSimsPerChunk - 1) / kSimsPerChunk;
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng local = derive_rng({base, static_cast<std::uint64_t>(c)});
    const std::size_t hi = std::min(sims, (c + 1) * kSimsPerChunk);
    for (std::size_t s = c * kSimsPerChunk; s < hi; ++s) {
      const std::uint64_t hit = simulate(seeds, local);
      sum += hit;
      sum_sq += hit * hit;
    }
  }
  return finish(sum, sum_sq, sims, graph_.nodes());
}

SpreadEstimate CascadeEnv::exact_estimate(std::span<const Arm> members) const {
  std::vector<Arm> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  const auto key = CoalitionHash{}(Coalition(sorted));
  Rng rng = derive_rng({exact_seed_, static_cast<std::uint64_t>(key), sorted.size()});
  return spread(sorted, exact_sims_, rng);
}

double CascadeEnv::do_pull(std::span<const Arm> members, Rng& rng) const {
  return double(simulate(members, rng)) / double(graph_.nodes());
}

double CascadeEnv::do_exact(std::span<const Arm> members) const {
  return exact_estimate(members).mean;
}

SpreadEstimate cascade_exact(const CascadeEnv& env, std::span<const Arm> seeds,
                             std::size_t sims, Rng& rng) {
  for (Arm s : seeds) {
    if (s >= env.arms()) throw ContractViolation("seed node " + std::to_string(s) + " out of range");
  }
  return env.spread(seeds, sims, rng);
}

}  // namespace ksv
