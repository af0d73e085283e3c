#include "h2ad/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>

namespace h2ad {

namespace {

double sin_threshold(double deg) { return std::sin(deg2rad(deg)); }

void check_omc_params(const OmcParams& p) {
  if (!(p.radius_deg > 0.0 && p.radius_deg < 90.0)) throw ConfigError("OMC radius must be in (0, 90) degrees");
  if (!(p.decay > 0.0 && p.decay <= 1.0)) throw ConfigError("OMC decay must be in (0, 1]");
  if (p.eviction_floor < 0.0 || p.eviction_floor >= 1.0) throw ConfigError("OMC eviction floor must be in [0, 1)");
  if (p.merge_deg < 0.0) throw ConfigError("OMC merge threshold must be >= 0");
}

struct OmcState {
  std::multimap<double, MicroCluster> clusters;  // keyed by sin(centroid)
  std::int64_t ops = 0;
};

double weight_at(const MicroCluster& c, long t, double decay) {
  return c.weight * std::pow(decay, static_cast<double>(t - c.last_update));
}

OmcState run_stream(std::span<const CandidateAngle> stream, const OmcParams& p) {
  check_omc_params(p);
  const double radius = sin_threshold(p.radius_deg);
  OmcState st;
  auto& cl = st.clusters;
  long t = 0;
  for (const auto& cand : stream) {
    ++t;
    const double s = std::sin(cand.angle);
    // Weights as of the end of arrival t - 1.
    auto alive = [&](std::multimap<double, MicroCluster>::iterator it) {
      return weight_at(it->second, t - 1, p.decay) >= p.eviction_floor;
    };
    auto next = cl.lower_bound(s);
    while (next != cl.end() && !alive(next)) next = cl.erase(next);
    auto prev = next;
    while (prev != cl.begin()) {
      auto cand_it = std::prev(prev);
      if (alive(cand_it)) {
        prev = cand_it;
        break;
      }
      cl.erase(cand_it);
    }
    auto best = cl.end();
    double best_dist = std::numeric_limits<double>::infinity();
    if (next != cl.end()) {
      ++st.ops;
      best_dist = std::abs(next->first - s);
      best = next;
    }
    if (prev != next) {
      ++st.ops;
      const double d = std::abs(prev->first - s);
      if (d < best_dist) {
        best_dist = d;
        best = prev;
      }
    }
    if (best != cl.end() && best_dist <= radius) {
      MicroCluster c = best->second;
      cl.erase(best);
      const double w = weight_at(c, t - 1, p.decay);
      c.centroid = (w * c.centroid + cand.angle) / (w + 1.0);
      c.weight = w + 1.0;
      c.member_count += 1;
      c.last_update = t;
      cl.emplace(std::sin(c.centroid), c);
    } else {
      cl.emplace(s, MicroCluster{cand.angle, 1.0, 1, t});
    }
  }
  // Bring every weight to the final arrival and drop the faded ones.
  for (auto it = cl.begin(); it != cl.end();) {
    it->second.weight = weight_at(it->second, t, p.decay);
    it->second.last_update = t;
    it = it->second.weight < p.eviction_floor ? cl.erase(it) : std::next(it);
  }
  return st;
}

bool ranks_before(const MicroCluster& a, const MicroCluster& b, OmcRanking ranking) {
  if (ranking == OmcRanking::Support && a.member_count != b.member_count) return a.member_count > b.member_count;
  if (a.weight != b.weight) return a.weight > b.weight;
  return std::abs(a.centroid) < std::abs(b.centroid);
}

void sort_result(FusionResult& r) {
  std::vector<size_t> idx(r.angles.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return r.angles[a] < r.angles[b]; });
  FusionResult out = r;
  for (size_t k = 0; k < idx.size(); ++k) {
    out.angles[k] = r.angles[idx[k]];
    out.support[k] = r.support[idx[k]];
    out.score[k] = r.score[idx[k]];
  }
  r = std::move(out);
}

void check_request(std::span<const CandidateAngle> candidates, int num_sources) {
  if (num_sources < 1) throw InputError("fusion needs at least one source");
  if (candidates.empty()) throw InputError("fusion needs a non-empty candidate set");
}

// Candidate indices bucketed by group, in ascending group order.
std::vector<std::vector<int>> by_group(std::span<const CandidateAngle> candidates) {
  int max_group = 0;
  for (const auto& c : candidates) {
    if (c.group < 0) throw InputError("candidate group must be non-negative");
    max_group = std::max(max_group, c.group);
  }
  std::vector<std::vector<int>> groups(static_cast<size_t>(max_group) + 1);
  for (size_t i = 0; i < candidates.size(); ++i) groups[static_cast<size_t>(candidates[i].group)].push_back(static_cast<int>(i));
  std::erase_if(groups, [](const std::vector<int>& g) { return g.empty(); });
  return groups;
}

double candidate_weight(const CandidateAngle& c, const DistanceParams& p) {
  if (p.group_weights.empty()) return 1.0;
  if (c.group >= static_cast<int>(p.group_weights.size())) throw ConfigError("missing fusion weight for a group");
  return p.group_weights[static_cast<size_t>(c.group)];
}

struct Combination {
  std::vector<int> members;  // candidate indices, one per group
  double cost = 0.0;
};

double combination_cost(std::span<const CandidateAngle> cands, const std::vector<int>& members,
                        const DistanceParams& p, std::int64_t& ops) {
  double cost = 0.0;
  for (size_t a = 0; a < members.size(); ++a)
    for (size_t b = a + 1; b < members.size(); ++b) {
      const auto& x = cands[static_cast<size_t>(members[a])];
      const auto& y = cands[static_cast<size_t>(members[b])];
      cost += candidate_weight(x, p) * candidate_weight(y, p) * std::abs(std::sin(x.angle) - std::sin(y.angle));
      ++ops;
    }
  return cost;
}

FusionResult select_combinations(std::span<const CandidateAngle> cands, std::vector<Combination> combos,
                                 int num_sources, const DistanceParams& p, FusionMethod method, std::int64_t ops,
                                 bool low_confidence) {
  std::stable_sort(combos.begin(), combos.end(),
                   [](const Combination& a, const Combination& b) { return a.cost < b.cost; });
  std::vector<bool> used(cands.size(), false);
  FusionResult r;
  r.method = method;
  r.op_count = ops;
  r.low_confidence = low_confidence;
  for (const auto& c : combos) {
    if (static_cast<int>(r.angles.size()) == num_sources) break;
    if (std::any_of(c.members.begin(), c.members.end(), [&](int i) { return used[static_cast<size_t>(i)]; })) continue;
    double wsum = 0.0, acc = 0.0;
    for (int i : c.members) {
      used[static_cast<size_t>(i)] = true;
      const double w = candidate_weight(cands[static_cast<size_t>(i)], p);
      wsum += w;
      acc += w * cands[static_cast<size_t>(i)].angle;
    }
    r.angles.push_back(wsum > 0.0 ? acc / wsum : cands[static_cast<size_t>(c.members.front())].angle);
    r.support.push_back(static_cast<double>(c.members.size()));
    r.score.push_back(c.cost);
  }
  if (static_cast<int>(r.angles.size()) < num_sources)
    throw InsufficientSupportError(method_name(method) + ": only " + std::to_string(r.angles.size()) +
                                   " disjoint combinations for " + std::to_string(num_sources) + " sources");
  sort_result(r);
  return r;
}

}  // namespace

std::string method_name(FusionMethod method) {
  switch (method) {
    case FusionMethod::Omc: return "omc";
    case FusionMethod::Wgmd: return "wgmd";
    case FusionMethod::Wlmd: return "wlmd";
  }
  return "unknown";
}

std::vector<MicroCluster> omc_clusters(std::span<const CandidateAngle> stream, const OmcParams& params) {
  auto st = run_stream(stream, params);
  std::vector<MicroCluster> out;
  for (auto& [key, c] : st.clusters) out.push_back(c);
  return out;
}

FusionResult omc_fuse(std::span<const CandidateAngle> stream, int num_sources, const OmcParams& params) {
  check_request(stream, num_sources);
  auto st = run_stream(stream, params);
  std::vector<MicroCluster> merged;
  const double merge = sin_threshold(params.merge_deg);
  for (auto& [key, c] : st.clusters) {
    if (!merged.empty()) {
      ++st.ops;
      auto& last = merged.back();
      if (std::abs(std::sin(last.centroid) - key) < merge) {
        const double w = last.weight + c.weight;
        last.centroid = (last.weight * last.centroid + c.weight * c.centroid) / w;
        last.weight = w;
        last.member_count += c.member_count;
        continue;
      }
    }
    merged.push_back(c);
  }
  if (static_cast<int>(merged.size()) < num_sources)
    throw InsufficientSupportError("omc: " + std::to_string(merged.size()) + " surviving clusters for " +
                                   std::to_string(num_sources) + " sources; try a larger radius");
  std::stable_sort(merged.begin(), merged.end(),
                   [&](const MicroCluster& a, const MicroCluster& b) { return ranks_before(a, b, params.ranking); });
  FusionResult r;
  r.method = FusionMethod::Omc;
  r.op_count = st.ops;
  for (int i = 0; i < num_sources; ++i) {
    const auto& c = merged[static_cast<size_t>(i)];
    r.angles.push_back(c.centroid);
    r.support.push_back(c.member_count);
    r.score.push_back(c.weight);
  }
  sort_result(r);
  return r;
}

FusionResult wgmd_fuse(std::span<const CandidateAngle> candidates, int num_sources, const DistanceParams& params) {
  check_request(candidates, num_sources);
  const auto groups = by_group(candidates);
  std::vector<Combination> combos;
  std::int64_t ops = 0;
  size_t total = 1;
  for (const auto& g : groups) total *= g.size();
  combos.reserve(total);
  // Mixed-radix enumeration, first group most significant.
  for (size_t k = 0; k < total; ++k) {
    Combination c;
    c.members.resize(groups.size());
    size_t rem = k;
    for (size_t g = groups.size(); g-- > 0;) {
      c.members[g] = groups[g][rem % groups[g].size()];
      rem /= groups[g].size();
    }
    c.cost = combination_cost(candidates, c.members, params, ops);
    combos.push_back(std::move(c));
  }
  return select_combinations(candidates, std::move(combos), num_sources, params, FusionMethod::Wgmd, ops,
                             groups.size() < 2);
}

FusionResult wlmd_fuse(std::span<const CandidateAngle> candidates, int num_sources, const DistanceParams& params) {
  check_request(candidates, num_sources);
  const auto groups = by_group(candidates);
  std::vector<Combination> combos;
  std::int64_t ops = 0;
  for (int anchor : groups.front()) {
    const double s0 = std::sin(candidates[static_cast<size_t>(anchor)].angle);
    Combination c;
    c.members.push_back(anchor);
    for (size_t g = 1; g < groups.size(); ++g) {
      int best = groups[g].front();
      double best_d = std::numeric_limits<double>::infinity();
      for (int i : groups[g]) {
        ++ops;
        const double d = std::abs(std::sin(candidates[static_cast<size_t>(i)].angle) - s0);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      c.members.push_back(best);
    }
    c.cost = combination_cost(candidates, c.members, params, ops);
    combos.push_back(std::move(c));
  }
  return select_combinations(candidates, std::move(combos), num_sources, params, FusionMethod::Wlmd, ops,
                             groups.size() < 2);
}

AccuracyReport accuracy_and_rmse(const std::vector<std::optional<std::vector<double>>>& estimates,
                                 const std::vector<double>& truth, double gate_deg) {
  if (truth.empty()) throw InputError("accuracy needs at least one true angle");
  const size_t n = truth.size();
  std::vector<double> sq(n, 0.0);
  std::vector<int> hits(n, 0);
  for (const auto& trial : estimates) {
    if (!trial || trial->empty()) continue;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double e : *trial) best = std::min(best, std::abs(rad2deg(e - truth[i])));
      if (best <= gate_deg) {
        ++hits[i];
        sq[i] += best * best;
      }
    }
  }
  AccuracyReport rep;
  double total_sq = 0.0;
  int total_hits = 0;
  for (size_t i = 0; i < n; ++i) {
    rep.accuracy.push_back(estimates.empty() ? 0.0 : static_cast<double>(hits[i]) / static_cast<double>(estimates.size()));
    rep.rmse_deg.push_back(hits[i] > 0 ? std::sqrt(sq[i] / hits[i]) : std::numeric_limits<double>::quiet_NaN());
    total_sq += sq[i];
    total_hits += hits[i];
  }
  rep.overall_accuracy = std::accumulate(rep.accuracy.begin(), rep.accuracy.end(), 0.0) / static_cast<double>(n);
  rep.overall_rmse_deg = total_hits > 0 ? std::sqrt(total_sq / total_hits) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace h2ad
