#pragma once

// Time-partitioned (block) and parallel-queue (lane) plans, the heuristics
// that search for them, exhaustive oracles for small N, and the builders that
// turn a plan into a control logic from deadbeat windows.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncs/deadbeat.hpp"
#include "ncs/linalg.hpp"
#include "ncs/parallel.hpp"

namespace ncs {

/// Consecutive time blocks; every plant of blocks[j] is steered inside
/// [offsets[j], offsets[j] + block_lengths[j]).
struct BlockPlan {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<int> block_lengths;
  std::vector<int> offsets;

  friend bool operator==(const BlockPlan&, const BlockPlan&) = default;
};

/// Up to M queues; the plants of a lane are steered back to back in lane order.
struct LanePlan {
  std::vector<std::vector<std::size_t>> lanes;
  std::map<std::size_t, int> window_length;

  /// Start of the plant's window inside its lane.
  std::map<std::size_t, int> offsets() const {
    std::map<std::size_t, int> out;
    for (const auto& lane : lanes) {
      int t = 0;
      for (std::size_t i : lane) {
        out[i] = t;
        t += window_length.at(i);
      }
    }
    return out;
  }

  int lane_load(std::size_t j) const {
    int s = 0;
    for (std::size_t i : lanes.at(j)) s += window_length.at(i);
    return s;
  }

  friend bool operator==(const LanePlan&, const LanePlan&) = default;
};

inline int ceil_div(std::size_t n, int m) {
  return static_cast<int>((n + static_cast<std::size_t>(m) - 1) / static_cast<std::size_t>(m));
}

/// T >= ceil(N / M). Necessary whenever no plant reaches zero open-loop.
inline bool check_necessary(std::size_t plants, int capacity, int horizon) {
  return horizon >= ceil_div(plants, capacity);
}

inline bool check_necessary(const NcsInstance& inst) {
  return check_necessary(inst.size(), inst.capacity(), inst.horizon());
}

namespace detail {

inline std::vector<std::size_t> all_plants(const NcsInstance& inst) {
  std::vector<std::size_t> v(inst.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

inline void require_reachable(const NcsInstance& inst, std::span<const std::size_t> subset) {
  std::string bad;
  for (std::size_t i : subset) {
    if (!is_reachable(inst.plant(i))) {
      if (!bad.empty()) bad += ", ";
      bad += std::to_string(i + 1);
    }
  }
  if (!bad.empty()) throw Error(ErrorCode::NotReachable, "plants not reachable: " + bad);
}

inline std::vector<std::size_t> sorted_copy(std::span<const std::size_t> subset) {
  std::vector<std::size_t> v(subset.begin(), subset.end());
  std::sort(v.begin(), v.end());
  return v;
}

inline bool covers_exactly(const std::vector<std::vector<std::size_t>>& groups,
                           std::span<const std::size_t> subset) {
  std::vector<std::size_t> seen;
  for (const auto& g : groups) seen.insert(seen.end(), g.begin(), g.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
  return seen == sorted_copy(subset);
}

/// Blocks ordered by (length, smallest member); members ascending; offsets
/// recomputed.
inline BlockPlan normalize(BlockPlan plan) {
  std::vector<std::size_t> order(plan.blocks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (auto& b : plan.blocks) std::sort(b.begin(), b.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (plan.block_lengths[a] != plan.block_lengths[b]) {
      return plan.block_lengths[a] < plan.block_lengths[b];
    }
    return plan.blocks[a] < plan.blocks[b];
  });
  BlockPlan out;
  int offset = 0;
  for (std::size_t k : order) {
    out.blocks.push_back(plan.blocks[k]);
    out.block_lengths.push_back(plan.block_lengths[k]);
    out.offsets.push_back(offset);
    offset += plan.block_lengths[k];
  }
  return out;
}

/// Empty lanes dropped; members ascending; lanes ordered by smallest member.
inline LanePlan normalize(LanePlan plan) {
  std::erase_if(plan.lanes, [](const auto& l) { return l.empty(); });
  for (auto& l : plan.lanes) std::sort(l.begin(), l.end());
  std::sort(plan.lanes.begin(), plan.lanes.end());
  return plan;
}

inline int default_window(const NcsInstance& inst, std::size_t i) {
  return inst.plant(i).dim() + 1;
}

}  // namespace detail

/// Empty string when the block plan satisfies every structural condition
/// against the given plant subset, else a description of the first violation.
inline std::string block_plan_violation(const NcsInstance& inst, const BlockPlan& plan,
                                        std::span<const std::size_t> subset) {
  const int expected = ceil_div(subset.size(), inst.capacity());
  if (static_cast<int>(plan.blocks.size()) != expected) {
    return "expected " + std::to_string(expected) + " blocks, got " +
           std::to_string(plan.blocks.size());
  }
  if (plan.block_lengths.size() != plan.blocks.size() || plan.offsets.size() != plan.blocks.size()) {
    return "block lengths/offsets do not match block count";
  }
  int offset = 0;
  for (std::size_t j = 0; j < plan.blocks.size(); ++j) {
    if (plan.blocks[j].size() > static_cast<std::size_t>(inst.capacity())) {
      return "block " + std::to_string(j + 1) + " exceeds capacity";
    }
    for (std::size_t i : plan.blocks[j]) {
      if (i >= inst.size()) return "plant index out of range";
      if (plan.block_lengths[j] <= inst.plant(i).dim()) {
        return "block " + std::to_string(j + 1) + " is too short for plant " + std::to_string(i + 1);
      }
    }
    if (plan.offsets[j] != offset) return "offsets are not cumulative block lengths";
    offset += plan.block_lengths[j];
  }
  if (!detail::covers_exactly(plan.blocks, subset)) return "blocks do not partition the plants";
  if (offset > inst.horizon()) {
    return "total block length " + std::to_string(offset) + " exceeds horizon";
  }
  return {};
}

inline std::string block_plan_violation(const NcsInstance& inst, const BlockPlan& plan) {
  const auto all = detail::all_plants(inst);
  return block_plan_violation(inst, plan, all);
}

inline std::string lane_plan_violation(const NcsInstance& inst, const LanePlan& plan,
                                       std::span<const std::size_t> subset) {
  if (plan.lanes.size() > static_cast<std::size_t>(inst.capacity())) {
    return "more lanes than channel capacity";
  }
  if (!detail::covers_exactly(plan.lanes, subset)) return "lanes do not partition the plants";
  for (std::size_t i : subset) {
    auto it = plan.window_length.find(i);
    if (it == plan.window_length.end()) return "missing window length for plant " + std::to_string(i + 1);
    if (it->second <= inst.plant(i).dim()) {
      return "window of plant " + std::to_string(i + 1) + " is not longer than its dimension";
    }
  }
  for (std::size_t j = 0; j < plan.lanes.size(); ++j) {
    if (plan.lane_load(j) > inst.horizon()) {
      return "lane " + std::to_string(j + 1) + " load " + std::to_string(plan.lane_load(j)) +
             " exceeds horizon";
    }
  }
  return {};
}

inline std::string lane_plan_violation(const NcsInstance& inst, const LanePlan& plan) {
  const auto all = detail::all_plants(inst);
  return lane_plan_violation(inst, plan, all);
}

/// Greedy block search: plants sorted by dimension (descending, ties by
/// index) are cut into ceil(n/M) consecutive groups of at most M, each block
/// length is 1 + its largest dimension. Accepted iff the lengths fit in T.
/// A miss does not prove that no block plan exists.
inline std::optional<BlockPlan> find_block_plan(const NcsInstance& inst,
                                                std::span<const std::size_t> subset) {
  detail::require_reachable(inst, subset);
  if (subset.empty()) return BlockPlan{};
  std::vector<std::size_t> order = detail::sorted_copy(subset);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.plant(a).dim() > inst.plant(b).dim();
  });
  const auto m = static_cast<std::size_t>(inst.capacity());
  BlockPlan plan;
  for (std::size_t k = 0; k < order.size(); k += m) {
    std::vector<std::size_t> block(order.begin() + static_cast<std::ptrdiff_t>(k),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(k + m, order.size())));
    int len = 0;
    for (std::size_t i : block) len = std::max(len, detail::default_window(inst, i));
    plan.blocks.push_back(std::move(block));
    plan.block_lengths.push_back(len);
    plan.offsets.push_back(0);
  }
  plan = detail::normalize(std::move(plan));
  const int total = std::accumulate(plan.block_lengths.begin(), plan.block_lengths.end(), 0);
  if (total > inst.horizon()) return std::nullopt;
  return plan;
}

inline std::optional<BlockPlan> find_block_plan(const NcsInstance& inst) {
  const auto all = detail::all_plants(inst);
  return find_block_plan(inst, all);
}

/// Longest-first lane packing: windows of length d_i + 1, sorted descending
/// (ties by index), each placed on the least-loaded of M lanes (ties by lane
/// index). Accepted iff every lane load fits in T. A miss does not prove
/// that no lane plan exists.
inline std::optional<LanePlan> find_lane_plan(const NcsInstance& inst,
                                              std::span<const std::size_t> subset) {
  detail::require_reachable(inst, subset);
  std::vector<std::size_t> order = detail::sorted_copy(subset);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::default_window(inst, a) > detail::default_window(inst, b);
  });
  LanePlan plan;
  plan.lanes.resize(std::min<std::size_t>(static_cast<std::size_t>(inst.capacity()), order.size()));
  std::vector<int> load(plan.lanes.size(), 0);
  for (std::size_t i : order) {
    const int w = detail::default_window(inst, i);
    plan.window_length[i] = w;
    const auto j = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    if (load[j] + w > inst.horizon()) return std::nullopt;
    load[j] += w;
    plan.lanes[j].push_back(i);
  }
  return detail::normalize(std::move(plan));
}

inline std::optional<LanePlan> find_lane_plan(const NcsInstance& inst) {
  const auto all = detail::all_plants(inst);
  return find_lane_plan(inst, all);
}

/// Largest subset accepted by the exhaustive searches.
inline constexpr std::size_t kExhaustivePlanLimit = 10;

namespace detail {

/// Visits every set partition of `items` into at most `max_groups` groups
/// (restricted growth strings). The visitor returns true to stop.
inline bool for_each_partition(const std::vector<std::size_t>& items, std::size_t max_groups,
                               const std::function<bool(const std::vector<std::vector<std::size_t>>&)>& visit) {
  std::vector<std::vector<std::size_t>> groups;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
    if (k == items.size()) return visit(groups);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      groups[g].push_back(items[k]);
      if (rec(k + 1)) return true;
      groups[g].pop_back();
    }
    if (groups.size() < max_groups) {
      groups.push_back({items[k]});
      if (rec(k + 1)) return true;
      groups.pop_back();
    }
    return false;
  };
  return rec(0);
}

inline void require_small(std::span<const std::size_t> subset) {
  if (subset.size() > kExhaustivePlanLimit) {
    throw Error(ErrorCode::TooLarge, "exhaustive plan search is limited to " +
                                         std::to_string(kExhaustivePlanLimit) + " plants");
  }
}

}  // namespace detail

/// Exhaustive block search over all partitions. Block lengths are set to the
/// smallest admissible value 1 + max dimension, which minimizes their sum for
/// a given partition, so absence here is a proof of nonexistence.
inline std::optional<BlockPlan> find_block_plan_exhaustive(const NcsInstance& inst,
                                                           std::span<const std::size_t> subset) {
  detail::require_small(subset);
  detail::require_reachable(inst, subset);
  const auto items = detail::sorted_copy(subset);
  const auto k = static_cast<std::size_t>(ceil_div(items.size(), inst.capacity()));
  std::optional<BlockPlan> best;
  int best_total = 0;
  detail::for_each_partition(items, k, [&](const auto& groups) {
    if (groups.size() != k) return false;
    BlockPlan plan;
    int total = 0;
    for (const auto& g : groups) {
      if (g.size() > static_cast<std::size_t>(inst.capacity())) return false;
      int len = 0;
      for (std::size_t i : g) len = std::max(len, detail::default_window(inst, i));
      plan.blocks.push_back(g);
      plan.block_lengths.push_back(len);
      plan.offsets.push_back(0);
      total += len;
    }
    if (total <= inst.horizon() && (!best || total < best_total)) {
      best = detail::normalize(std::move(plan));
      best_total = total;
    }
    return false;
  });
  return best;
}

inline std::optional<BlockPlan> find_block_plan_exhaustive(const NcsInstance& inst) {
  const auto all = detail::all_plants(inst);
  return find_block_plan_exhaustive(inst, all);
}

/// Exhaustive lane search with minimal windows d_i + 1; absence is a proof
/// of nonexistence.
inline std::optional<LanePlan> find_lane_plan_exhaustive(const NcsInstance& inst,
                                                         std::span<const std::size_t> subset) {
  detail::require_small(subset);
  detail::require_reachable(inst, subset);
  const auto items = detail::sorted_copy(subset);
  std::optional<LanePlan> found;
  detail::for_each_partition(items, static_cast<std::size_t>(inst.capacity()), [&](const auto& groups) {
    for (const auto& g : groups) {
      int load = 0;
      for (std::size_t i : g) load += detail::default_window(inst, i);
      if (load > inst.horizon()) return false;
    }
    LanePlan plan;
    plan.lanes = groups;
    for (std::size_t i : items) plan.window_length[i] = detail::default_window(inst, i);
    found = detail::normalize(std::move(plan));
    return true;
  });
  return found;
}

inline std::optional<LanePlan> find_lane_plan_exhaustive(const NcsInstance& inst) {
  const auto all = detail::all_plants(inst);
  return find_lane_plan_exhaustive(inst, all);
}

/// When every lane holds exactly k plants, the k-th plants of all lanes form
/// block k with length max of their windows. Returns absent when lane sizes
/// differ or the resulting lengths exceed T.
inline std::optional<BlockPlan> block_plan_from_lanes(const NcsInstance& inst, const LanePlan& lanes) {
  if (lanes.lanes.empty()) return std::nullopt;
  const std::size_t k = lanes.lanes.front().size();
  for (const auto& l : lanes.lanes) {
    if (l.size() != k) return std::nullopt;
  }
  BlockPlan plan;
  int offset = 0;
  for (std::size_t pos = 0; pos < k; ++pos) {
    std::vector<std::size_t> block;
    int len = 0;
    for (const auto& l : lanes.lanes) {
      block.push_back(l[pos]);
      len = std::max(len, lanes.window_length.at(l[pos]));
    }
    std::sort(block.begin(), block.end());
    plan.blocks.push_back(std::move(block));
    plan.block_lengths.push_back(len);
    plan.offsets.push_back(offset);
    offset += len;
  }
  if (offset > inst.horizon()) return std::nullopt;
  return plan;
}

/// Every plant of block j gets the deadbeat window at offset d~_j of length
/// d^_j; all other rows stay zero.
inline ControlLogic build_from_block_plan(const NcsInstance& inst, const BlockPlan& plan) {
  struct Job {
    std::size_t plant;
    int offset;
    int length;
  };
  std::vector<Job> jobs;
  for (std::size_t j = 0; j < plan.blocks.size(); ++j) {
    for (std::size_t i : plan.blocks[j]) jobs.push_back({i, plan.offsets[j], plan.block_lengths[j]});
  }
  ControlLogic logic(inst.size(), inst.horizon());
  std::vector<Vector> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const auto& job = jobs[k];
    rows[k] = windowed_inputs(inst.plant(job.plant), inst.initial_state(job.plant), job.offset,
                              job.length, inst.horizon());
  });
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    logic.u.row(static_cast<Eigen::Index>(jobs[k].plant)) = rows[k].transpose();
  }
  return logic;
}

/// Plants of a lane are steered one after another from t = 0; at most one
/// plant per lane is active at any step.
inline ControlLogic build_from_lane_plan(const NcsInstance& inst, const LanePlan& plan) {
  const auto offsets = plan.offsets();
  std::vector<std::size_t> members;
  for (const auto& lane : plan.lanes) members.insert(members.end(), lane.begin(), lane.end());
  ControlLogic logic(inst.size(), inst.horizon());
  std::vector<Vector> rows(members.size());
  parallel_for(members.size(), [&](std::size_t k) {
    const std::size_t i = members[k];
    rows[k] = windowed_inputs(inst.plant(i), inst.initial_state(i), offsets.at(i),
                              plan.window_length.at(i), inst.horizon());
  });
  for (std::size_t k = 0; k < members.size(); ++k) {
    logic.u.row(static_cast<Eigen::Index>(members[k])) = rows[k].transpose();
  }
  return logic;
}

}  // namespace ncs
