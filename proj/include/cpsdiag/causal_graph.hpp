#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpsdiag {

using SubsystemId = std::string;
using SubsystemSet = std::set<SubsystemId>;

// Directed fault-propagation graph over subsystems. An edge (l, m) means a
// fault in l can propagate to m. Cycles are allowed, self-loops are not.
// Immutable after construction.
class CausalGraph {
public:
    using Index = std::size_t;
    using Edge = std::pair<SubsystemId, SubsystemId>;

    CausalGraph() = default;
    CausalGraph(std::vector<SubsystemId> nodes, const std::vector<Edge>& edges);

    std::size_t size() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<SubsystemId>& nodes() const { return nodes_; }
    const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }

    bool contains(std::string_view id) const;
    // Throws ValidationError naming the id when it is not a node.
    Index index_of(std::string_view id) const;
    const SubsystemId& name(Index i) const { return nodes_[i]; }

    std::span<const Index> successors(Index v) const {
        return {succ_.data() + succ_offsets_[v], succ_.data() + succ_offsets_[v + 1]};
    }
    std::span<const Index> predecessors(Index v) const {
        return {pred_.data() + pred_offsets_[v], pred_.data() + pred_offsets_[v + 1]};
    }
    bool has_edge(Index from, Index to) const;

private:
    std::vector<SubsystemId> nodes_;
    std::map<SubsystemId, Index, std::less<>> index_;
    std::vector<std::pair<Index, Index>> edges_;
    std::vector<std::size_t> succ_offsets_, pred_offsets_;
    std::vector<Index> succ_, pred_;
};

// Binary health state per subsystem at one time index (true = not OK).
struct HealthStateVector {
    std::int64_t timestamp = 0;
    std::map<SubsystemId, bool> states;

    SubsystemSet symptomatic() const;
    // Keys must be exactly the node set of g.
    void check_covers(const CausalGraph& g) const;
};

// Work counters reported by the traversal kernels.
struct TraversalStats {
    std::uint64_t nodes_visited = 0;
    std::uint64_t edges_scanned = 0;
};

inline constexpr std::int32_t kUnreachable = -1;

// Edge-count distances from `from` to every node, kUnreachable where no path
// exists. distance(from, from) == 0.
std::vector<std::int32_t> bfs_distances(const CausalGraph& g, CausalGraph::Index from,
                                        TraversalStats* stats = nullptr);

// Reflexive reachability: the result always contains `from`.
SubsystemSet reachable_set(const CausalGraph& g, std::string_view from);

std::optional<std::size_t> shortest_distance(const CausalGraph& g, std::string_view from,
                                             std::string_view to);

// Longest simple path search in the subgraph induced by the symptomatic nodes.
// `max_expansions` bounds the DFS; when hit, the best chain found so far is
// returned with exhaustive == false.
struct ChainOptions {
    std::uint64_t max_expansions = 2'000'000;
};

struct ChainResult {
    std::size_t length = 0;
    bool exhaustive = true;
    std::uint64_t expansions = 0;
};

// Chain length from `start`: start counts 1 iff symptomatic, then only
// consecutive symptomatic successors along a simple path extend the chain.
ChainResult longest_symptomatic_chain(const CausalGraph& g, CausalGraph::Index start,
                                      const std::vector<char>& is_symptomatic,
                                      const ChainOptions& opts = {});

std::size_t longest_symptomatic_chain(const CausalGraph& g, std::string_view start,
                                      const SubsystemSet& symptomatic);

std::vector<char> membership_mask(const CausalGraph& g, const SubsystemSet& ids);

}  // namespace cpsdiag
