#include "cpsdiag/causal_graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "cpsdiag/error.hpp"

namespace cpsdiag {

namespace {

void build_csr(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
               bool forward, std::vector<std::size_t>& offsets, std::vector<std::size_t>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [a, b] : pairs) ++offsets[(forward ? a : b) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.assign(pairs.size(), 0);
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [a, b] : pairs) {
        const std::size_t src = forward ? a : b;
        targets[cursor[src]++] = forward ? b : a;
    }
    // Sorted adjacency makes traversal order independent of edge input order.
    for (std::size_t i = 0; i < n; ++i)
        std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                  targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
}

}  // namespace

CausalGraph::CausalGraph(std::vector<SubsystemId> nodes, const std::vector<Edge>& edges)
    : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].empty()) throw ValidationError("graph: empty subsystem id");
        if (!index_.emplace(nodes_[i], i).second)
            throw ValidationError("graph: duplicate subsystem id '" + nodes_[i] + "'");
    }
    std::set<std::pair<Index, Index>> seen;
    edges_.reserve(edges.size());
    for (const auto& [from, to] : edges) {
        auto fi = index_.find(from);
        auto ti = index_.find(to);
        if (fi == index_.end())
            throw ValidationError("graph: edge endpoint '" + from + "' is not a node");
        if (ti == index_.end())
            throw ValidationError("graph: edge endpoint '" + to + "' is not a node");
        if (fi->second == ti->second)
            throw ValidationError("graph: self-loop on '" + from + "' is not allowed");
        if (!seen.emplace(fi->second, ti->second).second)
            throw ValidationError("graph: duplicate edge " + from + " -> " + to);
        edges_.emplace_back(fi->second, ti->second);
    }
    build_csr(nodes_.size(), edges_, true, succ_offsets_, succ_);
    build_csr(nodes_.size(), edges_, false, pred_offsets_, pred_);
}

bool CausalGraph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

CausalGraph::Index CausalGraph::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown subsystem '" + std::string(id) + "'");
    return it->second;
}

bool CausalGraph::has_edge(Index from, Index to) const {
    auto s = successors(from);
    return std::binary_search(s.begin(), s.end(), to);
}

SubsystemSet HealthStateVector::symptomatic() const {
    SubsystemSet out;
    for (const auto& [id, bad] : states)
        if (bad) out.insert(id);
    return out;
}

void HealthStateVector::check_covers(const CausalGraph& g) const {
    std::vector<std::string> missing, extra;
    for (const auto& id : g.nodes())
        if (!states.contains(id)) missing.push_back(id);
    for (const auto& [id, bad] : states)
        if (!g.contains(id)) extra.push_back(id);
    if (missing.empty() && extra.empty()) return;
    std::ostringstream os;
    os << "health state does not match graph nodes";
    if (!missing.empty()) {
        os << "; missing:";
        for (const auto& m : missing) os << ' ' << m;
    }
    if (!extra.empty()) {
        os << "; unknown:";
        for (const auto& e : extra) os << ' ' << e;
    }
    throw ValidationError(os.str());
}

std::vector<std::int32_t> bfs_distances(const CausalGraph& g, CausalGraph::Index from,
                                        TraversalStats* stats) {
    std::vector<std::int32_t> dist(g.size(), kUnreachable);
    std::vector<CausalGraph::Index> queue;
    queue.reserve(g.size());
    dist[from] = 0;
    queue.push_back(from);
    std::uint64_t scanned = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto v = queue[head];
        for (auto w : g.successors(v)) {
            ++scanned;
            if (dist[w] == kUnreachable) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if (stats) {
        stats->nodes_visited += queue.size();
        stats->edges_scanned += scanned;
    }
    return dist;
}

SubsystemSet reachable_set(const CausalGraph& g, std::string_view from) {
    const auto dist = bfs_distances(g, g.index_of(from));
    SubsystemSet out;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] != kUnreachable) out.insert(g.name(i));
    return out;
}

std::optional<std::size_t> shortest_distance(const CausalGraph& g, std::string_view from,
                                             std::string_view to) {
    const auto target = g.index_of(to);
    const auto dist = bfs_distances(g, g.index_of(from));
    if (dist[target] == kUnreachable) return std::nullopt;
    return static_cast<std::size_t>(dist[target]);
}

std::vector<char> membership_mask(const CausalGraph& g, const SubsystemSet& ids) {
    std::vector<char> mask(g.size(), 0);
    for (const auto& id : ids) mask[g.index_of(id)] = 1;
    return mask;
}

namespace {

class ChainSearch {
public:
    ChainSearch(const CausalGraph& g, const std::vector<char>& sym, const ChainOptions& opts)
        : g_(g), sym_(sym), budget_(opts.max_expansions), visited_(g.size(), 0),
          seen_(g.size(), 0) {
        for (char s : sym) total_ += s ? 1 : 0;
    }

    ChainResult run(CausalGraph::Index start) {
        visited_[start] = 1;
        dfs(start, sym_[start] ? 1 : 0);
        return {best_, !aborted_, expansions_};
    }

private:
    // Symptomatic nodes reachable from v without revisiting the current path.
    std::size_t open_reach(CausalGraph::Index v) {
        ++stamp_;
        stack_.clear();
        stack_.push_back(v);
        std::size_t count = 0;
        while (!stack_.empty()) {
            const auto x = stack_.back();
            stack_.pop_back();
            for (auto w : g_.successors(x)) {
                if (!sym_[w] || visited_[w] || seen_[w] == stamp_) continue;
                seen_[w] = stamp_;
                ++count;
                stack_.push_back(w);
            }
        }
        return count;
    }

    void dfs(CausalGraph::Index v, std::size_t length) {
        if (aborted_) return;
        if (++expansions_ > budget_) {
            aborted_ = true;
            return;
        }
        best_ = std::max(best_, length);
        if (best_ == total_ || length + open_reach(v) <= best_) return;
        for (auto w : g_.successors(v)) {
            if (!sym_[w] || visited_[w]) continue;
            visited_[w] = 1;
            dfs(w, length + 1);
            visited_[w] = 0;
            if (aborted_ || best_ == total_) return;
        }
    }

    const CausalGraph& g_;
    const std::vector<char>& sym_;
    std::uint64_t budget_;
    std::vector<char> visited_;
    std::vector<std::uint32_t> seen_;
    std::vector<CausalGraph::Index> stack_;
    std::uint32_t stamp_ = 0;
    std::size_t total_ = 0;
    std::size_t best_ = 0;
    std::uint64_t expansions_ = 0;
    bool aborted_ = false;
};

}  // namespace

ChainResult longest_symptomatic_chain(const CausalGraph& g, CausalGraph::Index start,
                                      const std::vector<char>& is_symptomatic,
                                      const ChainOptions& opts) {
    return ChainSearch(g, is_symptomatic, opts).run(start);
}

std::size_t longest_symptomatic_chain(const CausalGraph& g, std::string_view start,
                                      const SubsystemSet& symptomatic) {
    const auto s = g.index_of(start);
    return longest_symptomatic_chain(g, s, membership_mask(g, symptomatic)).length;
}

}  // namespace cpsdiag
