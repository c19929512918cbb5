#include "cpsdiag/diagnosis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "cpsdiag/error.hpp"

namespace cpsdiag {

using nlohmann::json;
using Index = CausalGraph::Index;

CriterionWeights CriterionWeights::parse(std::string_view text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        auto field = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
            throw ValidationError("weights: cannot parse '" + std::string(field) +
                                  "' (expected w1,w2,w3,w4)");
        values.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (values.size() != 4)
        throw ValidationError("weights: expected exactly 4 comma-separated values, got " +
                              std::to_string(values.size()));
    CriterionWeights w{values[0], values[1], values[2], values[3]};
    w.validate();
    return w;
}

void CriterionWeights::validate() const {
    for (double v : {reach, dist, anom, chain})
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError("weights: each weight must lie in [0,1]");
    const double sum = reach + dist + anom + chain;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("weights: must sum to 1 (got " + std::to_string(sum) + ")");
}

SubsystemSet candidate_set(const CausalGraph& g, const SubsystemSet& targets) {
    std::vector<char> seen(g.size(), 0);
    std::vector<Index> stack;
    for (const auto& t : targets) {
        const auto i = g.index_of(t);
        if (!seen[i]) {
            seen[i] = 1;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto p : g.predecessors(v))
            if (!seen[p]) {
                seen[p] = 1;
                stack.push_back(p);
            }
    }
    SubsystemSet out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (seen[i]) out.insert(g.name(i));
    return out;
}

ScoringContext::ScoringContext(const CausalGraph& g, std::vector<char> targets,
                               std::vector<char> anomalous, const CriterionWeights& w,
                               const ChainOptions& chain)
    : g_(g), targets_(std::move(targets)), anomalous_(std::move(anomalous)), w_(w),
      target_chain_(g.size(), 0) {
    for (std::size_t i = 0; i < g_.size(); ++i) {
        if (!targets_[i]) continue;
        ++target_count_;
        const auto r = longest_symptomatic_chain(g_, i, targets_, chain);
        target_chain_[i] = r.length;
        chain_expansions_ += r.expansions;
        chains_exhaustive_ = chains_exhaustive_ && r.exhaustive;
    }
}

// A non-target candidate is outside the target-induced subgraph, so its chain
// is the best chain of any target successor.
std::size_t ScoringContext::chain_length(Index c) const {
    if (targets_[c]) return target_chain_[c];
    std::size_t best = 0;
    for (auto s : g_.successors(c))
        if (targets_[s]) best = std::max(best, target_chain_[s]);
    return best;
}

CandidateScore ScoringContext::score(Index c, TraversalStats* stats) const {
    const auto dist = bfs_distances(g_, c, stats);
    std::size_t reached = 0;
    double proximity = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (!targets_[i] || dist[i] == kUnreachable) continue;
        ++reached;
        proximity += 1.0 / (1.0 + static_cast<double>(dist[i]));
    }
    const double n = static_cast<double>(target_count_);
    CandidateScore s;
    s.candidate = g_.name(c);
    s.reach = static_cast<double>(reached) / n;
    s.dist = proximity / n;
    s.anom = anomalous_[c] ? 1.0 : 0.0;
    s.chain = static_cast<double>(chain_length(c)) / n;
    s.total = w_.reach * s.reach + w_.dist * s.dist + w_.anom * s.anom + w_.chain * s.chain;
    return s;
}

std::vector<CandidateScore> score_candidates_serial(const ScoringContext& ctx,
                                                    std::span<const Index> candidates,
                                                    TraversalStats* stats) {
    std::vector<CandidateScore> out;
    out.reserve(candidates.size());
    for (auto c : candidates) out.push_back(ctx.score(c, stats));
    return out;
}

std::vector<CandidateScore> score_candidates_parallel(const ScoringContext& ctx,
                                                      std::span<const Index> candidates,
                                                      TraversalStats* stats) {
    std::vector<CandidateScore> out(candidates.size());
    std::uint64_t visited = 0, scanned = 0;
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : visited, scanned)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        TraversalStats local;
        out[static_cast<std::size_t>(i)] = ctx.score(candidates[static_cast<std::size_t>(i)], &local);
        visited += local.nodes_visited;
        scanned += local.edges_scanned;
    }
    if (stats) {
        stats->nodes_visited += visited;
        stats->edges_scanned += scanned;
    }
    return out;
}

CandidateScore score_candidate(const CausalGraph& g, std::string_view candidate,
                               const SubsystemSet& symptomatic, const HealthStateVector& h,
                               const CriterionWeights& w) {
    w.validate();
    if (symptomatic.empty())
        throw ValidationError("score_candidate: symptomatic set must be non-empty");
    const auto c = g.index_of(candidate);
    if (!candidate_set(g, symptomatic).contains(std::string(candidate)))
        throw ValidationError("score_candidate: '" + std::string(candidate) +
                              "' reaches no symptomatic subsystem");
    auto it = h.states.find(std::string(candidate));
    if (it == h.states.end())
        throw ValidationError("score_candidate: no health state for '" + std::string(candidate) + "'");
    std::vector<char> anomalous(g.size(), 0);
    for (const auto& [id, bad] : h.states)
        if (bad && g.contains(id)) anomalous[g.index_of(id)] = 1;
    ScoringContext ctx(g, membership_mask(g, symptomatic), std::move(anomalous), w);
    return ctx.score(c);
}

namespace {

std::vector<Index> sorted_indices(const CausalGraph& g, const std::vector<char>& mask) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](Index a, Index b) { return g.name(a) < g.name(b); });
    return out;
}

std::vector<char> ancestors_of(const CausalGraph& g, const std::vector<char>& targets) {
    std::vector<char> seen = targets;
    std::vector<Index> stack;
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (targets[i]) stack.push_back(i);
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto p : g.predecessors(v))
            if (!seen[p]) {
                seen[p] = 1;
                stack.push_back(p);
            }
    }
    return seen;
}

std::vector<char> descendants_of(const CausalGraph& g, const std::vector<Index>& sources) {
    std::vector<char> seen(g.size(), 0);
    std::vector<Index> stack;
    for (auto s : sources)
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto w : g.successors(v))
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return seen;
}

SubsystemSet names_of(const CausalGraph& g, const std::vector<char>& mask) {
    SubsystemSet out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.insert(g.name(i));
    return out;
}

}  // namespace

DiagnosisResult diagnose(const CausalGraph& g, const HealthStateVector& h,
                         const CriterionWeights& w, double theta, const DiagnosisOptions& opts) {
    h.check_covers(g);
    w.validate();
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0,1]");

    DiagnosisResult result;
    result.theta = theta;
    result.weights = w;

    std::vector<char> anomalous(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) anomalous[i] = h.states.at(g.name(i)) ? 1 : 0;
    std::vector<char> unexplained = anomalous;
    std::vector<char> explained(g.size(), 0);

    while (std::find(unexplained.begin(), unexplained.end(), 1) != unexplained.end()) {
        IterationTrace trace;
        trace.unexplained_before = names_of(g, unexplained);

        ScoringContext ctx(g, unexplained, anomalous, w, opts.chain);
        result.stats.chain_expansions += ctx.chain_expansions();
        result.stats.chains_exhaustive = result.stats.chains_exhaustive && ctx.chains_exhaustive();

        const auto candidates = sorted_indices(g, ancestors_of(g, unexplained));
        trace.scores = opts.execution == Execution::parallel
                           ? score_candidates_parallel(ctx, candidates, &result.stats.traversal)
                           : score_candidates_serial(ctx, candidates, &result.stats.traversal);

        for (const auto& s : trace.scores) trace.sigma_max = std::max(trace.sigma_max, s.total);
        const double cutoff = theta * trace.sigma_max;
        std::vector<Index> selected;
        for (std::size_t k = 0; k < trace.scores.size(); ++k) {
            if (trace.scores[k].total >= cutoff) {
                selected.push_back(candidates[k]);
                trace.selected.insert(trace.scores[k].candidate);
            }
        }

        const auto reach = descendants_of(g, selected);
        bool progress = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (unexplained[i] && reach[i]) {
                unexplained[i] = 0;
                explained[i] = 1;
                progress = true;
            }
        }
        // Every target is its own candidate with a positive score, so the
        // argmax always explains at least one target.
        if (!progress) throw std::logic_error("diagnose: iteration explained no symptom");

        trace.explained_after = names_of(g, explained);
        result.root_causes.insert(trace.selected.begin(), trace.selected.end());
        result.iterations.push_back(std::move(trace));
    }
    return result;
}

json weights_to_json(const CriterionWeights& w) {
    return json::array({w.reach, w.dist, w.anom, w.chain});
}

json diagnosis_to_json(const DiagnosisResult& r) {
    json iterations = json::array();
    for (const auto& it : r.iterations) {
        json scores = json::array();
        for (const auto& s : it.scores)
            scores.push_back({{"candidate", s.candidate},
                              {"reach", s.reach},
                              {"dist", s.dist},
                              {"anom", s.anom},
                              {"chain", s.chain},
                              {"total", s.total}});
        iterations.push_back({{"unexplained_before", it.unexplained_before},
                              {"scores", std::move(scores)},
                              {"sigma_max", it.sigma_max},
                              {"selected", it.selected}});
    }
    return json{{"root_causes", r.root_causes},
                {"theta", r.theta},
                {"weights", weights_to_json(r.weights)},
                {"iterations", std::move(iterations)}};
}

}  // namespace cpsdiag
