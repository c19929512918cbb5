#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"
#include "cpsdiag/execution.hpp"

namespace cpsdiag {

// Weights of the four scoring criteria. Each in [0,1], summing to 1.
struct CriterionWeights {
    double reach = 0.25;
    double dist = 0.25;
    double anom = 0.25;
    double chain = 0.25;

    static CriterionWeights equal() { return {}; }
    // "w1,w2,w3,w4"
    static CriterionWeights parse(std::string_view text);
    void validate() const;
    friend bool operator==(const CriterionWeights&, const CriterionWeights&) = default;
};

struct CandidateScore {
    SubsystemId candidate;
    double reach = 0.0;
    double dist = 0.0;
    double anom = 0.0;
    double chain = 0.0;
    double total = 0.0;
};

struct IterationTrace {
    SubsystemSet unexplained_before;
    std::vector<CandidateScore> scores;  // sorted by candidate id
    double sigma_max = 0.0;
    SubsystemSet selected;
    SubsystemSet explained_after;  // cumulative
};

struct DiagnosisStats {
    TraversalStats traversal;
    std::uint64_t chain_expansions = 0;
    bool chains_exhaustive = true;
};

struct DiagnosisResult {
    SubsystemSet root_causes;
    std::vector<IterationTrace> iterations;
    double theta = 1.0;
    CriterionWeights weights;
    DiagnosisStats stats;
};

struct DiagnosisOptions {
    Execution execution = Execution::parallel;
    ChainOptions chain;
};

// Nodes that reach at least one target (reflexive). Empty targets give an empty set.
SubsystemSet candidate_set(const CausalGraph& g, const SubsystemSet& targets);

CandidateScore score_candidate(const CausalGraph& g, std::string_view candidate,
                               const SubsystemSet& symptomatic, const HealthStateVector& h,
                               const CriterionWeights& w);

DiagnosisResult diagnose(const CausalGraph& g, const HealthStateVector& h,
                         const CriterionWeights& w, double theta,
                         const DiagnosisOptions& opts = {});

// Per-iteration scoring state: the current target set, the global anomaly
// mask and the symptomatic chain lengths of every target.
class ScoringContext {
public:
    ScoringContext(const CausalGraph& g, std::vector<char> targets, std::vector<char> anomalous,
                   const CriterionWeights& w, const ChainOptions& chain = {});

    CandidateScore score(CausalGraph::Index candidate, TraversalStats* stats = nullptr) const;

    const CausalGraph& graph() const { return g_; }
    std::size_t target_count() const { return target_count_; }
    std::uint64_t chain_expansions() const { return chain_expansions_; }
    bool chains_exhaustive() const { return chains_exhaustive_; }

private:
    std::size_t chain_length(CausalGraph::Index candidate) const;

    const CausalGraph& g_;
    std::vector<char> targets_;
    std::vector<char> anomalous_;
    CriterionWeights w_;
    std::size_t target_count_ = 0;
    std::vector<std::size_t> target_chain_;
    std::uint64_t chain_expansions_ = 0;
    bool chains_exhaustive_ = true;
};

// Scores `candidates` in the given order. The reference implementation is
// serial; the OpenMP kernel must return bitwise-identical results.
std::vector<CandidateScore> score_candidates_serial(const ScoringContext& ctx,
                                                    std::span<const CausalGraph::Index> candidates,
                                                    TraversalStats* stats = nullptr);
std::vector<CandidateScore> score_candidates_parallel(const ScoringContext& ctx,
                                                      std::span<const CausalGraph::Index> candidates,
                                                      TraversalStats* stats = nullptr);

nlohmann::json weights_to_json(const CriterionWeights& w);
nlohmann::json diagnosis_to_json(const DiagnosisResult& r);

}  // namespace cpsdiag
