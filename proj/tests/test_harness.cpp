#include <doctest.h>

#include "cpsdiag/error.hpp"
#include "cpsdiag/harness.hpp"
#include "fixtures.hpp"

using namespace cpsdiag;
using OC = OutcomeCategory;

namespace {

HealthStateVector window(std::int64_t t, const SubsystemSet& flagged) {
    HealthStateVector h;
    h.timestamp = t;
    for (const auto& s : {"A", "B", "C"}) h.states[s] = flagged.count(s) > 0;
    return h;
}

Experiment2Config small_experiment() {
    Experiment2Config c;
    c.n_trials = 6;
    c.trial.min_nodes = 5;
    c.trial.max_nodes = 8;
    c.trial.train_rows = 600;
    c.trial.validation_rows = 100;
    c.trial.calibration_rows = 512;
    c.trial.test_rows = 500;
    c.trial.fault_offset = 100;
    c.trial.fault_rows = 300;
    c.window_len = 16;
    c.latent_dim = 4;
    c.seed = 11;
    return c;
}

}  // namespace

TEST_CASE("outcome classification") {
    CHECK(classify("A", {"B"}, {"B"}) == OC::missed_symptom);
    CHECK(classify("A", {}, {}) == OC::missed_symptom);
    CHECK(classify("A", {"A", "B"}, {"B"}) == OC::missed_cause);
    CHECK(classify("A", {"A", "B"}, {"A", "B"}) == OC::no_reduction);
    CHECK(classify("A", {"A"}, {"A"}) == OC::no_reduction);
    CHECK(classify("A", {"A", "B"}, {"A", "B", "C"}) == OC::no_reduction);
    CHECK(classify("A", {"A", "B", "C"}, {"A", "B"}) == OC::reduced_set);
    CHECK(classify("A", {"A", "B", "C"}, {"A"}) == OC::perfect);
    CHECK(all_categories().size() == 5);
    CHECK(to_string(OC::reduced_set) == "reduced_set");
}

TEST_CASE("majority vote needs strictly more than half the windows") {
    const std::vector<HealthStateVector> ws{window(1, {"A", "B"}), window(2, {"A"}), window(3, {"B"}),
                                            window(4, {"A", "C"})};
    CHECK(majority_symptoms(ws) == SubsystemSet{"A"});
    CHECK(majority_symptoms(std::span<const HealthStateVector>{}).empty());
    CHECK(incident_symptoms(ws, 2, 4) == SubsystemSet{});  // A and B tie at 1 of 2
    CHECK(incident_symptoms(ws, 1, 3) == SubsystemSet{"A"});
    CHECK(incident_symptoms(ws, 3, 5) == SubsystemSet{});
    CHECK(incident_symptoms(ws, 2, 5) == SubsystemSet{"A"});
}

TEST_CASE("canonical scenarios") {
    CHECK(canonical_scenarios().size() == 4);
    for (const auto& s : canonical_scenarios()) {
        CHECK_FALSE(s.health.symptomatic().empty());
        CHECK_NOTHROW(s.health.check_covers(s.graph));
        const auto r = run_scenario(s.graph, s.health, CriterionWeights::equal(), 0.9);
        CHECK_FALSE(r.root_causes.empty());
    }
    CHECK_THROWS_WITH_AS(canonical_scenario("nope"), doctest::Contains("acyclic_single"), ValidationError);
    const auto& multi = canonical_scenario("acyclic_multi");
    const auto r = run_scenario(multi.graph, multi.health, CriterionWeights::equal(), 1.0);
    CHECK(r.root_causes.size() >= 2);
}

TEST_CASE("theta sweep emits rows on change only") {
    const auto& s = canonical_scenario("acyclic_single");
    const auto thetas = default_thetas();
    CHECK(thetas.size() == 11);
    CHECK(thetas.front() == 1.0);
    CHECK(thetas.back() == 0.0);
    const auto sweep = theta_sweep(s.graph, s.health, CriterionWeights::equal(), thetas);
    REQUIRE_FALSE(sweep.rows.empty());
    CHECK(sweep.rows.front().theta == 1.0);
    CHECK(sweep.rows.front().newly_added == sweep.rows.front().root_causes);
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
        CHECK(sweep.rows[i].root_causes != sweep.rows[i - 1].root_causes);
        for (const auto& x : sweep.rows[i].newly_added) CHECK(sweep.rows[i - 1].root_causes.count(x) == 0);
    }
    CHECK(sweep.rows.back().root_causes == SubsystemSet{"A", "B", "C", "D"});
    const auto csv = sweep_to_csv(sweep);
    CHECK(csv.rfind("theta,root_causes,newly_added\n", 0) == 0);
    CHECK(csv.find("1.00,") != std::string::npos);
    const std::vector<double> bad{0.5, 0.5};
    CHECK_THROWS_AS(theta_sweep(s.graph, s.health, CriterionWeights::equal(), bad), ValidationError);
}

TEST_CASE("experiment 1 covers every scenario") {
    const auto thetas = default_thetas();
    const auto j = run_experiment1(CriterionWeights::equal(), thetas);
    CHECK(j.size() == 4);
    CHECK(j[0]["scenario"] == "acyclic_single");
    CHECK(j[0]["sweep"]["rows"].size() >= 1);
}

TEST_CASE("experiment 2 accounts for every trial and is reproducible") {
    auto cfg = small_experiment();
    const auto a = run_experiment2(cfg);
    cfg.execution = Execution::serial;
    const auto b = run_experiment2(cfg);
    CHECK(experiment2_to_json(a).dump() == experiment2_to_json(b).dump());
    CHECK(a.trials.size() == 6);
    std::size_t total = 0;
    for (const auto& [c, n] : a.counts) total += n;
    CHECK(total == a.completed);
    CHECK(a.completed >= 4);
    for (const auto& t : a.trials) {
        CHECK(t.seed == derive_seed(11, t.index));
        if (!t.completed) {
            CHECK_FALSE(t.error.empty());
            continue;
        }
        CHECK(t.outcome.category == classify(t.outcome.s_true, t.outcome.s_sym, t.outcome.s_causal));
        CHECK(t.outcome.s_causal.empty() == t.outcome.s_sym.empty());
    }
    CHECK(a.inclusion_rate >= a.reduction_rate);
    CHECK(a.inclusion_rate <= 1.0);
    const auto j = experiment2_to_json(a);
    for (const char* key : {"missed_symptom", "missed_cause", "no_reduction", "reduced_set", "perfect",
                            "inclusion_rate", "reduction_rate"})
        CHECK(j["aggregate"].contains(key));
    CHECK(a.summary().find("completed") == 0);
}

TEST_CASE("experiment 2 rejects bad configurations") {
    auto cfg = small_experiment();
    cfg.n_trials = 0;
    CHECK_THROWS_AS(run_experiment2(cfg), ValidationError);
    cfg = small_experiment();
    cfg.percentile = 100.0;
    CHECK_THROWS_AS(run_experiment2(cfg), ValidationError);
    cfg = small_experiment();
    cfg.theta = 1.5;
    CHECK_THROWS_AS(run_experiment2(cfg), ValidationError);
}
