"""Campaign simulation, policy gates, and batch files."""

import json

import pytest

from nanoscope import (
    CampaignSpec,
    CensorPolicy,
    DataFormatError,
    InvertedIndex,
    PolicyGate,
    SelectionStrategy,
    apply_policy,
    outcomes_csv,
    read_batch_file,
    run_batch,
    run_campaign,
    success_rate,
)
from nanoscope.simulator import (
    OUTCOME_CSV_COLUMNS,
    REJECTED_MAX_INTERESTS,
    REJECTED_MIN_AUDIENCE,
)

from util import all_unique_toy, build_population, toy3, unique_at_three_toy


def _lp(n_max=25):
    return SelectionStrategy(kind="lp", n_max=n_max)


def _setup(pop):
    return InvertedIndex.build(pop), pop


# ---------------------------------------------------------------------------
# single campaigns
# ---------------------------------------------------------------------------


def test_unique_target_campaign_succeeds():
    index, pop = _setup(toy3())
    out = run_campaign(index, pop, CampaignSpec(target=3, strategy=_lp(), n_interests=3))
    assert out.success
    assert out.target_reached
    assert out.reached_count == 1
    assert out.interests_used == (3, 2, 1)
    assert not out.shortened


def test_ambiguous_campaign_reaches_more_than_the_target():
    index, pop = _setup(toy3())
    out = run_campaign(index, pop, CampaignSpec(target=1, strategy=_lp(), n_interests=2))
    # user 1's rarest pair {b, a} also matches user 3
    assert out.reached_count == 2
    assert out.target_reached
    assert not out.success


def test_reported_reach_hides_the_true_count():
    index, pop = _setup(toy3())
    out = run_campaign(index, pop, CampaignSpec(target=3, strategy=_lp(), n_interests=3))
    # delivery sees one person; the advertiser-facing number stays floored
    assert out.reached_count == 1
    assert out.reported_reach == 1000
    uncensored = run_campaign(
        index, pop,
        CampaignSpec(target=3, strategy=_lp(), n_interests=3, policy=CensorPolicy(floor=1)),
    )
    assert uncensored.reported_reach == 1


def test_campaign_shortens_when_the_profile_runs_out():
    index, pop = _setup(toy3())
    out = run_campaign(index, pop, CampaignSpec(target=2, strategy=_lp(), n_interests=5))
    # user 2 holds a single interest
    assert out.shortened
    assert out.interests_used == (1,)
    assert out.reached_count == 3


def test_campaigns_use_nested_prefixes_of_one_ordering():
    index, pop = _setup(unique_at_three_toy())
    strategy = SelectionStrategy(kind="random", seed=9)
    used = [
        run_campaign(index, pop, CampaignSpec(target=3, strategy=strategy, n_interests=n))
        .interests_used
        for n in (1, 2, 3)
    ]
    assert used[0] == used[1][:1]
    assert used[1] == used[2][:2]


def test_campaign_reach_counts_shrink_with_n():
    index, pop = _setup(unique_at_three_toy())
    reaches = [
        run_campaign(index, pop, CampaignSpec(target=3, strategy=_lp(), n_interests=n))
        .reached_count
        for n in (1, 2, 3)
    ]
    assert reaches == [3, 2, 1]


def test_campaign_validation():
    index, pop = _setup(toy3())
    with pytest.raises(DataFormatError, match="n_interests"):
        CampaignSpec(target=3, strategy=_lp(), n_interests=0)
    with pytest.raises(DataFormatError, match="n_interests"):
        CampaignSpec(target=3, strategy=_lp(), n_interests=26)
    other = all_unique_toy()
    with pytest.raises(DataFormatError, match="different population"):
        run_campaign(InvertedIndex.build(other), pop,
                     CampaignSpec(target=3, strategy=_lp(), n_interests=1))


# ---------------------------------------------------------------------------
# success rates
# ---------------------------------------------------------------------------


def test_success_rate_is_one_when_everyone_is_unique():
    index, pop = _setup(all_unique_toy(n_users=10))
    assert success_rate(index, pop, _lp(), 3, n_targets=10, seed=1) == 1.0


def test_success_rate_is_zero_for_clones():
    # two indistinguishable users can never be isolated
    index, pop = _setup(build_population({1: (1, 2), 2: (1, 2)}))
    assert success_rate(index, pop, _lp(), 2, n_targets=2, seed=1) == 0.0


def test_success_rate_counts_exact_singletons():
    index, pop = _setup(toy3())
    # only user 3 is uniquely reachable at N=3
    assert success_rate(index, pop, _lp(), 3, n_targets=3, seed=0) == pytest.approx(1 / 3)


def test_success_rate_with_replacement_when_oversampled():
    index, pop = _setup(all_unique_toy(n_users=4))
    rate = success_rate(index, pop, _lp(), 3, n_targets=9, seed=2)
    assert rate == 1.0


def test_success_rate_is_deterministic():
    index, pop = _setup(all_unique_toy(n_users=12))
    a = success_rate(index, pop, SelectionStrategy(kind="random", seed=3), 2, 6, seed=7)
    b = success_rate(index, pop, SelectionStrategy(kind="random", seed=3), 2, 6, seed=7)
    assert a == b


def test_success_rate_validation():
    index, pop = _setup(toy3())
    with pytest.raises(DataFormatError, match="n_targets"):
        success_rate(index, pop, _lp(), 1, n_targets=0)


# ---------------------------------------------------------------------------
# policy gates
# ---------------------------------------------------------------------------


def test_gate_rejects_on_interest_cap():
    index, _ = _setup(toy3())
    spec = CampaignSpec(target=3, strategy=_lp(), n_interests=12)
    decision = apply_policy(spec, PolicyGate(max_interests=9), index)
    assert not decision.accepted
    assert decision.reason == REJECTED_MAX_INTERESTS


def test_gate_rejects_on_audience_minimum():
    index, _ = _setup(toy3())
    spec = CampaignSpec(target=3, strategy=_lp(), n_interests=3)
    decision = apply_policy(spec, PolicyGate(min_active_audience=1000), index)
    assert not decision.accepted
    assert decision.reason == REJECTED_MIN_AUDIENCE


def test_gate_cap_is_checked_before_reach():
    index, _ = _setup(toy3())
    spec = CampaignSpec(target=3, strategy=_lp(), n_interests=12)
    decision = apply_policy(
        spec, PolicyGate(max_interests=9, min_active_audience=1000), index
    )
    assert decision.reason == REJECTED_MAX_INTERESTS


def test_empty_gate_accepts_everything():
    index, _ = _setup(toy3())
    spec = CampaignSpec(target=3, strategy=_lp(), n_interests=3)
    decision = apply_policy(spec, PolicyGate(), index)
    assert decision.accepted
    assert decision.reason is None


def test_gate_minimum_counts_true_audience_not_reported():
    # reported reach is floored at 1000, but the gate sees the true count
    index, pop = _setup(toy3())
    spec = CampaignSpec(target=3, strategy=_lp(), n_interests=3)
    assert run_campaign(index, pop, spec).reported_reach == 1000
    assert not apply_policy(spec, PolicyGate(min_active_audience=2), index).accepted


def test_gate_validation():
    with pytest.raises(DataFormatError, match="max_interests"):
        PolicyGate(max_interests=0)
    with pytest.raises(DataFormatError, match="min_active_audience"):
        PolicyGate(min_active_audience=0)


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------


def test_run_batch_pairs_decisions_with_outcomes():
    index, pop = _setup(toy3())
    specs = [
        CampaignSpec(target=3, strategy=_lp(), n_interests=3),
        CampaignSpec(target=3, strategy=_lp(), n_interests=12),
    ]
    results = run_batch(index, pop, specs, gate=PolicyGate(max_interests=9))
    assert len(results) == 2
    ok_spec, ok_decision, ok_outcome = results[0]
    assert ok_decision.accepted and ok_outcome.success
    _, rejected_decision, rejected_outcome = results[1]
    assert not rejected_decision.accepted
    assert rejected_outcome is None


def test_run_batch_without_gate_runs_everything():
    index, pop = _setup(toy3())
    specs = [CampaignSpec(target=u, strategy=_lp(), n_interests=1) for u in (1, 2, 3)]
    results = run_batch(index, pop, specs)
    assert all(decision.accepted for _, decision, _ in results)
    assert all(outcome is not None for _, _, outcome in results)


def _write_batch(tmp_path, lines):
    path = tmp_path / "batch.jsonl"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_read_batch_file_round_trip(tmp_path):
    path = _write_batch(tmp_path, [
        '{"target": 3, "strategy": "lp", "seed": 0, "n_interests": 3}',
        "",
        '{"target": 1, "strategy": "random", "seed": 5, "n_interests": 2}',
    ])
    specs = read_batch_file(path)
    assert len(specs) == 2
    assert specs[0].target == 3
    assert specs[0].strategy.kind == "lp"
    assert specs[0].policy == CensorPolicy(floor=1000)
    assert specs[1].strategy.seed == 5
    floored = read_batch_file(path, policy=CensorPolicy(floor=1))
    assert floored[0].policy == CensorPolicy(floor=1)


@pytest.mark.parametrize(
    ("line", "msg"),
    [
        ("{oops", "invalid JSON"),
        ("[3]", "expected a JSON object"),
        ('{"target": 3, "strategy": "lp", "seed": 0}', "missing field 'n_interests'"),
        ('{"target": 3, "strategy": "popular", "seed": 0, "n_interests": 2}',
         "strategy must be one of lp/random"),
        ('{"target": 3, "strategy": "lp", "seed": 0, "n_interests": 0}',
         "n_interests must be in 1..25"),
        ('{"target": 3, "strategy": "lp", "seed": -1, "n_interests": 2}',
         "strategy seed must be non-negative"),
        ('{"target": "three", "strategy": "lp", "seed": 0, "n_interests": 2}', ""),
    ],
)
def test_batch_file_errors_name_the_line(tmp_path, line, msg):
    path = _write_batch(tmp_path, [
        '{"target": 3, "strategy": "lp", "seed": 0, "n_interests": 3}',
        line,
    ])
    with pytest.raises(DataFormatError, match=r"batch\.jsonl:2: " + msg):
        read_batch_file(path)


def test_empty_batch_file_is_an_error(tmp_path):
    path = tmp_path / "batch.jsonl"
    path.write_text("\n")
    with pytest.raises(DataFormatError, match="no campaign records"):
        read_batch_file(path)
    with pytest.raises(DataFormatError, match="not found"):
        read_batch_file(tmp_path / "absent.jsonl")


def test_outcomes_csv_layout():
    index, pop = _setup(toy3())
    outcomes = [
        run_campaign(index, pop, CampaignSpec(target=3, strategy=_lp(), n_interests=3)),
        run_campaign(index, pop, CampaignSpec(target=1, strategy=_lp(), n_interests=2)),
    ]
    text = outcomes_csv(outcomes)
    lines = text.splitlines()
    assert lines[0] == ",".join(OUTCOME_CSV_COLUMNS)
    assert lines[1] == "3,3,1,1000,true"
    assert lines[2] == "1,2,2,1000,false"
