import numpy as np
import pytest

from src.behaviour import StepContext, step_cognitive
from src.models import make_act
from src.scenarios import build_epidemic, infection_step
from src.scenarios.epidemic import ALERT, CONSULT, REPORT, infected_by_round
from src.scheduler import run
from src.schemas.acts import Assertion, Performative
from src.schemas.effects import Message, OutboundDiffusion
from src.schemas.scenario import ContaminantSpec, DoctorSpec, EpidemicConfig, IndividualSpec
from tests.epidemic_oracle import oracle_infections


def _config(p=0.5, seed=7, radius=1, individuals=None, **extra):
    return EpidemicConfig(
        seed=seed,
        width=5,
        height=5,
        contaminants=[ContaminantSpec(id="c1", position=(2, 2), disease="flu")],
        individuals=individuals
        or [IndividualSpec(id="i1", position=(2, 3)), IndividualSpec(id="i2", position=(4, 4))],
        doctors=[DoctorSpec(id="doc1", region="north")],
        infection_probability=p,
        proximity_radius=radius,
        **extra,
    )


def _random_config(seed):
    rng = np.random.default_rng(seed)
    cells = rng.permutation(25)[:5]
    positions = [(int(c) % 5, int(c) // 5) for c in cells]
    n_contaminants = int(rng.integers(1, 3))
    return EpidemicConfig(
        seed=seed,
        width=5,
        height=5,
        contaminants=[
            ContaminantSpec(id=f"c{n}", position=positions[n], disease="flu") for n in range(n_contaminants)
        ],
        individuals=[IndividualSpec(id=f"i{n}", position=positions[n]) for n in range(n_contaminants, 5)],
        doctors=[DoctorSpec(id="doc1", region="north")],
        infection_probability=float(rng.choice([0.3, 0.5, 0.8])),
        proximity_radius=int(rng.integers(1, 3)),
    )


def test_no_infections_when_probability_is_zero():
    trace = run(build_epidemic(_config(p=0.0)), 30)
    assert infected_by_round(trace)[29] == []
    assert not any(r.kind == "delivered" and r.act.mtype.code == CONSULT for r in trace)


def test_only_neighbours_are_infected():
    world = build_epidemic(_config(p=1.0))
    grid = world.environment.context["grid"]
    changes = grid.contaminate(world.environment, 0, "c1")
    assert [(c.agent, c.source, c.value) for c in changes] == [("i1", "c1", "flu")]


def test_nobody_in_radius():
    world = build_epidemic(_config(p=1.0, individuals=[IndividualSpec(id="i1", position=(0, 0))]))
    grid = world.environment.context["grid"]
    assert grid.contaminate(world.environment, 0, "c1") == []


def test_infection_step_moves_then_infects():
    world = build_epidemic(_config(p=1.0, radius=2))
    new = infection_step(world)
    assert ("i1", "c1", "flu") in new
    x, y = world.environment.get("c1", "position")
    assert abs(x - 2) <= 1 and abs(y - 2) <= 1


def test_default_config_matches_oracle():
    cfg = _config()
    trace = run(build_epidemic(cfg), 20)
    assert infected_by_round(trace) == oracle_infections(cfg, 20)


@pytest.mark.parametrize("seed", range(100))
def test_random_configs_match_oracle(seed):
    cfg = _random_config(seed)
    trace = run(build_epidemic(cfg), 20)
    assert infected_by_round(trace) == oracle_infections(cfg, 20)


def test_infected_set_only_grows():
    per_round = infected_by_round(run(build_epidemic(_config(p=0.8, seed=3)), 25))
    for r in range(1, 25):
        assert set(per_round[r - 1]) <= set(per_round[r])


def test_every_infection_reaches_a_doctor_within_two_rounds():
    trace = run(build_epidemic(_config(p=0.8, seed=5, radius=2)), 25)
    infected_at = {}
    for record in trace:
        if record.kind == "env" and record.key == "contaminated" and record.source is not None:
            infected_at[record.agent] = record.round
    assert infected_at
    consults = {
        r.act.sender: r.round
        for r in trace
        if r.kind == "delivered" and r.act.performative == Performative.ASK and r.act.mtype.code == CONSULT
    }
    for agent, r in infected_at.items():
        if r <= 22:
            assert consults[agent] == r + 2


def test_consultation_chain_is_conformant():
    world = build_epidemic(_config(p=1.0, radius=2))
    trace = run(world, 12)
    performatives = [(r.act.sender, r.act.performative.value) for r in trace if r.kind == "delivered"]
    assert ("i1", "ask") in performatives
    assert ("doc1", "accept") in performatives
    assert ("doc1", "inform") in performatives
    assert ("authority", "confirm") in performatives
    assert not world.nonconformant


def _authority(k=3, w=5):
    world = build_epidemic(_config(detection_threshold=k, detection_window=w))
    return world.system.agents["authority"]


def _report(round):
    act = make_act("inform", "doc1", "authority", REPORT, Assertion(key="north", value="flu"), f"doc1.{round}")
    return Message(act=act.model_copy(update={"round": round}))


def _alert_rounds(report_rounds, k=3, w=5):
    agent = _authority(k, w)
    managers = {}
    alerts = []
    for r in report_rounds:
        effects = step_cognitive(agent, [_report(r)], StepContext(round=r, managers=managers))
        if any(isinstance(e, OutboundDiffusion) and e.template.mtype.code == ALERT for e in effects):
            alerts.append(r)
    return alerts


def test_alert_on_third_report_in_window():
    assert _alert_rounds([1, 2, 4]) == [4]


def test_no_alert_when_reports_fall_out_of_window():
    assert _alert_rounds([1, 2, 9]) == []


def test_alert_fires_once_per_region():
    assert _alert_rounds([1, 2, 3, 4, 5]) == [3]


def test_unknown_disease_is_not_counted():
    agent = _authority()
    managers = {}
    for r in (1, 2, 3):
        act = make_act("inform", "doc1", "authority", REPORT, Assertion(key="north", value="pox"), f"doc1.{r}")
        effects = step_cognitive(agent, [Message(act=act)], StepContext(round=r, managers=managers))
        assert not any(isinstance(e, OutboundDiffusion) for e in effects)
    assert "cases.north" not in managers["authority"].system_model


def test_two_tier_authority_forwards_reports():
    world = build_epidemic(_config(p=1.0, radius=2, authority_tiers=2))
    trace = run(world, 12)
    forwarded = [r for r in trace if r.kind == "delivered" and r.act.sender == "regional" and r.act.receiver == "national"]
    assert forwarded
    assert forwarded[0].act.payload == Assertion(key="north", value="flu")
