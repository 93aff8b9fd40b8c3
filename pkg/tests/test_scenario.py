import numpy as np
import pytest

from skilltask.iteration import FirmState, LearningConfig, loss_matching, run_until_converged
from skilltask.production import SkillVector, TaskValueVector, TaskVector, task_output
from skilltask.scenario import ScenarioSpec, apply_shock, generate_scenario, period_inputs


def test_generation_is_deterministic():
    spec = ScenarioSpec(3, 4, periods=10, shock_sigma=0.2, seed=123)
    a, b = generate_scenario(spec), generate_scenario(spec)
    assert a == b
    assert np.array_equal(a.base_tasks.quantities, b.base_tasks.quantities)
    for t in range(10):
        ta, sa, pa = period_inputs(a, t)
        tb, sb, pb = period_inputs(b, t)
        assert ta == tb and sa == sb and pa == pb


def test_different_seeds_differ():
    a = generate_scenario(ScenarioSpec(3, 3, seed=1))
    b = generate_scenario(ScenarioSpec(3, 3, seed=2))
    assert not np.array_equal(a.ideal.entries, b.ideal.entries)


def test_explicit_identity_ideal():
    spec = ScenarioSpec(2, 2, ideal_matrix=((1.0, 0.0), (0.0, 1.0)), skills=SkillVector.from_total([1, 1]))
    assert generate_scenario(spec).base_tasks.quantities.tolist() == [1.0, 1.0]


def test_base_tasks_match_independent_multiply():
    sc = generate_scenario(ScenarioSpec(3, 2, seed=42))
    x = sc.base_skills.total.tolist()
    a = sc.ideal.entries.tolist()
    expected = [sum(x[u] * a[u][v] for u in range(3)) for v in range(2)]
    assert sc.base_tasks.quantities == pytest.approx(expected, rel=1e-15)
    assert np.all((sc.ideal.entries >= 0.1) & (sc.ideal.entries <= 1.0))
    assert np.all((sc.base_skills.total >= 0.5) & (sc.base_skills.total <= 2.0))


def test_shock_zero_sigma_is_identity():
    y = TaskVector([1.0, 2.5])
    assert apply_shock(y, 0.0, np.random.default_rng(0)) is y


def test_shock_keeps_zero_vector():
    y = TaskVector([0.0, 0.0, 0.0])
    assert apply_shock(y, 0.7, np.random.default_rng(0)).quantities.tolist() == [0.0, 0.0, 0.0]


def test_shock_rejects_negative_sigma():
    with pytest.raises(ValueError):
        apply_shock(TaskVector([1.0]), -0.1, np.random.default_rng(0))


def test_period_shock_matches_reference_stream():
    seed, sigma = 2718, 0.1
    sc = generate_scenario(ScenarioSpec(2, 3, periods=8, shock_sigma=sigma, seed=seed))
    for t in (0, 3, 7):
        tasks, _, _ = period_inputs(sc, t)
        # same key path, drawn as exp(sigma * z) instead of through lognormal()
        ref = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1, t])))
        z = ref.standard_normal(3)
        expected = sc.base_tasks.quantities * np.exp(sigma * z)
        assert tasks.quantities == pytest.approx(expected, rel=1e-14)


def test_period_inputs_are_order_independent():
    sc = generate_scenario(ScenarioSpec(3, 3, periods=10, shock_sigma=0.3, seed=9))
    first = period_inputs(sc, 5)
    period_inputs(sc, 2)
    again = period_inputs(sc, 5)
    assert first[0] == again[0] and first[1] == again[1] and first[2] == again[2]


def test_zero_sigma_periods_return_base_values():
    sc = generate_scenario(ScenarioSpec(2, 2, periods=4, seed=3))
    for t in range(4):
        tasks, skills, _ = period_inputs(sc, t)
        assert tasks == sc.base_tasks and skills == sc.base_skills


def test_constant_and_per_period_prices():
    sc = generate_scenario(ScenarioSpec(1, 1, periods=5, price=2.5))
    assert {period_inputs(sc, t)[2] for t in range(5)} == {2.5}
    sc = generate_scenario(ScenarioSpec(1, 1, periods=3, price=(1.0, 2.0, 3.0)))
    assert [period_inputs(sc, t)[2] for t in range(3)] == [1.0, 2.0, 3.0]


def test_period_out_of_range():
    sc = generate_scenario(ScenarioSpec(1, 1, periods=3))
    with pytest.raises(IndexError):
        period_inputs(sc, 3)
    with pytest.raises(IndexError):
        period_inputs(sc, -1)


def test_skill_path_overrides_supply():
    path = (SkillVector.from_total([1.0]), SkillVector.from_total([2.0]))
    sc = generate_scenario(ScenarioSpec(1, 1, periods=2, skill_path=path))
    assert period_inputs(sc, 1)[1] == path[1]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(skills_dim=0, tasks_dim=1),
        dict(skills_dim=1, tasks_dim=0),
        dict(skills_dim=1, tasks_dim=1, periods=0),
        dict(skills_dim=1, tasks_dim=1, shock_sigma=-1.0),
        dict(skills_dim=1, tasks_dim=1, price=0.0),
        dict(skills_dim=1, tasks_dim=1, periods=2, price=(1.0,)),
        dict(skills_dim=1, tasks_dim=1, expected_quantity=0.0),
        dict(skills_dim=1, tasks_dim=1, seed=-1),
        dict(skills_dim=1, tasks_dim=1, seed=2**64),
        dict(skills_dim=2, tasks_dim=1, ideal_matrix=((1.0,),)),
        dict(skills_dim=1, tasks_dim=1, ideal_matrix=((-1.0,),)),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ScenarioSpec(**kwargs)


def test_initial_values_price_the_plan():
    sc = generate_scenario(ScenarioSpec(3, 4, price=2.0, expected_quantity=5.0, seed=1))
    lam = sc.initial_values()
    assert float(lam.values @ sc.base_tasks.quantities) == pytest.approx(10.0, rel=1e-14)


def test_firm_at_ideal_has_zero_matching_loss_every_period():
    sc = generate_scenario(ScenarioSpec(3, 2, periods=20, seed=77))
    for t in range(20):
        tasks, skills, _ = period_inputs(sc, t)
        assert loss_matching(task_output(skills, sc.ideal), tasks) == 0.0
    trace = run_until_converged(FirmState(0, sc.ideal, TaskValueVector([3.0, -1.0])), sc, LearningConfig())
    assert trace.converged and trace.converged_period == 0


def test_shocked_tasks_never_negative():
    sc = generate_scenario(ScenarioSpec(2, 5, periods=200, shock_sigma=2.0, seed=4))
    for t in range(200):
        assert np.all(period_inputs(sc, t)[0].quantities >= 0)
