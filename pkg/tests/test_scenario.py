import json
import math

import pytest

from bridgenet.graph import round9
from bridgenet.rng import SplitMix64
from bridgenet.scenario import (
    DEFAULT_AGENT_STARTS,
    SCENARIO_FIELDS,
    ScenarioConfig,
    generate,
    place_targets,
    read_scenarios,
    sample_target_move,
    write_scenarios,
)


def test_defaults_match_documented_setup():
    cfg = ScenarioConfig(seed=1)
    assert cfg.n_agents == 3
    assert cfg.comm_range == 0.25
    assert cfg.step_size == 0.05
    assert cfg.horizon == 100
    assert (cfg.target_dist_min, cfg.target_dist_max) == (0.5, 0.7)
    assert cfg.agent_starts == ((0.1, 0.42), (0.1, 0.52), (0.1, 0.62))
    assert cfg.obs_stack_depth == 3
    assert cfg.discount == 1.0


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"seed": -1}, "seed"),
        ({"seed": 2**64}, "seed"),
        ({"n_agents": 0}, "n_agents"),
        ({"comm_range": 0.0}, "comm_range"),
        ({"step_size": -0.05}, "step_size"),
        ({"horizon": 0}, "horizon"),
        ({"target_dist_min": 0.0}, "target_dist_min"),
        ({"target_dist_min": 0.8, "target_dist_max": 0.7}, "target_dist_min"),
        ({"agent_starts": ((0.1, 0.1),)}, "agent_starts"),
        ({"agent_starts": ((0.1, 0.1), (0.2, 0.2), (1.2, 0.5))}, "outside"),
        ({"obs_stack_depth": 0}, "obs_stack_depth"),
        ({"discount": 1.0001}, "discount"),
    ],
)
def test_config_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        ScenarioConfig(seed=kwargs.pop("seed", 1), **kwargs)


def test_place_targets_respects_distance_band():
    cfg = ScenarioConfig(seed=0)
    for seed in range(300):
        t1, t2 = place_targets(SplitMix64(seed), cfg)
        assert 0.5 <= math.dist(t1, t2) <= 0.7
        for x, y in (t1, t2):
            assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0


def test_place_targets_deterministic():
    cfg = ScenarioConfig(seed=0)
    assert place_targets(SplitMix64(99), cfg) == place_targets(SplitMix64(99), cfg)


def test_place_targets_draw_order_is_x1_y1_x2_y2():
    cfg = ScenarioConfig(seed=0, target_dist_min=1e-6, target_dist_max=1.4142)
    # with an all-accepting band the first attempt is taken verbatim
    gen = SplitMix64(5)
    draws = [round9(gen.next_float()) for _ in range(4)]
    t1, t2 = place_targets(SplitMix64(5), cfg)
    assert (t1, t2) == ((draws[0], draws[1]), (draws[2], draws[3]))


def test_place_targets_unsatisfiable_band_errors():
    cfg = ScenarioConfig(seed=0, target_dist_min=math.sqrt(2) * 1.01,
                         target_dist_max=math.sqrt(2) * 1.01)
    with pytest.raises(ValueError, match="unsatisfiable"):
        place_targets(SplitMix64(0), cfg)


def test_target_moves_preserve_constraint_and_bounds():
    cfg = ScenarioConfig(seed=0)
    rng = SplitMix64(12)
    t1, t2 = place_targets(rng, cfg)
    for _ in range(500):
        t1, t2 = sample_target_move(rng, t1, t2, cfg)
        assert 0.5 <= math.dist(t1, t2) <= 0.7
        for x, y in (t1, t2):
            assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0


def test_target_moves_clamp_at_map_edge():
    # both targets on the boundary; every outward move component clamps
    cfg = ScenarioConfig(seed=0)
    rng = SplitMix64(3)
    t1, t2 = (0.0, 0.0), (0.6, 0.0)
    for _ in range(200):
        t1, t2 = sample_target_move(rng, t1, t2, cfg)
        for x, y in (t1, t2):
            assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0


def test_target_moves_deterministic():
    cfg = ScenarioConfig(seed=0)

    def run(seed):
        rng = SplitMix64(seed)
        t1, t2 = place_targets(rng, cfg)
        return [sample_target_move(rng, t1, t2, cfg) for _ in range(50)]

    assert run(21) == run(21)


def test_generate_reproducible_and_distinct():
    assert generate(42, 100) == generate(42, 100)
    seeds = {c.seed for c in generate(42, 10_000)}
    assert len(seeds) == 10_000


def test_generate_respects_template():
    template = ScenarioConfig(seed=0, comm_range=0.4, horizon=10)
    batch = generate(3, 5, template)
    assert all(c.comm_range == 0.4 and c.horizon == 10 for c in batch)
    assert len({c.seed for c in batch}) == 5


def test_generate_rejects_empty_batch():
    with pytest.raises(ValueError, match="count"):
        generate(1, 0)


def test_batch_gives_valid_placements():
    cfg = ScenarioConfig(seed=0)
    for c in generate(11, 100):
        t1, t2 = place_targets(SplitMix64(c.seed), cfg)
        assert 0.5 <= math.dist(t1, t2) <= 0.7


def test_scenario_file_round_trip(tmp_path):
    path = tmp_path / "batch.jsonl"
    batch = generate(9, 20)
    write_scenarios(path, batch)
    assert read_scenarios(path) == batch
    first = path.read_bytes()
    write_scenarios(path, batch)
    assert path.read_bytes() == first


def test_scenario_file_field_names_are_the_contract(tmp_path):
    path = tmp_path / "batch.jsonl"
    write_scenarios(path, generate(9, 1))
    record = json.loads(path.read_text().splitlines()[0])
    assert tuple(record.keys()) == SCENARIO_FIELDS


def test_scenario_file_rejects_unknown_field(tmp_path):
    path = tmp_path / "bad.jsonl"
    record = json.loads(json.dumps({f: 1 for f in SCENARIO_FIELDS}))
    record["speed"] = 3
    path.write_text(json.dumps(record) + "\n")
    with pytest.raises(ValueError, match="unknown fields.*speed"):
        read_scenarios(path)


def test_scenario_file_rejects_missing_field(tmp_path):
    path = tmp_path / "bad.jsonl"
    record = {f: 1 for f in SCENARIO_FIELDS}
    record.pop("horizon")
    path.write_text(json.dumps(record) + "\n")
    with pytest.raises(ValueError, match="missing fields.*horizon"):
        read_scenarios(path)


def test_scenario_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("not json\n")
    with pytest.raises(ValueError, match="invalid scenario record"):
        read_scenarios(path)


def test_empty_scenario_file_rejected(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(ValueError, match="no scenario records"):
        read_scenarios(path)
