import json

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from denscale.bench import ExperimentSpec, corrected_rand, run_experiment
from denscale.generators import (
    ConfigError,
    PlantedConfig,
    TwoScaleConfig,
    expected_edges,
    generate_planted,
    generate_two_scale,
    spectral_embedding,
)
from denscale.graph import Partition, partition_from_assignment


def test_rand_identity():
    p = partition_from_assignment([0, 0, 1, 2, 2])
    assert corrected_rand(p, p) == 1.0


def test_rand_hand_example():
    a = Partition.from_communities([[0, 1], [2, 3]])
    b = Partition.from_communities([[0, 2], [1, 3]])
    assert corrected_rand(a, b) == -0.5


def test_rand_degenerate():
    one = Partition((0, 0, 0))
    assert corrected_rand(one, one) == 1.0
    assert corrected_rand(one, Partition((0, 1, 2))) == 0.0


def test_rand_matches_sklearn(rng):
    for _ in range(50):
        n = int(rng.integers(2, 60))
        a = rng.integers(0, 5, size=n)
        b = rng.integers(0, 5, size=n)
        assert corrected_rand(a.tolist(), b.tolist()) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


def test_planted_probabilities():
    cfg = PlantedConfig(400, 4, 6, 2)
    assert cfg.p_in == pytest.approx(6 / 99)
    assert cfg.p_out == pytest.approx(2 / 300)
    assert PlantedConfig(20, 4, 1, 0).p_in == pytest.approx(0.25)


def test_planted_edge_count_within_four_sigma():
    cfg = PlantedConfig(400, 4, 6, 2, seed=7)
    mean, var = expected_edges(cfg)
    g, ref = generate_planted(cfg)
    assert abs(g.m - mean) <= 4 * var ** 0.5
    assert ref.community_count == 4


def test_planted_is_reproducible():
    a, _ = generate_planted(PlantedConfig(100, 2, 5, 1, seed=3))
    b, _ = generate_planted(PlantedConfig(100, 2, 5, 1, seed=3))
    c, _ = generate_planted(PlantedConfig(100, 2, 5, 1, seed=4))
    assert a == b and a != c


def test_planted_without_outside_edges():
    g, ref = generate_planted(PlantedConfig(40, 4, 3, 0, seed=1))
    assert all(ref.community_of[u] == ref.community_of[v] for u, v in g.edges)


@pytest.mark.parametrize("cfg", [PlantedConfig(10, 3, 1, 1), PlantedConfig(8, 4, 5, 1)])
def test_planted_config_errors(cfg):
    with pytest.raises(ConfigError):
        generate_planted(cfg)


def test_two_scale_probabilities_and_refs():
    cfg = TwoScaleConfig(1000, 6, 3, 1, seed=2)
    assert cfg.p_micro == pytest.approx(6 / 9)
    assert cfg.p_macro == pytest.approx(3 / 90)
    assert cfg.p_out == pytest.approx(1 / 900)
    g, macro, micro = generate_two_scale(cfg)
    assert macro.community_count == 10 and micro.community_count == 100
    assert micro.refines(macro)
    inside = sum(micro.community_of[u] == micro.community_of[v] for u, v in g.edges)
    assert inside / g.m > 0.5


def test_spectral_embedding_shape(barbell):
    s = spectral_embedding(barbell, dim=3)
    assert s.coords.shape == (6, 3)
    # the two triangles sit apart
    assert s.sq_distance(0, 1) < s.sq_distance(0, 5)


def test_spec_parse_and_dump():
    text = "generator = planted\nn = 40\nc = 2\nd_in = 5\nq_exp = 0.3\nreplicates = 2\nmethods = CM, BM, MP\n"
    spec = ExperimentSpec.parse(text)
    assert spec.methods == ("CM", "BM", "MP") and spec.n == 40
    assert ExperimentSpec.parse(spec.dump()) == spec


@pytest.mark.parametrize("text", ["n = 40\nc = 2\nd_in = 5\n", "bogus = 1\n", "methods = XX\nq_exp = 0.3\n"])
def test_spec_errors(text):
    with pytest.raises(ConfigError):
        ExperimentSpec.parse(text)


def test_small_experiment():
    spec = ExperimentSpec(n=60, c=3, d_in=5, q_exp=0.3, replicates=3, seed=11,
                          methods=("CM", "BM", "MM", "BP", "MP", "BS", "MS"))
    report = run_experiment(spec)
    assert report.dominance_violations == []
    assert {r.method for r in report.rows} == set(spec.methods)
    for row in report.rows:
        assert -1.0 <= row.ari["planted"] <= 1.0
    summary = report.summary()
    assert set(summary["methods"]) == set(spec.methods)
    assert json.loads(report.json())["spec"]["n"] == 60
    assert report.csv().splitlines()[0].startswith("replicate,")


def test_experiment_deterministic_across_workers():
    spec = ExperimentSpec(n=60, c=3, d_in=5, q_exp=0.3, replicates=2, seed=5, methods=("CM", "MM"))
    assert run_experiment(spec, workers=1).csv() == run_experiment(spec, workers=2).csv()


def test_two_scale_experiment_runs():
    spec = ExperimentSpec(generator="two-scale", n=200, macro=4, micro=5, d_in_micro=4, d_in_macro=2,
                          d_out=0.5, replicates=1, methods=("BM", "MM"), scales=2)
    report = run_experiment(spec)
    assert set(report.references) == {"macro", "micro"}
    assert np.isfinite(report.mean_ari("BM", "macro"))
