import numpy as np
import pytest

import asc_prune as asc


@pytest.fixture(scope="module")
def planted():
    return asc.gen_model(layers=6, hidden=32, heads=4, ffn=64, vocab=100, identity={2, 3}, seed=3)


@pytest.fixture(scope="module")
def data():
    return asc.gen_dataset(40, 8, 16, 100, seed=2)


def test_analyze_returns_symmetric_matrix(planted, data):
    sim = asc.analyze(planted, data, workers=2)
    v = sim.values
    assert v.shape == (7, 7)
    assert np.array_equal(v, v.T)
    assert np.all(np.diag(v) == 1.0)
    assert sim.token_count == sum(len(s) for s in data)


def test_planted_block_is_pruned_without_loss(planted, data):
    p = asc.plan(asc.analyze(planted, data), 0.999)
    assert p.redundant_layers == [2, 3]
    assert p.anchors == [(1, 3)]
    pruned = asc.apply_plan(planted, p)
    assert pruned.num_layers == 4
    assert pruned.layer_ids == [1, 4, 5, 6]
    report = asc.compare_models(planted, pruned, asc.gen_dataset(20, 4, 10, 100, seed=9))
    assert report["mean_cosine"] >= 0.999999
    seq = [5, 17, 42]
    assert np.array_equal(asc.forward(planted, seq), asc.forward(pruned, seq))


def test_hand_matrix_plan():
    sim = asc.SimilarityMatrix(
        np.array(
            [
                [1.00, 0.95, 0.80, 0.30],
                [0.95, 1.00, 0.95, 0.50],
                [0.80, 0.95, 1.00, 0.92],
                [0.30, 0.50, 0.92, 1.00],
            ]
        )
    )
    p = asc.plan(sim, 0.9)
    assert p.redundant_layers == [1, 3]
    assert asc.PrunePlan.from_json(p.to_json()) == p
    assert asc.SimilarityMatrix.from_csv(sim.to_csv()).fingerprint() == sim.fingerprint()
    with pytest.raises(asc.ValidationError):
        asc.plan(sim, 1.5)


def test_random_plan_and_model_file(tmp_path):
    model = asc.gen_model(layers=12, hidden=16, heads=2, ffn=32, vocab=50, seed=1)
    p = asc.plan_random(12, 6, 42)
    assert p.mode == "random" and len(p.redundant_layers) == 6
    pruned = asc.apply_plan(model, p)
    path = tmp_path / "pruned.ascm"
    pruned.save(path)
    back = asc.load_model(path)
    assert back.to_bytes() == pruned.to_bytes()
    assert asc.Model.from_bytes(back.to_bytes()).layer_ids == pruned.layer_ids


def test_errors_are_typed(tmp_path):
    with pytest.raises(asc.IoError):
        asc.load_model(tmp_path / "missing.ascm")
    with pytest.raises(asc.FormatError):
        asc.Model.from_bytes(b"not a model")
    with pytest.raises(asc.ParseError):
        asc.SimilarityMatrix.from_csv("garbage\n")
