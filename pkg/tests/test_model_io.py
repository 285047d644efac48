"""Model persistence: exact round trips and corruption handling."""

import numpy as np
import pytest

from mtdprobe.errors import ModelFormatError
from mtdprobe.learn.model import DetectionModel, load_model, save_model


def make_model(rng):
    sizes = [6, 5, 2, 5, 6]
    weights = [(rng.normal(size=(a, b)), rng.normal(size=b))
               for a, b in zip(sizes[:-1], sizes[1:])]
    return DetectionModel(
        dimension_names=[f"d{i}" for i in range(6)],
        normalizer_mean=rng.normal(size=6),
        normalizer_scale=np.abs(rng.normal(size=6)) + 0.5,
        layer_sizes=sizes,
        weights=weights,
        latent_dim=2,
        centers=rng.normal(size=(2, 2)),
        k=2,
        metadata={"epochs": 10, "seed": 1, "loss_curve": [1.0, 0.5]},
    )


def test_round_trip_bit_exact(tmp_path):
    model = make_model(np.random.default_rng(0))
    p1 = tmp_path / "m1.json"
    p2 = tmp_path / "m2.json"
    save_model(model, p1)
    loaded = load_model(p1)
    save_model(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    for (W1, b1), (W0, b0) in zip(loaded.weights, model.weights):
        np.testing.assert_array_equal(W1, W0)
        np.testing.assert_array_equal(b1, b0)
    np.testing.assert_array_equal(loaded.centers, model.centers)
    np.testing.assert_array_equal(loaded.normalizer_mean, model.normalizer_mean)
    assert loaded.dimension_names == model.dimension_names


def test_truncated_file_aborts(tmp_path):
    model = make_model(np.random.default_rng(1))
    path = tmp_path / "m.json"
    save_model(model, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ModelFormatError, match="unreadable"):
        load_model(path)


def test_version_mismatch_aborts(tmp_path):
    model = make_model(np.random.default_rng(2))
    path = tmp_path / "m.json"
    save_model(model, path)
    text = path.read_text().replace('"format_version":1', '"format_version":99')
    path.write_text(text)
    with pytest.raises(ModelFormatError, match="version"):
        load_model(path)


def test_shape_corruption_aborts(tmp_path):
    model = make_model(np.random.default_rng(3))
    model.centers = np.zeros((3, 2))  # claims k=2 but carries 3 centers
    with pytest.raises(ModelFormatError, match="centers"):
        save_model(model, tmp_path / "m.json")


def test_missing_key_aborts(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"format_version": 1, "k": 2}')
    with pytest.raises(ModelFormatError, match="malformed"):
        load_model(path)
