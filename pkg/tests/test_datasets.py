import pytest

from tiltfuse import DataError, Label
from tiltfuse.datasets import BUNDLED, load_bundled


def test_wine_shape():
    wine = load_bundled("wine")
    assert wine.n_samples == 129 and wine.n_features == 13
    assert int((wine.labels == Label.ANOMALOUS).sum()) == 10


def test_breast_shape():
    breast = load_bundled("breast")
    assert breast.n_samples == 378 and breast.n_features == 30
    assert int((breast.labels == Label.ANOMALOUS).sum()) == 21


def test_every_bundled_name_loads():
    for name in BUNDLED:
        ds = load_bundled(name)
        assert ds.labels is not None and ds.n_samples > 0


def test_unknown_name():
    with pytest.raises(DataError, match="bundled"):
        load_bundled("mnist")
