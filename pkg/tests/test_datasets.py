import math

import numpy as np
import pytest

from weightcaster.datasets import (Affine, LabeledDataset, OosSplit, SplitRule, cosine_target, denormalize,
                                   gen_cosine, ingest_airquality, load_split, normalize, read_airquality_columns,
                                   read_dataset_csv, save_split, write_dataset_csv)
from weightcaster.errors import DataError
from weightcaster.numkit import Rng

import aq_fixture


class TestCosine:
    def test_target_values(self):
        assert cosine_target(0.0) == 1.0
        assert cosine_target(math.pi / 10) == pytest.approx(-1 + math.pi / 20, abs=1e-15)
        assert cosine_target(math.pi / 10) == pytest.approx(-0.8429, abs=1e-4)

    def test_split_geometry(self):
        s = gen_cosine(2000, 500, Rng(7))
        assert len(s.train) == 2000 and len(s.test) == 500
        assert np.abs(s.train.X).max() <= 1.5 < np.abs(s.test.X).min()
        assert np.abs(s.test.X).max() <= 3.0
        assert (s.test.X < 0).sum() == 250
        s.check_disjoint()

    def test_noise_level(self):
        s = gen_cosine(2000, 500, Rng(11))
        resid = s.train.Y[:, 0] - cosine_target(s.train.X[:, 0])
        assert 1.5e-5 <= resid.var() <= 3.5e-5

    def test_deterministic(self):
        a, b = gen_cosine(50, 10, Rng(3)), gen_cosine(50, 10, Rng(3))
        np.testing.assert_array_equal(a.train.X, b.train.X)
        np.testing.assert_array_equal(a.test.Y, b.test.Y)


class TestNormalization:
    def test_identity(self):
        data = np.array([[1.0], [2.0]])
        np.testing.assert_array_equal(normalize(data, Affine.identity(1)), data)

    def test_roundtrip(self, nprng):
        data = nprng.standard_normal((100, 3)) * 1e3 + 7
        meta = Affine(nprng.standard_normal(3), nprng.uniform(0.1, 10, 3))
        back = denormalize(normalize(data, meta), meta)
        assert np.max(np.abs(back - data) / np.abs(data)) < 1e-12

    def test_zscore(self, nprng):
        data = nprng.standard_normal((500, 2)) * 40 + 900
        z = normalize(data, Affine.zscore(data))
        assert np.all(np.abs(z.mean(axis=0)) < 1e-10)
        assert np.all(np.abs(z.var(axis=0) - 1) < 1e-10)

    def test_zero_scale(self):
        with pytest.raises(DataError):
            Affine([0.0], [0.0])
        with pytest.raises(DataError):
            Affine.zscore(np.ones((5, 1)))


class TestAirQuality:
    def test_sentinel_row_dropped(self, tmp_path):
        p = tmp_path / "aq.csv"
        aq_fixture.write_rows(p, [(1000.0, 900.5), (-200.0, 800.0), (1100.0, 700.25)])
        x, y = read_airquality_columns(str(p))
        np.testing.assert_array_equal(x, [1000.0, 1100.0])
        np.testing.assert_array_equal(y, [900.5, 700.25])

    def test_nox_sentinel_and_garbage(self, tmp_path):
        p = tmp_path / "aq.csv"
        aq_fixture.write_rows(p, [(1000.0, -200.0), (1200.0, 600.0)])
        with open(p, "a") as fh:
            fh.write(aq_fixture.row(1300.0, 500.0).replace("1300", "n/a") + "\n")
        x, _ = read_airquality_columns(str(p))
        assert list(x) == [1200.0]

    def test_decimal_comma(self, tmp_path):
        p = tmp_path / "aq.csv"
        aq_fixture.write_rows(p, [(1000.5, 10.25)])
        x, y = read_airquality_columns(str(p))
        assert x[0] == 1000.5 and y[0] == 10.25

    def test_split(self, tmp_path):
        p = tmp_path / "aq.csv"
        aq_fixture.write_rows(p, aq_fixture.synthetic_pairs(800, seed=2))
        s = ingest_airquality(str(p))
        assert np.all(s.test.X > 1.0) and np.all(s.train.X <= 1.0)
        allx = np.vstack([s.train.X, s.test.X])
        ally = np.vstack([s.train.Y, s.test.Y])
        assert abs(allx.mean()) < 1e-10 and abs(allx.std() - 1) < 1e-10
        assert abs(ally.mean()) < 1e-10 and abs(ally.std() - 1) < 1e-10
        raw_x, _ = read_airquality_columns(str(p))
        back = np.sort(denormalize(allx, s.train.normalization.x)[:, 0])
        np.testing.assert_allclose(back, np.sort(raw_x), rtol=1e-12)

    def test_deterministic(self, tmp_path):
        p = tmp_path / "aq.csv"
        aq_fixture.write_rows(p, aq_fixture.synthetic_pairs(300, seed=4))
        a, b = ingest_airquality(str(p)), ingest_airquality(str(p))
        np.testing.assert_array_equal(a.train.X, b.train.X)
        np.testing.assert_array_equal(a.test.Y, b.test.Y)

    def test_errors(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            ingest_airquality(str(tmp_path / "missing.csv"))
        p = tmp_path / "bad.csv"
        p.write_text("Date;Time;CO(GT)\n1;2;3\n")
        with pytest.raises(DataError, match="missing required column"):
            ingest_airquality(str(p))
        p2 = tmp_path / "allmissing.csv"
        aq_fixture.write_rows(p2, [(-200.0, 5.0), (4.0, -200.0)])
        with pytest.raises(DataError, match="no usable rows"):
            ingest_airquality(str(p2))


class TestSplitFiles:
    def test_disjointness_enforced(self):
        tr = LabeledDataset([[0.0], [2.0]], [[0.0], [0.0]])
        te = LabeledDataset([[1.5]], [[0.0]])
        with pytest.raises(DataError, match="overlap"):
            OosSplit(tr, te, SplitRule(0, 1.0))

    def test_csv_roundtrip(self, tmp_path, nprng):
        ds = LabeledDataset(nprng.standard_normal((20, 2)), nprng.standard_normal((20, 1)))
        write_dataset_csv(ds, tmp_path / "d.csv")
        back = read_dataset_csv(str(tmp_path / "d.csv"))
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.Y, ds.Y)
        assert (tmp_path / "d.csv").read_text().splitlines()[0] == "x0,x1,y"

    def test_save_load(self, tmp_path):
        s = gen_cosine(30, 10, Rng(0))
        save_split(s, str(tmp_path), "cosine")
        tr, te, meta = load_split(str(tmp_path))
        np.testing.assert_array_equal(tr.X, s.train.X)
        assert meta["dataset"] == "cosine" and meta["n_test"] == 10

    def test_bad_csv_line(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(DataError, match=":3:"):
            read_dataset_csv(str(p))

    def test_nan_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset([[np.nan]], [[0.0]])
