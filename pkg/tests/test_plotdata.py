import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from serialdep.plotdata import PlotData, adcf_plot_data
from serialdep.resampling import subsample_band, wild_bootstrap_band
from serialdep.simulation import generate
from serialdep.timeseries import acf, adcf, adcf_matrix


class TestUnivariate:
    def test_records_match_components(self, rng):
        x = rng.standard_normal(120)
        plot = adcf_plot_data(x, max_lag=4, B=30, seed=2, block=12)
        assert [r["lag"] for r in plot.records] == [1, 2, 3, 4]
        simult = wild_bootstrap_band(x, 4, B=30, seed=2)
        for r in plot.records:
            j = r["lag"]
            assert r["adcf"] == pytest.approx(adcf(x, j), rel=1e-10)
            assert r["acf"] == pytest.approx(acf(x, j))
            assert r["acf_band"] == pytest.approx(1.959963984540054 / math.sqrt(120))
            assert r["pairwise_band"] == pytest.approx(subsample_band(x, j, 12, scale="adcf"), rel=1e-10)
            assert r["simultaneous_band"] == pytest.approx(simult[0], rel=1e-12)
            assert r["block"] == 12

    def test_block_selected_from_candidates(self, rng):
        x = rng.standard_normal(300)
        plot = adcf_plot_data(x, max_lag=3, B=10, candidates=[6, 9, 12, 15])
        assert all(r["block"] in (6, 9, 12, 15) for r in plot.records)

    def test_no_simultaneous(self, rng):
        plot = adcf_plot_data(rng.standard_normal(80), max_lag=2, B=5, simultaneous=False)
        assert all(math.isnan(r["simultaneous_band"]) for r in plot.records)
        assert '"simultaneous_band": null' in plot.to_json_string()

    def test_constant_series(self):
        plot = adcf_plot_data(np.ones(60), max_lag=2, B=5, block=10)
        assert all(r["adcf"] == 0.0 and r["acf"] == 0.0 and r["pairwise_band"] == 0.0 for r in plot.records)

    def test_default_lags(self, rng):
        assert len(adcf_plot_data(rng.standard_normal(100), B=3, block=10).records) == 20

    def test_errors(self, rng):
        x = rng.standard_normal(30)
        with pytest.raises(ValueError):
            adcf_plot_data(x, max_lag=29, B=5)
        with pytest.raises(ValueError):
            adcf_plot_data(x, max_lag=3, B=5, block=28)
        with pytest.raises(ValueError):
            adcf_plot_data(x, max_lag=3, B=5, level=1.5)
        with pytest.raises(ValueError):
            adcf_plot_data(x, max_lag=3, B=5, candidates=[4, 5])

    def test_nma2_pattern(self):
        x = generate("nma2", 2000, [2018, 99])
        plot = adcf_plot_data(x, max_lag=15, B=99, seed=1)
        above = [r["adcf"] > r["pairwise_band"] for r in plot.records]
        assert above[0] and above[1]
        assert sum(above[2:]) <= 3


class TestMultivariate:
    def test_records(self, rng):
        x = rng.standard_normal((100, 2))
        plot = adcf_plot_data(x, max_lag=3, B=10, block=10, labels=["a", "b"])
        assert len(plot.records) == 3 * 4
        keys = [(r["lag"], r["row"], r["col"]) for r in plot.records]
        assert keys == sorted(keys)
        r = next(r for r in plot.records if (r["lag"], r["row"], r["col"]) == (2, 0, 1))
        assert r["adcf"] == pytest.approx(adcf_matrix(x, 2)[0, 1], rel=1e-10)
        assert plot.meta["labels"] == ["a", "b"]
        assert plot.fields[:3] == ("lag", "row", "col")


class TestRoundTrip:
    @pytest.mark.parametrize("shape", [(80,), (80, 2)])
    def test_json_csv(self, tmp_path, rng, shape):
        plot = adcf_plot_data(rng.standard_normal(shape), max_lag=3, B=8, block=10, simultaneous=len(shape) == 1)
        plot.to_json(tmp_path / "p.json")
        plot.to_csv(tmp_path / "p.csv")
        for back in (PlotData.from_json(tmp_path / "p.json"), PlotData.from_csv(tmp_path / "p.csv")):
            assert len(back.records) == len(plot.records)
            for a, b in zip(plot.records, back.records):
                assert a.keys() == b.keys()
                for k in a:
                    if isinstance(a[k], float) and math.isnan(a[k]):
                        assert math.isnan(b[k])
                    else:
                        assert b[k] == a[k]
        assert PlotData.from_json(tmp_path / "p.json").meta == plot.meta

    def test_schema_checked(self, tmp_path):
        (tmp_path / "p.json").write_text('{"schema_version": 99, "records": []}')
        with pytest.raises(ValueError):
            PlotData.from_json(tmp_path / "p.json")
