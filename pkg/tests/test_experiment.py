import csv
import json
import math

import numpy as np
import pytest

from paprlab import cli
from paprlab.experiment import (
    CURVE_HEADER,
    TABLE_HEADER,
    ExperimentConfig,
    curve_name,
    emit_results,
    process_symbol,
    run_experiment,
)
from paprlab.ofdm import papr_db, random_symbol
from paprlab.schemes import SchemeConfig, pipeline, process, reduce


def small_config(tmp_path, schemes, **kw):
    base = dict(n_carriers=64, oversample=4, n_symbols=60, rng_seed=5, output_path=str(tmp_path), ccdf_target=0.05)
    base.update(kw)
    return ExperimentConfig(schemes=schemes, **base)


ALL = [
    SchemeConfig("none"),
    SchemeConfig("clip", a_db=4.0),
    SchemeConfig("rcf", a_db=4.0, v=3),
    SchemeConfig("scf", a_db=4.0, v=3),
    SchemeConfig("cpc", a_db=4.0),
    SchemeConfig("alg1", a_db=4.0),
    SchemeConfig("alg2", a_db=4.0),
]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSchemeConfig:
    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            SchemeConfig("slm")

    def test_labels_and_defaults(self):
        assert SchemeConfig("rcf", v=5).label == "rcf_v5"
        assert SchemeConfig("scf").label == "scf_v100"
        assert SchemeConfig("alg1").window_length(1024, 4) == 1024
        assert SchemeConfig("alg1", n_s=64).window_length(1024, 4) == 64

    @pytest.mark.parametrize(
        "cfg,expected",
        [
            (SchemeConfig("none"), 1),
            (SchemeConfig("alg1"), 1),
            (SchemeConfig("alg2"), 1),
            (SchemeConfig("cpc"), 1),
            (SchemeConfig("scf", v=100), 3),
            (SchemeConfig("rcf", v=1), 1),
            (SchemeConfig("rcf", v=3), 5),
            (SchemeConfig("rcf", v=5), 9),
        ],
    )
    def test_ifft_counts(self, cfg, expected):
        sym = random_symbol(np.random.default_rng(0), 64, 4)[0]
        assert reduce(cfg, sym, 0).ifft_count == expected


def test_process_restores_mean_power_and_band():
    sym = random_symbol(np.random.default_rng(1), 64, 4)[0]
    res = process(SchemeConfig("cpc", a_db=3.0), sym, 0)
    assert np.mean(np.abs(res.output) ** 2) == pytest.approx(np.mean(np.abs(res.reference) ** 2), rel=1e-12)
    spec = np.fft.fft(res.output)
    assert np.max(np.abs(spec[~sym.mask])) < 1e-10 * np.max(np.abs(spec))


def test_pipeline_draws_a_fresh_order_per_call():
    sym = random_symbol(np.random.default_rng(2), 64, 4)[0]
    run = pipeline(SchemeConfig("alg2", a_db=2.0), rng_seed=4)
    assert not np.array_equal(run(sym), run(sym))
    again = pipeline(SchemeConfig("alg2", a_db=2.0), rng_seed=4)
    assert np.array_equal(again(sym), pipeline(SchemeConfig("alg2", a_db=2.0), rng_seed=4)(sym))


class TestRunExperiment:
    def test_files_and_line_counts(self, tmp_path):
        cfg = small_config(tmp_path, ALL, n_symbols=200)
        result = run_experiment(cfg)
        files = emit_results(result, tmp_path, "table1")
        table = read_rows(tmp_path / "table1.csv")
        assert table[0] == TABLE_HEADER
        assert len(table) == 1 + len(ALL)
        grid_points = round((14.0 - 0.0) / 0.05) + 1
        for s in ALL:
            rows = read_rows(tmp_path / f"ccdf_{curve_name(s)}.csv")
            assert rows[0] == CURVE_HEADER
            assert len(rows) == 1 + grid_points
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["rng_seed"] == 5
        assert len(files) == 1 + len(ALL) + 1
        by_label = {r[0]: r for r in table[1:]}
        assert by_label["rcf_v3"][TABLE_HEADER.index("ifft_count")] == "5"
        assert by_label["scf_v3"][TABLE_HEADER.index("ifft_count")] == "3"
        assert by_label["alg1"][TABLE_HEADER.index("ifft_count")] == "1"
        assert by_label["none"][TABLE_HEADER.index("rate_param")] == "NA"

    def test_byte_identical_reruns(self, tmp_path):
        schemes = [SchemeConfig("alg2", a_db=4.0), SchemeConfig("rcf", a_db=4.0, v=2)]
        outputs = []
        for name, workers in (("a", 1), ("b", 1), ("c", 2)):
            cfg = small_config(tmp_path / name, schemes, n_symbols=300, workers=workers)
            emit_results(run_experiment(cfg), cfg.output_path, "t")
            outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir()) if p.suffix == ".csv"})
        assert outputs[0] == outputs[1]
        assert outputs[0] == outputs[2]

    def test_stored_papr_recomputes(self, tmp_path):
        cfg = small_config(tmp_path, [SchemeConfig("alg2", a_db=4.0)])
        result = run_experiment(cfg)
        samples = result.schemes[0].papr_samples
        for i in np.random.default_rng(0).choice(cfg.n_symbols, 10, replace=False):
            _, res = process_symbol(cfg, cfg.schemes[0], int(i))
            assert abs(papr_db(res.output) - samples[i]) <= 1e-12

    def test_empty_scheme_list(self, tmp_path):
        cfg = small_config(tmp_path, [])
        result = run_experiment(cfg)
        emit_results(result, tmp_path, "empty")
        assert read_rows(tmp_path / "empty.csv") == [TABLE_HEADER]

    def test_unresolvable_target_warns_instead_of_extrapolating(self, tmp_path):
        cfg = small_config(tmp_path, [SchemeConfig("alg1", a_db=4.0)], ccdf_target=1e-3)
        result = run_experiment(cfg)
        assert result.rows[0].papr_1e3_db is None
        assert result.rows[0].cells()[2] == "NA"
        assert result.warnings and "not resolvable" in result.warnings[0]

    def test_sdr_sanity(self, tmp_path):
        result = run_experiment(small_config(tmp_path, [SchemeConfig("none"), SchemeConfig("cpc", a_db=4.0)]))
        assert result.rows[0].sdr_db > 250
        assert 5 < result.rows[1].sdr_db < 60

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(modulation="qpsk")
        with pytest.raises(ValueError):
            ExperimentConfig(n_symbols=0)

    def test_from_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n_carriers": 64, "schemes": [{"scheme": "rcf", "v": 2}]}))
        cfg = ExperimentConfig.from_file(path, n_symbols=7)
        assert cfg.n_carriers == 64 and cfg.n_symbols == 7
        assert cfg.schemes == [SchemeConfig("rcf", v=2)]


class TestCli:
    def test_table_run(self, tmp_path, capsys):
        code = cli.main(
            ["table1", "--symbols", "20", "--n-carriers", "32", "--a-db", "4", "--scheme", "alg1",
             "--scheme", "rcf:v=2", "--out", str(tmp_path)]
        )
        assert code == 0
        assert len(read_rows(tmp_path / "table1.csv")) == 3
        assert capsys.readouterr().out.count("\n") == 2

    def test_ber_run(self, tmp_path):
        code = cli.main(
            ["ber", "--symbols", "2", "--n-carriers", "32", "--scheme", "cpc", "--snr", "10",
             "--min-bits", "256", "--out", str(tmp_path)]
        )
        assert code == 0
        rows = read_rows(tmp_path / "ber_cpc_a6.csv")
        assert rows[0] == CURVE_HEADER and len(rows) == 2

    def test_sweep_expands_iterations(self, tmp_path):
        code = cli.main(["sweep", "--symbols", "5", "--n-carriers", "32", "--v", "1", "--v", "2", "--out", str(tmp_path)])
        assert code == 0
        labels = [r[0] for r in read_rows(tmp_path / "sweep.csv")[1:]]
        assert labels == ["rcf_v1", "rcf_v2"]

    def test_bad_scheme_exits_2(self, tmp_path, capsys):
        assert cli.main(["table1", "--scheme", "slm", "--out", str(tmp_path)]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_bad_option_exits_2(self, tmp_path):
        assert cli.main(["table1", "--scheme", "rcf:w=3", "--out", str(tmp_path)]) == 2

    def test_unwritable_output_exits_3(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code = cli.main(["table1", "--symbols", "2", "--n-carriers", "16", "--scheme", "none", "--out", str(blocker / "sub")])
        assert code == 3

    def test_parse_scheme(self):
        s = cli.parse_scheme("scf:v=10,beta=1.5", 5.0)
        assert s == SchemeConfig("scf", a_db=5.0, v=10, beta=1.5)
        assert math.isclose(cli.parse_scheme("alg1:i_max_headroom=2", 6).i_max_headroom, 2.0)


@pytest.mark.parametrize("scheme", ["alg1", "alg2", "cpc", "rcf"])
def test_higher_threshold_never_lowers_sdr(tmp_path, scheme):
    schemes = [SchemeConfig(scheme, a_db=4.0), SchemeConfig(scheme, a_db=6.0)]
    result = run_experiment(small_config(tmp_path, schemes, n_symbols=100))
    assert result.rows[1].sdr_db >= result.rows[0].sdr_db
