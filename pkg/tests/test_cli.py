import argparse
import json
import math

import numpy as np
import pytest

from phsfd import ConfigError, exact_u, fit_slope
from phsfd import cli, experiments


def parse(mode, **kwargs):
    ns = argparse.Namespace(
        mode=mode, m=None, h=None, r=None, seeds=None, seed=None,
        tol=None, dmax=None, out=None, config=None,
    )
    for key, value in kwargs.items():
        setattr(ns, key, value)
    return cli.parse_config(ns)


class TestParseConfig:
    def test_converge_h_defaults(self):
        config = parse("converge-h")
        assert config.m_list == [2, 3, 4]
        assert config.h_list == [0.16, 0.08, 0.04, 0.02]
        assert config.seeds == 5
        assert config.tol == 1e-10

    def test_converge_r_defaults(self):
        config = parse("converge-r")
        assert config.h_list == [0.05]
        assert config.R_list == [0.125, 0.25, 0.5, 1.0]

    def test_terms_defaults(self):
        config = parse("terms")
        assert config.m_list == [2]
        assert config.effective_d_max() == 8

    def test_flag_lists(self):
        config = parse("terms", h="0.3,0.1", seeds="30")
        assert config.h_list == [0.3, 0.1]
        assert config.seeds == 30

    def test_file_values_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"m": [3], "seeds": 2, "tol": 1e-8}))
        config = parse("converge-h", config=str(cfg))
        assert config.m_list == [3]
        assert config.seeds == 2
        assert config.tol == 1e-8
        config = parse("converge-h", config=str(cfg), m="2", seeds="4")
        assert config.m_list == [2]
        assert config.seeds == 4
        assert config.tol == 1e-8

    @pytest.mark.parametrize(
        "kwargs,needle",
        [
            ({"h": "-1"}, "--h"),
            ({"h": "2.5"}, "--h"),
            ({"m": "7"}, "--m"),
            ({"m": "abc"}, "--m"),
            ({"seeds": "0"}, "--seeds"),
            ({"tol": "-1e-9"}, "--tol"),
        ],
    )
    def test_invalid_values_name_the_flag(self, kwargs, needle):
        with pytest.raises(ConfigError) as err:
            parse("converge-h", **kwargs)
        assert needle in str(err.value)

    def test_terms_requires_single_degree(self):
        with pytest.raises(ConfigError):
            parse("terms", m="2,3")

    def test_converge_r_requires_single_spacing(self):
        with pytest.raises(ConfigError):
            parse("converge-r", h="0.1,0.05")

    def test_terms_dmax_must_exceed_degree(self):
        with pytest.raises(ConfigError):
            parse("terms", dmax="2")

    def test_missing_config_file(self):
        with pytest.raises(ConfigError):
            parse("converge-h", config="/nonexistent/cfg.json")

    def test_usage_error_exit_code(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["converge-h", "--h", "-1", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2
        assert "--h" in capsys.readouterr().err


class TestSingleRunOutputs:
    def test_nodes_csv(self, tmp_path):
        out = tmp_path / "nodes.csv"
        assert cli.main(["nodes", "--h", "0.3", "--seed", "1", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "x,y,kind"
        kinds = {line.split(",")[2] for line in lines[1:]}
        assert kinds == {"interior", "boundary"}
        n_boundary = sum(1 for line in lines[1:] if line.endswith("boundary"))
        assert n_boundary == round(2 * math.pi / 0.3)

    def test_solve_csv(self, tmp_path):
        out = tmp_path / "sol.csv"
        assert cli.main(["solve", "--h", "0.3", "--m", "2", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "x,y,kind,u_num,u_exact,err"
        for line in lines[1:]:
            x, y, kind, u_num, u_exact, err = line.split(",")
            assert float(u_exact) == pytest.approx(exact_u(float(x), float(y), 1.0), rel=1e-12)
            if kind == "boundary":
                assert float(err) == 0.0
            assert abs(float(u_num) - float(u_exact)) < 0.5


@pytest.fixture(scope="module")
def tiny_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("report") / "h.csv"
    config = experiments.ExperimentConfig(
        mode="converge-h", m_list=[2], h_list=[0.4, 0.3, 0.2], seeds=2
    )
    report = experiments.run_converge_h(config)
    experiments.write_report(report, str(out))
    return config, report, out


class TestReports:
    def test_row_counts_cover_the_sweep(self, tiny_report):
        config, report, _ = tiny_report
        assert len(report.rows) == len(config.h_list) * config.seeds * 2  # two norms
        assert not report.failures

    def test_report_parses_back(self, tiny_report):
        config, report, out = tiny_report
        parsed_config, rows, slopes, bands, failures = experiments.read_report(str(out))
        assert parsed_config["mode"] == "converge-h"
        assert len(rows) == len(report.rows)
        assert len(slopes) == len(report.slopes)
        assert len(bands) == len(report.bands)
        assert failures == []

    def test_slopes_recomputable_from_rows(self, tiny_report):
        # round-trip: 17-significant-digit serialization preserves floats
        _, _, out = tiny_report
        _, rows, slopes, _, _ = experiments.read_report(str(out))
        for summary in slopes:
            per_h = {}
            for row in rows:
                if row.m == summary.m and row.norm_kind == summary.norm_kind:
                    value = getattr(row, summary.group)
                    per_h.setdefault(row.h, []).append(value)
            hs = sorted(per_h, reverse=True)
            means = [float(np.mean(per_h[h])) for h in hs]
            assert fit_slope(hs, means) == pytest.approx(summary.slope, rel=1e-12)

    def test_bands_bracket_means(self, tiny_report):
        _, report, _ = tiny_report
        for band in report.bands:
            assert band.lo <= band.mean <= band.hi

    def test_byte_identical_reports(self, tiny_report, tmp_path):
        config, report, out = tiny_report
        rerun = experiments.run_converge_h(
            experiments.ExperimentConfig(
                mode="converge-h", m_list=[2], h_list=[0.4, 0.3, 0.2], seeds=2
            )
        )
        other = tmp_path / "again.csv"
        experiments.write_report(rerun, str(other))
        assert other.read_bytes() == out.read_bytes()

    def test_failed_cells_are_logged_and_sweep_continues(self, monkeypatch):
        real = experiments.solve_poisson

        def flaky(h, m, seed=0, R=1.0, tol=1e-10):
            if seed == 1 and h == 0.3:
                raise RuntimeError("injected failure")
            return real(h, m, seed=seed, R=R, tol=tol)

        monkeypatch.setattr(experiments, "solve_poisson", flaky)
        config = experiments.ExperimentConfig(
            mode="converge-h", m_list=[2], h_list=[0.4, 0.3], seeds=2
        )
        report = experiments.run_converge_h(config)
        assert any("injected failure" in msg for msg in report.failures)
        assert any("seed=1" in msg for msg in report.failures)
        # surviving cells: 2 + 1 runs, two norm rows each
        assert len(report.rows) == 6
        text = experiments.render_report(report)
        assert "# failed:" in text

    def test_single_dilation_surfaces_fit_error(self):
        config = experiments.ExperimentConfig(
            mode="converge-r", m_list=[2], h_list=[0.3], R_list=[1.0], seeds=1
        )
        report = experiments.run_converge_r(config)
        assert all(math.isnan(s.slope) for s in report.slopes)
        assert any("slope" in msg for msg in report.failures)

    def test_cli_sweep_prints_slopes(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = cli.main([
            "converge-h", "--m", "2", "--h", "0.4,0.3", "--seeds", "1", "--out", str(out)
        ])
        assert code == 0
        captured = capsys.readouterr().out
        assert "slope" in captured
        assert out.exists()
