import csv
import io
import json
import math
import random

import pytest

from lpmult.analytic_models import NotBoundedError, PoleSum
from lpmult.experiments import (CSV_FIELDS, ConfigError, ExperimentConfig, Report, emit,
                                place_poles, read_report, report_csv, report_json, run)
from lpmult.lp_sets import generate_dyadic_gap

THEOREM = {"schema_version": 1, "kind": "theorem_probe", "name": "thm",
           "set": {"generator": "dyadic_gap", "K": 4}, "theta0": math.pi / 6,
           "p_list": [4 / 3, 3], "N_list": [8, 16, 32], "grids": {"mikhlin": 2048}, "seed": 1}
NORM_TABLE = {"kind": "norm_table", "model": {"variant": "polynomial",
                                              "coeffs": [[0.5, 0], [0.5, 0]]},
              "p_list": [2, "inf"], "N_list": [4, 8]}


def fresh(base):
    return json.loads(json.dumps(base))


# (dotted path, bad value, field named in the diagnostic)
MUTATIONS = [
    ("kind", "probe", "kind"), ("kind", None, "kind"), ("kind", 3, "kind"),
    ("schema_version", 2, "schema_version"), ("schema_version", "1", "schema_version"),
    ("name", "", "name"), ("name", "a/b", "name"), ("name", 5, "name"),
    ("set", [], "set"), ("set", {}, "set"), ("set", "dyadic", "set"),
    ("set.generator", "cantor", "set.generator"), ("set.K", 0, "set.K"),
    ("set.K", 2.5, "set.K"), ("set.K", "8", "set.K"), ("set.K", True, "set.K"),
    ("theta0", 0, "theta0"), ("theta0", -1.0, "theta0"), ("theta0", 2.0, "theta0"),
    ("theta0", "pi/6", "theta0"), ("theta0", None, "theta0"), ("theta0", math.pi / 2, "theta0"),
    ("p_list", [], "p_list"), ("p_list", [0.5], "p_list"), ("p_list", ["four"], "p_list"),
    ("p_list", 4, "p_list"), ("p_list", [2, 2], "p_list"), ("p_list", [True], "p_list"),
    ("p_list", [None], "p_list"), ("p_list", [-3], "p_list"),
    ("N_list", [], "N_list"), ("N_list", [1], "N_list"), ("N_list", [8.0], "N_list"),
    ("N_list", [8, 8], "N_list"), ("N_list", "8", "N_list"), ("N_list", [-16], "N_list"),
    ("N_list", [None], "N_list"), ("N_list", [False], "N_list"),
    ("grids", [], "grids"), ("grids.mikhlin", 100, "grids.mikhlin"),
    ("grids.mikhlin", 2048.0, "grids.mikhlin"), ("grids.sup_norm", 3, "grids.sup_norm"),
    ("grids.inscribed_samples", 8, "grids.inscribed_samples"),
    ("grids.fine", 10, "grids.fine"),
    ("tolerances", 1e-8, "tolerances"), ("tolerances.boyd_tol", 0, "tolerances.boyd_tol"),
    ("tolerances.boyd_tol", 2.0, "tolerances.boyd_tol"),
    ("tolerances.boyd_tol", "tight", "tolerances.boyd_tol"),
    ("tolerances.restarts", 0, "tolerances.restarts"),
    ("tolerances.max_iter", 1.5, "tolerances.max_iter"),
    ("tolerances.eps", 1e-3, "tolerances.eps"),
    ("trials", 10, "trials"), ("trials", "many", "trials"),
    ("seed", -1, "seed"), ("seed", 1.5, "seed"), ("seed", "0", "seed"), ("seed", None, "seed"),
    ("deltas", [], "deltas"), ("deltas", [1.5], "deltas"), ("deltas", [0], "deltas"),
    ("deltas", 0.05, "deltas"), ("model", {"variant": "rational"}, "model"),
    ("model", {"variant": "pole_sum", "poles": [[0.5, 0]], "weights": [[1, 0]]}, "model"),
    ("model", "z", "model"), ("extra", 1, "extra"), ("p_list", [float("nan")], "p_list"),
]


def mutate(base, path, value):
    cfg = fresh(base)
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return cfg


def malformed_corpus():
    corpus = [(mutate(THEOREM, path, value), field) for path, value, field in MUTATIONS]
    # dropped required keys
    for key in ("kind", "set", "theta0", "p_list", "N_list"):
        cfg = fresh(THEOREM)
        del cfg[key]
        corpus.append((cfg, key))
    for key in ("model", "p_list", "N_list"):
        cfg = fresh(NORM_TABLE)
        del cfg[key]
        corpus.append((cfg, key))
    lp = {"kind": "lp_constants", "set": {"generator": "dyadic_gap", "K": 8},
          "p_list": [4], "N_list": [64]}
    corpus.append((lp, "N_list"))  # dyadic_gap(8) collides at N = 64
    corpus.append((dict(lp, N_list=[96]), "N_list"))
    corpus.append((dict(lp, p_list=[1]), "p_list"))
    corpus.append((dict(lp, p_list=["inf"]), "p_list"))
    corpus.append(({"kind": "verbitskii_probe", "p_list": [2], "N_list": [8],
                    "model": NORM_TABLE["model"]}, "model"))
    corpus.append(({"kind": "mikhlin_verify", "set": {"angles": [0, 1]}, "theta0": 0.5},
                   "set.angles"))
    corpus.append(({"kind": "mikhlin_verify", "set": {"angles": "0 1 2"}, "theta0": 0.5},
                   "set.angles"))
    corpus.append(({"kind": "mikhlin_verify", "theta0": 0.5,
                    "set": {"angles": [0, 2, 4], "accumulation": [None]}}, "set.accumulation"))
    corpus.append(({"kind": "theorem_probe", **{k: THEOREM[k] for k in ("theta0", "p_list",
                    "N_list")}, "set": {"generator": "superlacunary", "K": 6}}, "set.K"))
    corpus.append(([], "config"))
    # randomized type swaps on top-level fields
    rng = random.Random(0)
    junk = [None, "x", [], {}, -7, 1e300, True]
    while len(corpus) < 100:
        key = rng.choice(["theta0", "p_list", "N_list", "seed", "trials", "set", "grids"])
        value = rng.choice(junk)
        if (key == "seed" and value == 1e300) or (key == "grids" and value == {}):
            continue
        corpus.append((mutate(THEOREM, key, value), key))
    return corpus


CORPUS = malformed_corpus()


def test_corpus_size():
    assert len(CORPUS) >= 100


@pytest.mark.parametrize("raw,field", CORPUS, ids=[f"{i:03d}-{f}" for i, (_, f) in
                                                  enumerate(CORPUS)])
def test_malformed_config_named_diagnostic(raw, field, monkeypatch):
    import lpmult.experiments as ex

    def forbidden(*args, **kwargs):
        raise AssertionError("computation started before validation finished")
    monkeypatch.setattr(ex, "multiplier_norm_curve", forbidden)
    monkeypatch.setattr(ex, "mikhlin_constant", forbidden)
    monkeypatch.setattr(ex, "lp_constants_estimate", forbidden)
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(raw)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_valid_configs_parse():
    cfg = ExperimentConfig.from_dict(fresh(THEOREM))
    assert cfg.N_list == [8, 16, 32] and cfg.grids["mikhlin"] == 2048
    cfg = ExperimentConfig.from_dict(fresh(NORM_TABLE), seed_override=9)
    assert cfg.p_list == [2.0, math.inf] and cfg.seed == 9


def test_place_poles_lie_outside_domain():
    from lpmult.analytic_models import is_bounded_on
    from lpmult.circle_geometry import build_star_domain
    F = generate_dyadic_gap(8)
    m = place_poles(F)
    assert len(m.poles) == 3 and m.weights == (0.05, 0.02, 0.01)
    assert is_bounded_on(m, build_star_domain(F, math.pi / 6))


@pytest.fixture(scope="module")
def theorem_report():
    return run(ExperimentConfig.from_dict(fresh(THEOREM)))


class TestRun:
    def test_theorem_probe_cells(self, theorem_report):
        cells = theorem_report.cells
        assert cells[0]["cell"] == "mikhlin" and cells[0]["margin"] <= 1.05
        norms = [c for c in cells if c["cell"] == "norm"]
        assert len(norms) == 6
        for c in cells:
            assert c["seed"] == 1 and c["methods"]
        for key, curve in theorem_report.summary["curves"].items():
            assert curve["nondecreasing"]

    def test_refuses_unbounded_model(self):
        raw = fresh(THEOREM)
        w = 1.3 * complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
        raw["set"] = {"angles": [0, math.pi / 2, math.pi, 1.5 * math.pi]}
        raw["model"] = PoleSum([w], [1.0]).to_record()
        with pytest.raises(NotBoundedError, match="offending"):
            run(ExperimentConfig.from_dict(raw))

    def test_mikhlin_verify_constant(self):
        raw = {"kind": "mikhlin_verify", "set": {"generator": "dyadic_gap", "K": 3},
               "theta0": 0.5, "model": {"variant": "polynomial", "coeffs": [[1, 0]]},
               "grids": {"mikhlin": 1024}}
        rep = run(ExperimentConfig.from_dict(raw))
        assert len(rep.cells) == 1 and rep.cells[0]["margin"] == 0.0

    def test_lp_constants_and_norm_table(self):
        lp = run(ExperimentConfig.from_dict(
            {"kind": "lp_constants", "set": {"generator": "dyadic_gap", "K": 3},
             "p_list": [2, 4], "N_list": [64], "trials": 100}))
        assert [c["p"] for c in lp.cells] == [2.0, 4.0]
        assert abs(lp.cells[0]["ratio_max"] - 1) < 1e-10
        nt = run(ExperimentConfig.from_dict(fresh(NORM_TABLE)))
        assert len(nt.cells) == 4
        inf_cells = [c for c in nt.to_record()["cells"] if c["p"] == "inf"]
        assert [c["lower"] for c in inf_cells] == [1.0, 1.0]

    def test_pool_matches_serial(self, theorem_report):
        pooled = run(ExperimentConfig.from_dict(fresh(THEOREM)), workers=2)
        assert report_json(pooled) == report_json(theorem_report)


class TestEmit:
    def test_empty_report_is_header_only(self, tmp_path):
        path = emit(Report({"kind": "norm_table", "name": "empty"}, []), "csv", tmp_path)
        assert path.read_text().splitlines() == [",".join(CSV_FIELDS)]

    def test_row_count(self, theorem_report):
        rows = list(csv.DictReader(io.StringIO(report_csv(theorem_report))))
        assert len([r for r in rows if r["cell"] == "norm"]) == 2 * 3
        assert rows[1]["methods"].startswith("coefficients=")

    def test_rfc4180_quoting(self):
        rep = Report({"name": "q"}, [{"cell": "norm", "methods": {"a": 'x,"y"'}}])
        text = report_csv(rep)
        assert text.endswith("\r\n")
        assert '"a=x,""y"""' in text

    def test_json_roundtrip(self, theorem_report, tmp_path):
        path = emit(theorem_report, "json", tmp_path)
        again = read_report(path)
        assert again.to_record() == theorem_report.to_record()
        assert report_json(again) == path.read_text()

    def test_json_handles_infinite_p(self):
        rep = run(ExperimentConfig.from_dict(fresh(NORM_TABLE)))
        assert read_report_text(report_json(rep)).to_record() == rep.to_record()

    def test_svg_and_timings(self, theorem_report, tmp_path):
        path = emit(theorem_report, "svg", tmp_path)
        text = path.read_text()
        assert text.startswith("<?xml") and "<svg" in text
        timings = json.loads((tmp_path / "thm.timings.json").read_text())
        assert all(t["wall_time"] >= 0 for t in timings)

    def test_unwritable_output(self, theorem_report, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError, match="cannot write"):
            emit(theorem_report, "csv", blocker / "sub")

    def test_environment_output_dir(self, theorem_report, tmp_path, monkeypatch):
        monkeypatch.setenv("LPMULT_OUTPUT_DIR", str(tmp_path / "env"))
        assert emit(theorem_report, "csv").parent == tmp_path / "env"


def read_report_text(text):
    return Report.from_record(json.loads(text))


def test_determinism_bytes(tmp_path):
    a = run(ExperimentConfig.from_dict(fresh(THEOREM)))
    b = run(ExperimentConfig.from_dict(fresh(THEOREM)))
    for fmt in ("csv", "json", "svg"):
        pa = emit(a, fmt, tmp_path / "a")
        pb = emit(b, fmt, tmp_path / "b")
        assert pa.read_bytes() == pb.read_bytes()
