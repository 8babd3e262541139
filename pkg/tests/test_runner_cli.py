import json
from fractions import Fraction

import pytest

from l2mult import (FreeAbelianGroup, InfiniteDihedralGroup, centralizer_growth,
                    emit, farber_diagnostic, rel_farber_diagnostic, run)
from l2mult.cli import main as cli_main
from l2mult.runner import (ConfigInvalid, ExperimentConfig, ExperimentContext,
                           LevelRecord, build_chain, build_group,
                           report_round_trip)


def dinf_config(**overrides):
    data = {
        "group": {"family": "dihedral_infinite"},
        "complex": "line_dinf",
        "chain": {"template": "dihedral", "orders": [2, 4, 8]},
        "h_words": ["1", "b"],
        "degrees": [0, 1],
        "b2": {"0": "0", "1": "0"},
        "infinite_centralizers": True,
        "probe_words": ["a", "b"],
    }
    data.update(overrides)
    return ExperimentConfig.from_json(data)


def test_config_validation_errors():
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_json({"group": {}, "complex": "line_z",
                                    "chain": {}, "format": "xml"})
    with pytest.raises(ConfigInvalid):
        build_group({"family": "nope"})
    with pytest.raises(ConfigInvalid):
        build_chain({"template": "nope"}, FreeAbelianGroup(1))
    with pytest.raises(ConfigInvalid):
        ExperimentContext(dinf_config(irreducibles=[7]))
    with pytest.raises(ConfigInvalid):
        ExperimentContext(dinf_config(complex="line_z"))
    with pytest.raises(ConfigInvalid):
        build_chain({"template": "dihedral", "orders": [2, 3]},
                    InfiniteDihedralGroup())


def test_config_round_trip():
    cfg = dinf_config()
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again.to_json() == cfg.to_json()
    assert again.b2[1] == Fraction(0)


def test_farber_diagnostic_cyclic_chain():
    cfg = ExperimentConfig.from_json({
        "group": {"family": "free_abelian", "rank": 1},
        "complex": "line_z",
        "chain": {"template": "cyclic_mod", "base": 2, "depth": 3},
        "probe_words": ["a", "aaaa"],
    })
    ctx = ExperimentContext(cfg)
    rows = farber_diagnostic(ctx.chain, ctx.probes)
    frac = {(r["level"], r["word"]): r["fraction"] for r in rows}
    # fraction is 1 exactly when the word lies in the kernel, else 0
    assert frac[(0, "a")] == 0 and frac[(2, "a")] == 0
    assert frac[(0, "aaaa")] == 1 and frac[(1, "aaaa")] == 1
    assert frac[(2, "aaaa")] == 0


def test_rel_farber_kernel_chain_decays():
    cfg = dinf_config(chain={"template": "dihedral", "orders": [2, 4, 8, 16]})
    ctx = ExperimentContext(cfg)
    rows = rel_farber_diagnostic(ctx.chain, ctx.h_elems, ctx.probes)
    at_ss = {r["level"]: r["value"] for r in rows
             if r["g"] == "b" and r["h"] == "b"}
    # |C(s)| / 2m = 2/m for the even dihedral quotients
    assert at_ss == {0: Fraction(1), 1: Fraction(1, 2), 2: Fraction(1, 4),
                     3: Fraction(1, 8)}
    assert all(r["limit"] == 0 for r in rows if r["h"] == "b")


def test_rel_farber_non_normal_persistent():
    cfg = dinf_config(chain={"template": "dihedral_reflection",
                             "orders": [2, 4, 8]},
                      probe_words=["1", "a"])
    ctx = ExperimentContext(cfg)
    rows = rel_farber_diagnostic(ctx.chain, ctx.h_elems, ctx.probes)
    persistent = [r["deviation"] for r in rows
                  if r["g"] == "1" and r["h"] == "b"]
    assert persistent == [1, 1, 1]


def test_centralizer_growth():
    cfg = dinf_config(chain={"template": "dihedral", "orders": [2, 4, 8, 16]})
    ctx = ExperimentContext(cfg)
    d = ctx.group
    assert centralizer_growth(ctx.chain, d.identity()) == [1, 1, 1, 1]
    growth_s = centralizer_growth(ctx.chain, d.word("b"))
    assert growth_s == [1, 2, 4, 8]       # class size of the reflection
    z_cfg = ExperimentConfig.from_json({
        "group": {"family": "free_abelian", "rank": 1},
        "complex": "line_z",
        "chain": {"template": "cyclic_mod", "base": 2, "depth": 3}})
    z_ctx = ExperimentContext(z_cfg)
    assert centralizer_growth(z_ctx.chain, z_ctx.group.word("a")) == [1, 1, 1]


def test_run_dinf_records_and_report():
    records, report = run(dinf_config(char_convergence=0))
    assert [r.index for r in records] == [4, 8, 16]
    for r in records:
        assert r.error is None
        assert r.raw[(0, 0)] == 1 and r.raw[(1, 1)] == 1
        assert r.normalized[(1, 1)] == Fraction(1, r.index)
    seq = report["sequences"]["1,1"]
    assert seq["values"] == ["1/4", "1/8", "1/16"]
    assert seq["prediction"] == "0"
    # deviation sequences are non-increasing on the built-in example
    for key, entry in report["sequences"].items():
        devs = [abs(Fraction(v)) for v in entry["values"]]
        assert all(a >= b for a, b in zip(devs, devs[1:]))
    assert report["assumptions"]["normal_kernel_chain"]
    assert report_round_trip(report) == report
    # induced-character convergence at the reflection: the observed value is
    # the reciprocal reflection-class size, 2/m for even m, decaying to 0
    rows = [r for r in report["char_convergence"] if r.get("word") == "b"]
    assert [round(r["deviation"], 6) for r in rows] == [1.0, 0.5, 0.25]


def test_run_rose_abelianized_chain():
    # free group of rank 2 over its tree, abelianized-mod-2^n kernels:
    # normalized first Betti number (N+1)/N converges to the supplied limit 1
    cfg = ExperimentConfig.from_json({
        "group": {"family": "free", "rank": 2},
        "complex": "rose",
        "chain": {"template": "abelianized_mod", "base": 2, "depth": 3},
        "h_words": ["1"],
        "degrees": [0, 1],
        "b2": {"1": "1"},
        "infinite_centralizers": True,
        "probe_words": ["a", "aba'b'"],
    })
    records, report = run(cfg)
    for r in records:
        n = r.index
        assert r.betti[1] == n + 1
        assert r.normalized[(1, 0)] == Fraction(n + 1, n)
    assert [r.index for r in records] == [4, 16, 64]
    seq = report["sequences"]["1,0"]
    assert seq["prediction"] == "1"
    assert seq["final_deviation"] == pytest.approx(1 / 64)
    # commutators die in every abelian quotient: Farber fraction stays 1
    frac = {(row["level"], row["word"]): row["fraction"]
            for row in report["farber"]}
    assert all(frac[(lvl, "aba'b'")] == "1" for lvl in range(3))
    assert all(frac[(lvl, "a")] == "0" for lvl in range(3))


def test_semidirect_chain_with_rotation_action():
    # order-4 twist a -> b, b -> a^-1: the abelianized action matrix is not
    # symmetric, so the quotient-map relator checks pin down its orientation
    cfg = ExperimentConfig.from_json({
        "group": {"family": "free_by_finite", "rank": 2, "h": "cyclic:4",
                  "action": {"0": ["b", "a'"]}},
        "complex": "rose",       # placeholder; chain validation is the point
        "chain": {"template": "semidirect_mod", "base": 2, "depth": 2},
        "h_words": ["1"],
    })
    from l2mult.runner import build_chain, build_group
    from l2mult import validate_chain
    group = build_group(cfg.group)
    sigma, a = group.word("c"), group.word("a")
    assert sigma * a * sigma.inverse() == group.word("b")
    assert (sigma * sigma * a * sigma.inverse() * sigma.inverse()
            == group.word("a'"))
    chain = build_chain(cfg.chain, group)
    reports = validate_chain(chain)
    assert [r.index for r in reports] == [16, 64]
    level = chain.levels[1]
    assert level.via.evaluate(group.word("cac'")) == \
        level.via.evaluate(group.word("b"))


def test_run_partial_failure_records_errors():
    cfg = dinf_config(chain={"template": "dihedral_reflection",
                             "orders": [2, 4]})
    records, report = run(cfg)
    assert all(r.error is not None for r in records)
    assert all("NotFree" in r.error for r in records)


def test_run_levels_cap_and_parallel():
    records, _ = run(dinf_config(), levels=2)
    assert len(records) == 2
    records_par, report_par = run(dinf_config(), parallel=2)
    records_seq, report_seq = run(dinf_config())

    def strip_timing(rec):
        data = rec.to_json()
        data.pop("seconds")
        return data

    assert [strip_timing(r) for r in records_par] == \
        [strip_timing(r) for r in records_seq]


def test_level_record_json_round_trip():
    records, _ = run(dinf_config(), levels=1)
    again = LevelRecord.from_json(records[0].to_json())
    assert again.to_json() == records[0].to_json()
    assert again.normalized == records[0].normalized


def test_emit_files(tmp_path):
    records, report = run(dinf_config(), levels=2)
    paths = emit(records, report, tmp_path, "both")
    csv_lines = paths[0].read_text().splitlines()
    assert csv_lines[0] == ("level,index,p,chi,raw,normalized,"
                            "normalized_decimal,prediction,deviation")
    assert len(csv_lines) == 1 + 2 * 4      # 2 levels x (2 degrees x 2 chis)
    data = json.loads(paths[1].read_text())
    assert data == report
    # empty record list gives a header-only CSV
    paths_empty = emit([], {"sequences": {}}, tmp_path / "empty", "csv")
    assert paths_empty[0].read_text().splitlines() == [csv_lines[0]]


def test_cli_commands(tmp_path, capsys):
    assert cli_main(["table", "cyclic:3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("chi\\class")
    assert cli_main(["spectral", "1 + -1*a", "cyclic:6", "--kmax", "2"]) == 0
    out = capsys.readouterr().out
    assert "fk_det" in out
    assert cli_main(["spectral", "2*1 + -1*a + -1*b", "abelian:2,2"]) == 0
    capsys.readouterr()
    assert cli_main(["spectral", "1 + -1*a", "dihedral:4"]) == 0
    capsys.readouterr()

    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(dinf_config().to_json()))
    assert cli_main(["farber", str(cfg_path)]) == 0
    capsys.readouterr()
    assert cli_main(["run", str(cfg_path), "--out", str(tmp_path / "out"),
                     "--format", "csv", "--levels", "2"]) == 0
    assert (tmp_path / "out" / "results.csv").exists()

    # config errors exit 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"group": {"family": "nope"},
                               "complex": "line_z", "chain": {}}))
    assert cli_main(["run", str(bad)]) == 1
    assert cli_main(["farber", str(tmp_path / "missing.json")]) == 1

    # partial failure exits 2
    failing = dinf_config(chain={"template": "dihedral_reflection",
                                 "orders": [2, 4]})
    fail_path = tmp_path / "fail.json"
    fail_path.write_text(json.dumps(failing.to_json()))
    assert cli_main(["run", str(fail_path), "--out",
                     str(tmp_path / "out2")]) == 2
