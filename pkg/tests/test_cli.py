"""Command line interface: subcommands, formats, exit codes, determinism."""

import json

import pytest

from finapprox.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_csv_report(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "diagonal_unsolvable")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# finapprox v1"
    assert "# command=analyze" in lines
    assert "# verdict=NOT_SOLVABLE" in lines
    assert "# witness=0.0,1.0" in lines
    assert "# agreement=true" in lines
    header_index = lines.index(
        "alpha,norm_indicator,norm_residual,norm_constraint_residual,singular"
    )
    assert len(lines) - header_index - 1 == 8  # one row per scheduled alpha


def test_analyze_json_report(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "diagonal_solvable", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["version"] == "finapprox v1"
    assert payload["verdict"] == "SOLVABLE"
    assert payload["witness"] is None
    assert payload["agreement"] is True
    assert len(payload["records"]) == 8
    assert payload["oracle"]["constrained_solvable"] is True


def test_analyze_gram_only_has_no_oracle(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "rank_deficient_gamma", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "NOT_SOLVABLE"
    assert payload["oracle"] is None
    assert payload["agreement"] is None


def test_sweep_schedule_flags(capsys):
    code, out, _ = run(
        capsys,
        "sweep", "--scenario", "diagonal_solvable",
        "--alpha0", "0.5", "--ratio", "0.5", "--count", "3",
    )
    assert code == 0
    rows = [line for line in out.splitlines() if not line.startswith("#")][1:]
    assert len(rows) == 3
    assert rows[0].startswith("0.5,")
    assert rows[1].startswith("0.25,")


def test_singular_exit_code(capsys):
    code, out, _ = run(capsys, "sweep", "--scenario", "truncated_shift")
    assert code == 3
    assert "true" in out  # singular rows are still reported


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--scenario", "diagonal_unsolvable")
    assert code == 0
    assert "constrained_solvable,false" in out
    assert "distance,1.0" in out


def test_oracle_rejects_gram_only(capsys):
    code, _, err = run(capsys, "oracle", "--scenario", "rank_deficient_gamma")
    assert code == 2
    assert "gram" in err


def test_galerkin_command(capsys):
    code, out, _ = run(
        capsys, "galerkin", "--scenario", "function_space_galerkin", "--param", "M=32"
    )
    assert code == 0
    lines = out.splitlines()
    assert any(line.startswith("# family=") for line in lines)
    rows = [line for line in lines if not line.startswith("#")][1:]
    assert len(rows) == 8
    final = rows[-1].split(",")
    assert float(final[3]) <= 1e-3  # residual decays along the diagonal


def test_galerkin_file_input_needs_family(capsys, tmp_path):
    path = tmp_path / "problem.json"
    code, _, _ = run(capsys, "export", "--scenario", "diagonal_solvable", "--output", str(path))
    assert code == 0
    code, _, err = run(capsys, "galerkin", "--input", str(path))
    assert code == 2
    assert "family" in err
    code, out, _ = run(capsys, "galerkin", "--input", str(path), "--family", "coordinate")
    assert code == 0
    assert "step,n,alpha" in out


def test_validate_command(capsys):
    code, out, _ = run(capsys, "validate", "--scenario", "nilpotent_pi")
    assert code == 0
    assert "constraint_is_projector,false" in out
    assert "constraint_supplied_raw,true" in out


def test_validate_rejects_asymmetric_gram_file(capsys, tmp_path):
    path = tmp_path / "bad_gamma.json"
    path.write_text(
        json.dumps(
            {
                "dimH": 2,
                "dimU": 2,
                "Gamma": [[1.0, 0.5], [0.0, 1.0]],
                "constraint": {"type": "projector_basis", "data": [[1.0, 0.0]]},
                "h": [1.0, 1.0],
            }
        )
    )
    code, _, err = run(capsys, "validate", "--input", str(path))
    assert code == 2
    assert "symmetry defect" in err


def test_scenarios_list(capsys):
    code, out, _ = run(capsys, "scenarios-list")
    assert code == 0
    for name in (
        "diagonal_solvable",
        "diagonal_unsolvable",
        "truncated_shift",
        "rank_deficient_gamma",
        "nilpotent_pi",
        "function_space_galerkin",
    ):
        assert name in out


def test_export_and_reanalyze(capsys, tmp_path):
    path = tmp_path / "exported.json"
    code, _, _ = run(
        capsys, "export", "--scenario", "truncated_shift", "--param", "N=4",
        "--output", str(path),
    )
    assert code == 0
    data = json.loads(path.read_text())
    assert data["dimH"] == 4
    code, out, _ = run(capsys, "analyze", "--input", str(path))
    assert code == 3  # every alpha singular for this scenario
    assert "# verdict=SINGULAR" in out


def test_output_file_and_determinism(capsys, tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    for target in (first, second):
        code, _, _ = run(
            capsys, "analyze", "--scenario", "function_space_galerkin",
            "--param", "M=32", "--output", str(target),
        )
        assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_jobs_flag_is_output_invariant(capsys):
    _, serial, _ = run(capsys, "sweep", "--scenario", "diagonal_solvable", "--jobs", "1")
    _, threaded, _ = run(capsys, "sweep", "--scenario", "diagonal_solvable", "--jobs", "4")
    assert serial == threaded


def test_bad_scenario_name(capsys):
    code, _, err = run(capsys, "analyze", "--scenario", "bogus")
    assert code == 2
    assert "bogus" in err


def test_bad_param_syntax(capsys):
    code, _, err = run(capsys, "analyze", "--scenario", "truncated_shift", "--param", "N")
    assert code == 2
    assert "K=V" in err


def test_both_sources_rejected(capsys, tmp_path):
    path = tmp_path / "p.json"
    run(capsys, "export", "--scenario", "diagonal_solvable", "--output", str(path))
    code, _, err = run(
        capsys, "analyze", "--scenario", "diagonal_solvable", "--input", str(path)
    )
    assert code == 2
    assert "not both" in err


def test_missing_source_rejected(capsys):
    code, _, err = run(capsys, "analyze")
    assert code == 2
    assert "--scenario" in err or "--input" in err


def test_missing_input_file(capsys):
    code, _, err = run(capsys, "analyze", "--input", "/no/such/file.json")
    assert code == 2


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["no-such-command"])
    assert excinfo.value.code == 2
