import json
import math

import pytest

from emhyp.cli import main

BETA_PROBLEM = {
    "n_vars": 1,
    "factors": [
        {
            "n_vars": 1,
            "terms": [
                {"exp": [0], "coeff": [1.0, 0.0]},
                {"exp": [1], "coeff": [1.0, 0.0]},
            ],
        }
    ],
    "s": [[0.5, 0.0]],
    "t": [[1.0, 0.0]],
    "theta": [0.0],
}

GAUSS_PROBLEM = {
    "n_vars": 2,
    "factors": [
        {
            "n_vars": 2,
            "terms": [
                {"exp": [0, 0], "coeff": [1.0, 0.0]},
                {"exp": [1, 0], "coeff": [1.0, 0.0]},
                {"exp": [0, 1], "coeff": [1.0, 0.0]},
                {"exp": [1, 1], "coeff": [0.5, 0.0]},
            ],
        }
    ],
    "s": [[0.3, 0.0], [0.4, 0.0]],
    "t": [[1.1, 0.0]],
    "theta": [0.0, 0.0],
}


@pytest.fixture
def beta_file(tmp_path):
    p = tmp_path / "beta.json"
    p.write_text(json.dumps(BETA_PROBLEM))
    return str(p)


@pytest.fixture
def gauss_file(tmp_path):
    p = tmp_path / "gauss.json"
    p.write_text(json.dumps(GAUSS_PROBLEM))
    return str(p)


def test_newton_output(beta_file, capsys):
    assert main(["newton", beta_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["full_dimensional"] is True
    assert out["seed"] == 0
    mus = {tuple(f["mu"]) for f in out["facets"]}
    assert mus == {(1,), (-1,)}


def test_em_eval_value(beta_file, capsys):
    assert main(["em-eval", beta_file]) == 0
    out = json.loads(capsys.readouterr().out)
    re, im = out["value"]
    assert abs(complex(re, im) - math.pi) < 1e-7


def test_output_deterministic(beta_file, tmp_path):
    p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["--out", p1, "em-eval", beta_file]) == 0
    assert main(["--out", p2, "em-eval", beta_file]) == 0
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_seed_recorded(beta_file, capsys):
    assert main(["--seed", "42", "newton", beta_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["seed"] == 42


def test_schema_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["newton", str(bad)]) == 1
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"factors": []}))
    assert main(["newton", str(missing)]) == 1
    err = capsys.readouterr().err
    assert "SchemaError" in err


def test_precondition_exit_2(tmp_path, capsys):
    prob = dict(BETA_PROBLEM)
    prob["s"] = [[1.5, 0.0]]  # margin t - s < 0
    p = tmp_path / "p.json"
    p.write_text(json.dumps(prob))
    assert main(["em-eval", str(p)]) == 2
    assert "NotInConvergenceDomain" in capsys.readouterr().err


def test_coamoeba_univariate(beta_file, capsys):
    assert main(["coamoeba", beta_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n_vars"] == 1
    assert len(out["arcs"]) == 1


def test_coamoeba_2d_pgm(gauss_file, tmp_path, capsys):
    stem = str(tmp_path / "raster")
    assert main(["--out", stem, "--resolution", "128", "coamoeba", gauss_file]) == 0
    out = json.loads(open(stem).read())
    assert out["resolution"] == 128
    pgm = open(stem + ".pgm").read().split("\n")
    assert pgm[0] == "P2"
    assert pgm[1] == "128 128"


def test_gale_subcommand(gauss_file, capsys):
    assert main(["gale", gauss_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["g_A"] == 1
    B = out["B"]
    assert len(B) == 4 and len(B[0]) == 1


def test_em_mb_check_subcommand(gauss_file, capsys):
    assert main(["em-mb-check", gauss_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["residual"] <= 1e-5


def test_continue_plan_and_phi(tmp_path, capsys):
    prob = {
        "n_vars": 1,
        "factors": [
            {
                "n_vars": 1,
                "terms": [
                    {"exp": [0], "coeff": [1.0, 0.0]},
                    {"exp": [1], "coeff": [1.0, 0.0]},
                ],
            }
        ],
        "s": [[-1.5, 0.0]],
        "t": [[1.0, 0.0]],
        "theta": [0.0],
    }
    p = tmp_path / "c.json"
    p.write_text(json.dumps(prob))
    assert main(["continue-plan", str(p)]) == 0
    plan_out = json.loads(capsys.readouterr().out)
    assert plan_out["final_terms"] >= 1
    assert main(["phi-eval", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    re, im = out["values"][0]
    # Phi(-1.5, 1) = 1/Gamma(1) * M * rgamma... = sin-reflection based value
    ref = math.pi / math.sin(math.pi * -1.5)  # M; Phi = M/(Gamma(s)Gamma(t-s))
    # direct check: Phi = 1/Gamma(t) = 1 for f = 1+z
    assert abs(complex(re, im) - 1.0) < 1e-6


def test_examples_list(capsys):
    assert main(["examples", "list"]) == 0
    names = capsys.readouterr().out.split()
    assert "beta" in names and "loop-gauss" in names
    assert len(names) == 8


def test_examples_run_beta(capsys):
    assert main(["examples", "run", "beta"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_examples_unknown_name(capsys):
    assert main(["examples", "run", "nope"]) == 1
