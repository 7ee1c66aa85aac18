import json

import pytest

from gdet import cache as cache_mod
from gdet import cli

BUDGET = str(1 << 30)


def run(capsys, *argv):
    rc = cli.main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def test_terms_csv(capsys):
    rc, out, _ = run(capsys, "terms", "--n", "5", "--k-max", "10",
                     "--format", "csv", "--budget", BUDGET)
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n\\k," + ",".join(str(k) for k in range(1, 11))
    assert lines[1] == ("5,26,201,776,2126,4751,9276,16451,27151,"
                       "42376,63251")


def test_terms_trivial(capsys):
    rc, out, _ = run(capsys, "terms", "--n", "1", "--k-max", "3",
                     "--format", "csv")
    assert rc == 0
    assert out.strip().splitlines()[1] == "1,1,1,1"


def test_terms_json(capsys):
    rc, out, _ = run(capsys, "terms", "--n", "4", "--k-max", "2",
                     "--format", "json", "--budget", BUDGET)
    assert rc == 0
    rows = json.loads(out)
    assert {"n": 4, "k": 1, "value": 10, "exact": True} in rows
    assert {"n": 4, "k": 2, "value": 43, "exact": True} in rows


def test_partitions_table(capsys):
    rc, out, _ = run(capsys, "partitions", "--n-max", "9", "--k-max", "10",
                     "--format", "csv")
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[6].startswith("6,80,1038,5620,")
    assert lines[9].endswith("17485161178")


def test_group_terms(capsys):
    rc, out, _ = run(capsys, "group-terms", "--name", "C_8",
                     "--format", "json", "--budget", BUDGET)
    assert rc == 0
    d = json.loads(out)
    assert d["terms"] == 810 and d["exact"] is True


def test_check_single_prime(capsys):
    rc, out, _ = run(capsys, "check", "--p", "16843")
    assert rc == 0
    assert "Wolstenholme prime: yes" in out


def test_scan(capsys):
    rc, out, _ = run(capsys, "scan", "16800", "16900", "--format", "json")
    assert rc == 0
    d = json.loads(out)
    assert d["wolstenholme_primes"] == [16843]


def test_catalog(capsys):
    rc, out, _ = run(capsys, "catalog", "--format", "json")
    assert rc == 0
    assert len(json.loads(out)) == 14


def test_verify_suites(capsys):
    for suite in ("oracle", "theorems"):
        rc, out, _ = run(capsys, "verify", suite, "--budget", BUDGET)
        assert rc == 0, out
        assert "PASS" in out


def test_usage_errors(capsys):
    assert run(capsys, "terms", "--n", "99")[0] == cli.EXIT_USAGE
    assert run(capsys, "nonsense")[0] == cli.EXIT_USAGE
    assert run(capsys, "check")[0] == cli.EXIT_USAGE
    assert run(capsys, "terms", "--n", "3", "--budget", "1000")[0] == \
        cli.EXIT_USAGE
    assert run(capsys, "group-terms", "--name", "E_9",
               "--budget", BUDGET)[0] == cli.EXIT_USAGE


def test_resource_exhaustion_exit_code(capsys):
    rc, out, err = run(capsys, "terms", "--n", "7", "--k-max", "10",
                       "--format", "csv", "--budget", str(256 << 20))
    assert rc == cli.EXIT_RESOURCE
    lines = out.strip().splitlines()
    assert lines[1].startswith("7,246,")
    assert lines[1].endswith("*")  # incomplete cells marked


def test_warm_cache_no_multiplications(capsys, tmp_path):
    cdir = str(tmp_path / "cache")
    args = ("terms", "--n", "6", "--k-max", "5", "--format", "csv",
            "--budget", BUDGET, "--cache", cdir)
    rc1, out1, _ = run(capsys, *args)
    assert rc1 == 0
    cache_mod.reset_multiplications()
    rc2, out2, _ = run(capsys, *args)
    assert rc2 == 0
    assert out2 == out1
    assert cache_mod.multiplications() == 0


def test_csv_determinism_across_jobs(capsys, tmp_path):
    outs = []
    for jobs in ("1", "4"):
        rc, out, _ = run(capsys, "terms", "--n", "6", "--k-max", "6",
                         "--format", "csv", "--budget", BUDGET,
                         "--jobs", jobs)
        assert rc == 0
        outs.append(out)
    assert outs[0] == outs[1]
