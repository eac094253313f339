"""End-to-end harness checks: exit codes, CSV layout, reproducibility."""

import math
import subprocess
import sys

import pytest

ATOMS = "atoms:(1,0.5);(-1,0.5)"


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "kinetic_eikonal", *args],
                          capture_output=True, text=True)


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


@pytest.fixture(scope="module")
def kinetic_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("kin")
    proc = run_cli("kinetic", "--model", "uniform:vmax=1,n=16", "--eps", "0.25",
                   "--nx", "64", "--t", "0.5", "--snapshots", "3",
                   "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="module")
def compare_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cmp")
    proc = run_cli("compare", "--model", "coth:vmax=1", "--nx", "64",
                   "--t", "0.5", "--snapshots", "2", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    return out


def test_two_atom_table_bytes(tmp_path):
    proc = run_cli("hamiltonian", "--model", ATOMS, "--p-min", "0",
                   "--p-max", "0", "--np", "1", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "h_table.csv").read_text() == "p,H,dH,d2H\n0.0,0.0,0.0,2.0\n"


def test_hamiltonian_table_layout(tmp_path):
    proc = run_cli("hamiltonian", "--model", "coth:vmax=1", "--np", "41",
                   "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    header, rows = read_rows(tmp_path / "h_table.csv")
    assert header == "p,H,dH,d2H"
    assert len(rows) == 41
    p = [float(r[0]) for r in rows]
    assert p == sorted(p)
    mid = rows[20]
    assert mid[0] == "0.0" and mid[1] == "0.0" and mid[2] == "0.0"


def test_legendre_table_layout(tmp_path):
    proc = run_cli("legendre", "--model", "coth:vmax=1", "--nq", "41",
                   "--p-span", "8", "--np", "801", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    header, rows = read_rows(tmp_path / "legendre.csv")
    assert header == "q,L"
    assert rows[20][0] == "0.0"
    assert abs(float(rows[20][1])) <= 1e-12
    q = [float(r[0]) for r in rows]
    assert q == sorted(q)


def test_repeat_runs_are_byte_identical(tmp_path):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        proc = run_cli("converge", "--model", "uniform:vmax=1,n=16",
                       "--eps", "0.5,0.25,0.125", "--nx", "100", "--t", "0.5",
                       "--out", str(d))
        assert proc.returncode == 0, proc.stderr
    a = (dirs[0] / "converge.csv").read_bytes()
    b = (dirs[1] / "converge.csv").read_bytes()
    assert a == b
    header, rows = read_rows(dirs[0] / "converge.csv")
    assert header == "eps,sup_error"
    assert [float(r[0]) for r in rows] == [0.5, 0.25, 0.125]


def test_rejects_invalid_arguments(tmp_path):
    cases = [
        ("hj", "--model", "coth:vmax=1", "--nx", "4"),
        ("legendre", "--model", "coth:vmax=1", "--nq", "200"),
        ("kinetic", "--model", "coth:vmax=1"),
        ("hamiltonian", "--model", "garbage"),
        ("converge", "--model", "uniform:vmax=1,n=16", "--eps", "a,b,c"),
        ("hj", "--model", "coth:vmax=1", "--t", "-1"),
    ]
    for case in cases:
        proc = run_cli(*case, "--out", str(tmp_path))
        assert proc.returncode == 2, (case, proc.stderr)
        assert proc.stderr.strip()


def test_unknown_flag_exits_2(tmp_path):
    proc = run_cli("hj", "--model", "coth:vmax=1", "--frobnicate",
                   "--out", str(tmp_path))
    assert proc.returncode == 2


def test_unresolvable_point_exits_3_without_partial_output(tmp_path):
    out = tmp_path / "deep"
    proc = run_cli("hamiltonian", "--model", "uniform:vmax=1,n=32",
                   "--p-min", "40", "--p-max", "40", "--np", "1",
                   "--out", str(out))
    assert proc.returncode == 3
    assert "numerical failure" in proc.stderr
    assert not (out / "h_table.csv").exists()


def test_kinetic_emits_three_files(kinetic_run):
    names = sorted(p.name for p in kinetic_run.iterdir())
    assert names == ["bounds.csv", "kinetic_final.csv", "macro_series.csv"]


def test_kinetic_final_is_x_major(kinetic_run):
    header, rows = read_rows(kinetic_run / "kinetic_final.csv")
    assert header == "x,v,phi"
    assert len(rows) == 64 * 16
    first_block = rows[:16]
    assert len({r[0] for r in first_block}) == 1  # one x, all v nodes
    v = [float(r[1]) for r in first_block]
    assert v == sorted(v)


def test_macro_series_is_t_major(kinetic_run):
    header, rows = read_rows(kinetic_run / "macro_series.csv")
    assert header == "t,x,phi_macro"
    assert len(rows) == 3 * 64
    t = [float(r[0]) for r in rows]
    assert t == sorted(t)
    assert t[0] == 0.0 and t[-1] == 0.5


def test_bounds_table_clean_run(kinetic_run):
    header, rows = read_rows(kinetic_run / "bounds.csv")
    assert header == "t,min_phi,max_phi,lip_x,rate_t,lip_v,violations"
    assert len(rows) == 3
    assert [r[6] for r in rows] == ["0", "0", "0"]
    assert math.isnan(float(rows[0][4]))      # no rate on the first snapshot
    assert not math.isnan(float(rows[1][4]))
    assert not math.isnan(float(rows[0][5]))  # continuous model has lip_v


def test_bounds_subcommand_writes_only_bounds(tmp_path):
    proc = run_cli("bounds", "--model", ATOMS, "--eps", "0.25", "--nx", "64",
                   "--t", "0.5", "--snapshots", "3", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bounds.csv"]
    _, rows = read_rows(tmp_path / "bounds.csv")
    assert all(math.isnan(float(r[5])) for r in rows)  # atoms carry no lip_v
    assert [r[6] for r in rows] == ["0", "0", "0"]


def test_compare_twins_share_start_then_split(compare_run):
    ha, rows_a = read_rows(compare_run / "hj_kinetic.csv")
    hb, rows_b = read_rows(compare_run / "hj_classical.csv")
    assert ha == hb == "t,x,phi"
    n = 64
    assert rows_a[:n] == rows_b[:n]          # t = 0 rows byte-identical
    final_a = [float(r[2]) for r in rows_a[n:]]
    final_b = [float(r[2]) for r in rows_b[n:]]
    gap = max(abs(a - b) for a, b in zip(final_a, final_b))
    assert gap > 1e-2


def test_hj_series_layout(tmp_path):
    proc = run_cli("hj", "--model", "coth:vmax=1", "--nx", "64", "--t", "0.5",
                   "--snapshots", "3", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    header, rows = read_rows(tmp_path / "hj_series.csv")
    assert header == "t,x,phi"
    assert len(rows) == 3 * 64
    for k in range(3):
        block = rows[k * 64:(k + 1) * 64]
        assert len({r[0] for r in block}) == 1
        x = [float(r[1]) for r in block]
        assert x == sorted(x)
