from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from querysculpt.cli import EXIT_CAP, EXIT_NOINPUT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from querysculpt.core import emit_bf, emit_json, named_function


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, n in (("OR", 4), ("PARITY", 9), ("MAJORITY", 3), ("PARITY", 12), ("OR", 10)):
        p = tmp_path / f"{name.lower()}{n}.bf"
        p.write_text(emit_bf(named_function(name, n)))
        out[f"{name.lower()}{n}"] = str(p)
    j = tmp_path / "or4.json"
    j.write_text(emit_json(named_function("OR", 4)))
    out["or4json"] = str(j)
    g = tmp_path / "gadget.bf"
    g.write_text("n=2\n10*1\n")
    out["gadget"] = str(g)
    s = tmp_path / "strings.txt"
    s.write_text("\n".join(format(i, "04b") for i in range(16)) + "\n")
    out["strings"] = str(s)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


class TestMeasureAndSweep:
    def test_measure_or4(self, capsys, files):
        code, out, _ = run(capsys, "measure", "--in", files["or4"], "--out", "-")
        d = json.loads(out)
        assert code == EXIT_OK and (d["D"], d["C"], d["HiC"]) == (4, 4, 1)

    def test_json_input_and_out_file(self, capsys, files, tmp_path):
        target = tmp_path / "rep.json"
        code, out, _ = run(capsys, "measure", "--in", files["or4json"], "--out", str(target))
        assert code == EXIT_OK and out == "" and json.loads(target.read_text())["C"] == 4

    def test_sweep_csv(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "all:2,named:OR:3,random:3:2:5")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == EXIT_OK and rows[0][0] == "function_id" and len(rows) == 1 + 16 + 1 + 2
        assert any(r[0] == "OR_3" and r[2] == "3" for r in rows)

    def test_sweep_is_deterministic_across_jobs(self, capsys):
        _, a, _ = run(capsys, "sweep", "--family", "random:5:6:1")
        _, b, _ = run(capsys, "sweep", "--family", "random:5:6:1", "--jobs", "2")
        assert a == b

    def test_hindex(self, capsys, files):
        code, out, _ = run(capsys, "hindex", "--in", files["parity9"], "--selector", "scaled:C:1/3")
        assert code == EXIT_OK and json.loads(out)["exact"] == "3"


class TestSculptCommands:
    def test_sculpt_r0r_parity9(self, capsys, files):
        code, out, _ = run(capsys, "sculpt", "r0r", "--in", files["parity9"])
        d = json.loads(out)
        assert code == EXIT_OK and d["case_tag"] == "case1"

    def test_sculpt_gadget(self, capsys, files):
        code, out, _ = run(capsys, "sculpt", "gadget", "--in", files["parity12"], "--gadget",
                           files["gadget"], "--rc-threshold", "4")
        assert code == EXIT_OK and json.loads(out)["case_tag"] == "gadget"

    def test_sculpt_gadget_refusal(self, capsys, files):
        code, out, _ = run(capsys, "sculpt", "gadget", "--in", files["or10"], "--gadget",
                           files["gadget"], "--rc-threshold", "4")
        assert code == EXIT_VIOLATION and json.loads(out)["refused"]

    def test_sculpt_gadget_parameters(self, capsys, files):
        code, out, _ = run(capsys, "sculpt", "gadget", "--in", files["parity12"], "--parameters")
        assert code == EXIT_OK and json.loads(out)["a_max"] == 0

    def test_gadget_flags_required(self, capsys, files):
        code, _, err = run(capsys, "sculpt", "gadget", "--in", files["parity12"])
        assert code == EXIT_USAGE and "--gadget" in err

    def test_shatter(self, capsys, files):
        code, out, _ = run(capsys, "shatter", "--in", files["strings"], "--max")
        d = json.loads(out)
        assert code == EXIT_OK and d["max_shattered_size"] == 4 and d["guaranteed_size"] == 2


class TestRunOracleGadget:
    def test_run_single_input_has_transcript(self, capsys, files):
        code, out, _ = run(capsys, "run", "majority", "--in", files["or4"], "--input", "0100", "--seed", "3")
        d = json.loads(out)
        assert code == EXIT_OK and d["inputs"][0]["transcripts"][0]["seed"] == 3

    @pytest.mark.parametrize("algo", ["deterministic", "probe", "hybrid"])
    def test_run_all_inputs(self, capsys, files, algo):
        code, out, _ = run(capsys, "run", algo, "--in", files["or4"])
        assert code == EXIT_OK and len(json.loads(out)["inputs"]) == 16

    def test_tree_chain_needs_small_arity(self, capsys, files):
        assert run(capsys, "run", "tree-chain", "--in", files["majority3"])[0] == EXIT_OK
        assert run(capsys, "run", "tree-chain", "--in", files["or4"])[0] == EXIT_CAP

    def test_bad_input_string(self, capsys, files):
        assert run(capsys, "run", "majority", "--in", files["or4"], "--input", "01")[0] == EXIT_USAGE

    def test_oracles(self, capsys, files):
        code, out, _ = run(capsys, "oracle", "r", "--in", files["majority3"])
        assert code == EXIT_OK and json.loads(out)["R"] == 1
        code, out, _ = run(capsys, "oracle", "r0", "--in", files["majority3"])
        assert code == EXIT_OK and json.loads(out)["R0"] == "8/3"
        code, out, _ = run(capsys, "oracle", "rc", "--in", files["majority3"], "--input", "011")
        assert json.loads(out)["RC"]["011"] == "2/1"

    def test_oracle_cap(self, capsys, files):
        assert run(capsys, "oracle", "r", "--in", files["or4"])[0] == EXIT_CAP

    def test_gadget_eq_and_vis(self, capsys):
        code, out, _ = run(capsys, "gadget", "eq", "--trials", "100")
        assert code == EXIT_OK and json.loads(out)["errors"] == 0
        code, out, _ = run(capsys, "gadget", "vis", "--n", "8", "--trials", "3", "--side", "in-H")
        assert code == EXIT_OK and json.loads(out)["sides"]["in-H"]["correct"] == 3


class TestVerifyAndContract:
    def test_verify_list(self, capsys):
        code, out, _ = run(capsys, "verify", "list")
        assert code == EXIT_OK and "chain-n3" in json.loads(out)

    def test_verify_chain_n3_reports_violations(self, capsys):
        code, out, _ = run(capsys, "verify", "chain-n3")
        assert code == EXIT_VIOLATION and json.loads(out)["violations"] == 152

    def test_verify_csv_with_params(self, capsys):
        code, out, _ = run(capsys, "verify", "shatter", "--param", "sets=20", "--param", "sauer_sets=5", "--csv")
        assert code == EXIT_OK and out.startswith("suite,check")

    def test_dry_run_computes_nothing(self, capsys, files):
        code, out, _ = run(capsys, "verify", "hybrid-n4", "--dry-run")
        assert code == EXIT_OK and json.loads(out)["dry_run"]
        code, out, _ = run(capsys, "sculpt", "r0r", "--in", files["parity9"], "--dry-run")
        assert code == EXIT_OK and json.loads(out)["n"] == 9

    def test_usage_errors(self, capsys, files):
        assert run(capsys, "measure", "--bogus")[0] == EXIT_USAGE
        assert run(capsys, "frobnicate")[0] == EXIT_USAGE
        assert run(capsys, "verify", "nope")[0] == EXIT_USAGE
        assert run(capsys, "sweep", "--family", "weird:1")[0] == EXIT_USAGE
        assert run(capsys, "hindex", "--in", files["or4"], "--selector", "zz")[0] == EXIT_USAGE
        assert run(capsys, "measure", "--in", files["or4"], "--jobs", "0")[0] == EXIT_USAGE

    def test_file_errors(self, capsys, files, tmp_path):
        assert run(capsys, "measure", "--in", str(tmp_path / "missing.bf"))[0] == EXIT_NOINPUT
        bad = tmp_path / "bad.bf"
        bad.write_text("n=2\n10\n")
        assert run(capsys, "measure", "--in", str(bad))[0] == EXIT_NOINPUT

    def test_cap_override_warns(self, capsys, files):
        code, _, err = run(capsys, "oracle", "r", "--in", files["or4"], "--cap-n", "4", "--dry-run")
        assert code == EXIT_OK and "warning" in err
        assert run(capsys, "measure", "--in", files["parity9"], "--cap-n", "4")[0] == EXIT_CAP

    def test_module_entry_point(self, files):
        proc = subprocess.run([sys.executable, "-m", "querysculpt", "measure", "--in", files["or4"],
                               "--no-d"], capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(proc.stdout)["C"] == 4
