import subprocess
import sys

import pytest

from expander_cs import load_graph, load_signal, load_sketch, save_signal, save_sketch
from expander_cs.cli import main
from expander_cs.sketch import Sketch, SparseSignal

# suggest_params(16, 3, 1/8): certified desk-scale graph
GEN_ARGS = ["gen-graph", "--n", "16", "--m", "1125", "--d", "18", "--seed", "1"]


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    assert main(GEN_ARGS + ["-o", str(path)]) == 0
    return path


class TestGenGraph:
    def test_writes_loadable_graph(self, graph_file):
        g = load_graph(graph_file)
        assert (g.n, g.m, g.d) == (16, 1125, 18)

    def test_byte_identical_repeats(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        main(GEN_ARGS + ["-o", str(a)])
        main(GEN_ARGS + ["-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_right_regular_flag(self, tmp_path):
        path = tmp_path / "g.txt"
        code = main(
            ["gen-graph", "--n", "8", "--m", "4", "--d", "2", "--seed", "3",
             "--right-regular", "-o", str(path)]
        )
        assert code == 0
        assert load_graph(path).right_degree == 4

    def test_invalid_params_exit_2(self, tmp_path):
        code = main(
            ["gen-graph", "--n", "4", "--m", "2", "--d", "3", "--seed", "0",
             "-o", str(tmp_path / "g.txt")]
        )
        assert code == 2
        assert not (tmp_path / "g.txt").exists()


class TestCheckExpansion:
    def test_verified_output(self, graph_file, capsys):
        code = main(
            ["check-expansion", "--graph", str(graph_file), "--s-max", "3",
             "--epsilon", "0.125"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "verified true" in out
        assert "mode exhaustive" in out

    def test_budget_exit_3(self, graph_file, monkeypatch):
        monkeypatch.setenv("EXPANDER_CS_BUDGET", "1000")
        code = main(
            ["check-expansion", "--graph", str(graph_file), "--s-max", "16",
             "--epsilon", "0.125"]
        )
        assert code == 3

    def test_sampled_mode(self, graph_file, capsys):
        code = main(
            ["check-expansion", "--graph", str(graph_file), "--s-max", "16",
             "--epsilon", "0.125", "--sample", "200"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "mode sampled" in out
        assert "verified false" in out
        assert "falsified false" in out

    def test_missing_graph_exit_2(self, tmp_path):
        code = main(
            ["check-expansion", "--graph", str(tmp_path / "none.txt"),
             "--s-max", "2", "--epsilon", "0.125"]
        )
        assert code == 2


class TestSketchRecoverRoundTrip:
    def test_round_trip(self, graph_file, tmp_path):
        signal_path = tmp_path / "x.txt"
        sketch_path = tmp_path / "y.txt"
        out_path = tmp_path / "xhat.txt"
        save_signal(SparseSignal(16, {3: 7.0, 11: -2.0}), signal_path)
        assert main(
            ["sketch", "--graph", str(graph_file), "--signal", str(signal_path),
             "-o", str(sketch_path)]
        ) == 0
        assert main(
            ["recover", "--graph", str(graph_file), "--sketch", str(sketch_path),
             "-o", str(out_path)]
        ) == 0
        assert load_signal(out_path) == load_signal(signal_path)

    def test_trace_file(self, graph_file, tmp_path):
        signal_path = tmp_path / "x.txt"
        sketch_path = tmp_path / "y.txt"
        trace_path = tmp_path / "trace.csv"
        save_signal(SparseSignal(16, {3: 7.0}), signal_path)
        main(["sketch", "--graph", str(graph_file), "--signal", str(signal_path),
              "-o", str(sketch_path)])
        main(["recover", "--graph", str(graph_file), "--sketch", str(sketch_path),
              "--trace", str(trace_path), "-o", str(tmp_path / "out.txt")])
        lines = trace_path.read_text().strip().split("\n")
        assert lines[0] == "iter,node,value,gap_support_before,gap_support_after"
        assert lines[1].startswith("1,3,7,")

    def test_stuck_exit_1_no_output(self, tmp_path):
        graph_path = tmp_path / "g.txt"
        main(["gen-graph", "--n", "4", "--m", "8", "--d", "2", "--seed", "0",
              "-o", str(graph_path)])
        g = load_graph(graph_path)
        # inconsistent sketch: no 1-sparse preimage, decoder gets stuck
        values = [0.0] * 8
        values[g.adjacency[0][0]] = 5.0
        values[g.adjacency[0][1]] = 4.0
        sketch_path = tmp_path / "y.txt"
        save_sketch(Sketch(8, values), sketch_path)
        out = tmp_path / "xhat.txt"
        trace = tmp_path / "trace.csv"
        code = main(["recover", "--graph", str(graph_path), "--sketch",
                     str(sketch_path), "--trace", str(trace), "-o", str(out)])
        assert code == 1
        assert not out.exists()
        assert not trace.exists()

    def test_majority_algorithm_flag(self, graph_file, tmp_path):
        signal_path = tmp_path / "x.txt"
        sketch_path = tmp_path / "y.txt"
        save_signal(SparseSignal(16, {5: 3.0}), signal_path)
        main(["sketch", "--graph", str(graph_file), "--signal", str(signal_path),
              "-o", str(sketch_path)])
        code = main(["recover", "--graph", str(graph_file), "--sketch",
                     str(sketch_path), "--algorithm", "majority",
                     "-o", str(tmp_path / "out.txt")])
        assert code == 0


class TestRecoverRobust:
    def test_full_flow(self, tmp_path, capsys):
        graph_path = tmp_path / "g.txt"
        main(["gen-graph", "--n", "64", "--m", "512", "--d", "16", "--seed", "4",
              "--right-regular", "-o", str(graph_path)])
        g = load_graph(graph_path)
        from expander_cs import AlmostSparseModel, encode, gen_almost_sparse

        model = AlmostSparseModel(2, 1e-4, 1000.0, 1.0, g.right_degree)
        truth = gen_almost_sparse(model, 64, 9)
        sketch_path = tmp_path / "y.txt"
        save_sketch(encode(g, truth), sketch_path)
        out = tmp_path / "v.txt"
        code = main(
            ["recover-robust", "--graph", str(graph_path), "--sketch",
             str(sketch_path), "--k", "2", "--lambda", "1e-4", "--big-l", "1000",
             "--delta", "1", "--epsilon", "0.21875", "-o", str(out)]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.startswith("support ")
        assert "residual_l1 " in printed
        assert "support_error_bound " in printed
        refined = load_signal(out)
        lo, _ = model.significant_band()
        expected = {j for j, v in truth.entries.items() if abs(v) >= lo}
        assert set(refined.entries) == expected

    def test_requires_right_regular_graph(self, graph_file, tmp_path):
        sketch_path = tmp_path / "y.txt"
        save_sketch(Sketch(1125, [0.0] * 1125), sketch_path)
        code = main(
            ["recover-robust", "--graph", str(graph_file), "--sketch",
             str(sketch_path), "--k", "1", "--lambda", "0", "--big-l", "10",
             "--delta", "0", "-o", str(tmp_path / "v.txt")]
        )
        assert code == 2


class TestBenchCommand:
    def test_csv_output(self, tmp_path):
        spec = tmp_path / "spec.txt"
        spec.write_text(
            "decoder = fast\nn = 16\nm = 1125\nd = 18\nk = 1\n"
            "epsilon = 0.125\ntrials = 3\nseed_base = 5\n"
        )
        out = tmp_path / "report.csv"
        assert main(["bench", "--spec", str(spec), "-o", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("decoder,n,m,d,k,epsilon")

    def test_no_timing_reproducible(self, tmp_path):
        spec = tmp_path / "spec.txt"
        spec.write_text(
            "decoder = fast\nn = 16\nm = 1125\nd = 18\nk = 1\n"
            "epsilon = 0.125\ntrials = 3\nseed_base = 5\n"
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["bench", "--spec", str(spec), "--no-timing", "-o", str(a)])
        main(["bench", "--spec", str(spec), "--no-timing", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_bad_spec_exit_2(self, tmp_path):
        spec = tmp_path / "spec.txt"
        spec.write_text("nonsense\n")
        code = main(["bench", "--spec", str(spec), "-o", str(tmp_path / "r.csv")])
        assert code == 2


class TestDispatch:
    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as info:
            main(["--help"])
        assert info.value.code == 0

    def test_subcommand_help_exits_zero(self):
        with pytest.raises(SystemExit) as info:
            main(["recover", "--help"])
        assert info.value.code == 0

    def test_missing_flag_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main(["gen-graph", "--n", "4"])
        assert info.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main(GEN_ARGS + ["--frobnicate"])
        assert info.value.code == 2

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "g.txt"
        result = subprocess.run(
            [sys.executable, "-m", "expander_cs"] + GEN_ARGS + ["-o", str(out)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert out.exists()
