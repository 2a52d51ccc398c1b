import importlib.util
from pathlib import Path

BENCH = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernel.py"


def test_benchmark_runs(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernel", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--rows", "50", "700", "--trees", "5"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[0] == "rows"
    assert [line.split()[0] for line in lines[1:]] == ["50", "700"]
