"""
Smoke checks for a MOEDA install - v1.0
Runs each stage on the shipped C17 bench and prints PASSED/FAILED.
"""
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def test_library():
    print("=" * 60)
    print("TEST 1: Synthetic Library")
    print("=" * 60)
    try:
        from moeda.core.library import (
            ScalingProfile, generate_synthetic_library, variants_of
        )

        lib = generate_synthetic_library(ScalingProfile(), {("NAND", 2), ("NOT", 1)})
        ladder = variants_of(lib, "NOT", 1)
        print(f"  {lib.name}: {len(lib.functions)} functions, V={lib.voltage}V")
        print(f"  Inverter ladder: {' '.join(v.strength_label for v in ladder)}")

        assert len(ladder) == 11, f"Wrong ladder size: {len(ladder)}"
        assert all(a.drive_resistance > b.drive_resistance
                   for a, b in zip(ladder, ladder[1:])), "R must fall with strength"
        print("  PASSED")
        return True
    except Exception as e:
        print(f"  FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


def test_netlist():
    print("\n" + "=" * 60)
    print("TEST 2: Netlist")
    print("=" * 60)
    try:
        from moeda.config import BENCH_DIR
        from moeda.core.netlist import read_bench, topological_order

        netlist = read_bench(BENCH_DIR / "c17.bench")
        order = topological_order(netlist)
        print(f"  c17: {len(netlist.primary_inputs)} inputs, "
              f"{len(netlist.primary_outputs)} outputs, {len(netlist.gates)} gates")
        print(f"  Order: {' '.join(netlist.gates[i].name for i in order)}")

        assert len(netlist.gates) == 6
        print("  PASSED")
        return True
    except Exception as e:
        print(f"  FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


def test_evaluator():
    print("\n" + "=" * 60)
    print("TEST 3: Evaluator")
    print("=" * 60)
    try:
        from moeda.config import BENCH_DIR
        from moeda.core.evaluator import TimingScenario, assess, evaluate
        from moeda.core.library import ScalingProfile, generate_synthetic_library
        from moeda.core.netlist import (
            extract_chromosome, map_to_library, read_bench, required_cells
        )

        netlist = read_bench(BENCH_DIR / "c17.bench")
        lib = generate_synthetic_library(ScalingProfile(), required_cells(netlist))
        design = map_to_library(netlist, lib)
        scenario = TimingScenario.from_constraints(4e-9, 0.0)
        chromosome = extract_chromosome(design)
        ev = assess(design, chromosome, scenario)
        fast = evaluate(design, chromosome, scenario)
        print(f"  D_wc = {ev.d_wc * 1e9:.4f} ns (WNS {ev.wns * 1e9:.4f} ns)")
        print(f"  P = {ev.p_total * 1e6:.4f} uW "
              f"(sw {ev.switching * 1e6:.4f}, int {ev.internal * 1e6:.4f}, "
              f"leak {ev.leakage * 1e6:.4f})")
        print(f"  A = {ev.a_gate:.2f} um2")

        assert ev.timing_met
        assert abs(fast.d_wc - ev.d_wc) <= 1e-9 * ev.d_wc
        print("  PASSED")
        return True
    except Exception as e:
        print(f"  FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


def test_single_seed():
    print("\n" + "=" * 60)
    print("TEST 4: Single-Seed Optimisation")
    print("=" * 60)
    try:
        from moeda.config import BENCH_DIR
        from moeda.pipelines.explorer import ExperimentSpec, run_single_seed

        spec = ExperimentSpec(benchmark=str(BENCH_DIR / "c17.bench"), output_load="D1",
                              population_size=20, generations=10, mutation_rate=0.2)
        archive = run_single_seed(spec)
        summary = archive.summary
        print(f"  Seed T_r = {archive.seeds[0].required_time * 1e9:.3f} ns")
        print(f"  Pareto front: {len(archive.pareto_ids)} of {len(archive.final)}")
        print(f"  HV frontier {summary['hv_frontier']:.4g} -> final {summary['hv_final']:.4g}")
        for name, hit in summary["best"].items():
            text = "none" if hit is None else f"#{hit['id']} {hit['improvement']:.2%}"
            print(f"  Best {name}: {text}")

        assert len(archive.history) == 10
        assert archive.tradeoff_id in archive.pareto_ids
        print("  PASSED")
        return True
    except Exception as e:
        print(f"  FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


def test_archive():
    print("\n" + "=" * 60)
    print("TEST 5: Archive Export")
    print("=" * 60)
    try:
        from moeda.config import BENCH_DIR
        from moeda.pipelines.explorer import (
            ExperimentSpec, export_results, load_archive, run_multi_seed
        )

        spec = ExperimentSpec(benchmark=str(BENCH_DIR / "rca2.bench"), mode="multi",
                              tr_max=1e-9, tr_min=0.2e-9, steps=5, seed_copies=2,
                              generations=5, mutation_rate=0.1)
        archive = run_multi_seed(spec)
        with tempfile.TemporaryDirectory() as tmp:
            written = export_results(archive, tmp)
            again = load_archive(tmp)
            print(f"  Wrote {len(written)} files")
            print(f"  Survivors: {archive.summary['survivors']}")
            assert len(again.final) == len(archive.final)
        print("  PASSED")
        return True
    except Exception as e:
        print(f"  FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


def main():
    print()
    print("=" * 60)
    print("  MOEDA v1.0 - SETUP CHECK")
    print("=" * 60)

    tests = [
        ("Synthetic Library", test_library),
        ("Netlist", test_netlist),
        ("Evaluator", test_evaluator),
        ("Single-Seed Optimisation", test_single_seed),
        ("Archive Export", test_archive),
    ]

    results = []
    for name, test_fn in tests:
        try:
            passed = test_fn()
        except Exception as e:
            print(f"  CRASHED: {e}")
            passed = False
        results.append((name, passed))

    print("\n" + "=" * 60)
    print("  RESULTS")
    print("=" * 60)

    for name, passed in results:
        status = "PASS" if passed else "FAIL"
        print(f"  {name}: {status}")

    n_passed = sum(1 for _, p in results if p)
    n_total = len(results)
    print(f"\n  Total: {n_passed}/{n_total} passed")

    if n_passed == n_total:
        print("\n  ALL CHECKS PASSED!")
    else:
        print("\n  Some checks failed - check output above")

    print("=" * 60)
    return 0 if n_passed == n_total else 1


if __name__ == "__main__":
    sys.exit(main())
