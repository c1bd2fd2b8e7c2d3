"""
Quantile Encoder Bench - Test Suite Runner
Runs every test module in its own process and reports results.
"""

import sys
import subprocess
from pathlib import Path

# Determine tool root
SCRIPT_DIR = Path(__file__).parent.parent
sys.path.insert(0, str(SCRIPT_DIR))

SUITES = [
    ("Encoders", "tests/test_encoders.py", 300),
    ("Elastic Net", "tests/test_regression.py", 300),
    ("Statistics", "tests/test_stats.py", 120),
    ("Datasets", "tests/test_data.py", 120),
    ("Cross-Validation", "tests/test_evaluation.py", 900),
    ("Reports", "tests/test_report.py", 300),
    ("Configuration", "tests/test_config.py", 120),
    ("Logging", "tests/test_logger.py", 60),
    ("Command Line", "tests/test_cli.py", 900),
    ("Experiments", "tests/test_experiments.py", 300),
]


def run_suite(name: str, path: str, timeout: int) -> str:
    """Run one test module through pytest; returns PASS, FAIL or SKIP."""
    if not (SCRIPT_DIR / path).exists():
        print(f"[SKIP] {name}: {path} not found\n")
        return "SKIP"
    try:
        result = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", path],
            capture_output=True,
            text=True,
            timeout=timeout,
            cwd=str(SCRIPT_DIR)
        )
    except subprocess.TimeoutExpired:
        print(f"[FAILED] {name} tests timed out\n")
        return "FAIL"
    except Exception as e:
        print(f"[FAILED] {name} tests failed: {e}\n")
        return "FAIL"

    if result.returncode == 0:
        print(f"[SUCCESS] {name} tests passed\n")
        return "PASS"
    print(result.stdout)
    print(result.stderr)
    print(f"[FAILED] {name} tests failed\n")
    return "FAIL"


def run_all_tests():
    """Run all test suites"""
    print("=" * 70)
    print("Quantile Encoder Bench - Test Suite")
    print("=" * 70)
    print()

    test_suites = []
    for i, (name, path, timeout) in enumerate(SUITES, start=1):
        print(f"[{i}/{len(SUITES)}] Running {name.lower()} tests...")
        test_suites.append((name, run_suite(name, path, timeout)))

    total_passed = sum(1 for _, status in test_suites if status == "PASS")
    total_failed = sum(1 for _, status in test_suites if status == "FAIL")

    # Summary
    print()
    print("=" * 70)
    print("Test Summary")
    print("=" * 70)
    print()
    for suite_name, status in test_suites:
        status_icon = "[PASS]" if status == "PASS" else ("[FAIL]" if status == "FAIL" else "[SKIP]")
        print(f"{status_icon} {suite_name}: {status}")
    print()
    print(f"Total: {total_passed} passed, {total_failed} failed, {len([s for s in test_suites if s[1] == 'SKIP'])} skipped")
    print("=" * 70)
    return total_failed == 0


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
