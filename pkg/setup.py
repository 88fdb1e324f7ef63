#!/usr/bin/env python3
"""
Bootstrap script: install dependencies, write config.yaml and run a smoke check
"""

import importlib
import subprocess
import sys
import tempfile
from pathlib import Path

MIN_PYTHON = (3, 10)
NUMERIC_STACK = ("numpy", "scipy", "pandas", "pydantic", "yaml", "tqdm")


def install_requirements():
    print("📦 Installing packages from requirements.txt...")
    result = subprocess.run(
        [sys.executable, "-m", "pip", "install", "-r", "requirements.txt"],
        capture_output=True,
        text=True,
    )
    if result.returncode != 0:
        print(f"❌ pip exited with {result.returncode}")
        print(result.stderr.strip().splitlines()[-1] if result.stderr.strip() else "no error output")
        return False
    print("✅ Packages installed")
    return True


def check_python_version():
    if sys.version_info[:2] < MIN_PYTHON:
        print(f"❌ Python {MIN_PYTHON[0]}.{MIN_PYTHON[1]}+ required, found {sys.version.split()[0]}")
        return False
    print(f"✅ Python {sys.version.split()[0]}")
    return True


def check_numeric_stack():
    """Import every numeric package and report its version"""
    missing = []
    for name in NUMERIC_STACK:
        try:
            module = importlib.import_module(name)
        except ImportError:
            missing.append(name)
            continue
        print(f"  {name:<10} {getattr(module, '__version__', '?')}")
    if missing:
        print(f"❌ Missing: {', '.join(missing)}")
        return False
    print("✅ Numeric stack available")
    return True


def create_config():
    if Path("config.yaml").exists():
        print("✅ config.yaml already present, left untouched")
        return True
    from config import RunConfig

    RunConfig().save("config.yaml")
    Path("data").mkdir(exist_ok=True)
    print("✅ Wrote default config.yaml")
    return True


def smoke_run():
    """Simulate, track and score a two-object scene in a scratch directory"""
    from config import RunConfig
    from main import TrackingPipeline

    with tempfile.TemporaryDirectory() as scratch:
        config = RunConfig(
            scenario="steady",
            scenario_tracks=2,
            scenario_duration=10,
            output_directory=scratch,
            log_level="WARNING",
        )
        pipeline = TrackingPipeline(config)
        pipeline.simulate()
        pipeline.track()
        summary = pipeline.evaluate()
    print(f"✅ Smoke run finished, mean OSPA {summary['mean_total']:.3f} µm")
    return True


def main():
    print("🔬 CPHD organelle tracker setup")
    print("=" * 50)

    steps = [
        ("Python version", check_python_version),
        ("Package install", install_requirements),
        ("Numeric stack", check_numeric_stack),
        ("Default configuration", create_config),
        ("Smoke run", smoke_run),
    ]

    for description, step in steps:
        print(f"\n📋 {description}")
        try:
            ok = step()
        except Exception as e:
            print(f"❌ {description} failed: {e}")
            ok = False
        if not ok:
            print("\nSetup stopped. Fix the problem above and run it again.")
            sys.exit(1)

    print("\n" + "=" * 50)
    print("🎉 Ready. Try: python cli.py simulate && python cli.py track && python cli.py evaluate")
    print("See QUICKSTART.md for the other commands.")


if __name__ == "__main__":
    main()
