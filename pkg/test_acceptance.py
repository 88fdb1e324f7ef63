#!/usr/bin/env python3
"""
Monte Carlo acceptance checks on simulated organelle scenes

These runs take a minute or two; they exercise the whole simulate -> track ->
evaluate chain over many seeds.
"""

import time

import pytest

from analysis import analyze_accelerations
from config import RunConfig
from main import TrackingPipeline, summarize_runs
from simulator import generate, steady_scenario

RUNS = 50


@pytest.fixture(scope="module")
def standard_runs(tmp_path_factory):
    config = RunConfig(output_directory=str(tmp_path_factory.mktemp("standard")), log_level="WARNING")
    pipeline = TrackingPipeline(config)
    per_run = [pipeline.run_once(seed) for seed in range(RUNS)]
    return summarize_runs(per_run)


def test_standard_scenario_ospa(standard_runs):
    assert standard_runs["ospa_below_target_rate"] >= 0.9, standard_runs


def test_standard_scenario_cardinality(standard_runs):
    assert standard_runs["mean_cardinality_hit_rate"] >= 0.85, standard_runs
    assert standard_runs["event_match_rate"] >= 0.9, standard_runs


def test_mass_matches_expected_count(standard_runs):
    assert standard_runs["mean_consistency_rate"] >= 0.95, standard_runs


def test_empty_interval_recognised(tmp_path):
    config = RunConfig(scenario="empty_interval", output_directory=str(tmp_path), log_level="WARNING")
    pipeline = TrackingPipeline(config)
    summary = summarize_runs([pipeline.run_once(seed) for seed in range(RUNS)])
    assert summary["empty_interval_rate"] >= 0.9, summary


def test_tracking_speed(tmp_path):
    config = RunConfig(
        scenario="steady",
        scenario_tracks=16,
        scenario_duration=100,
        output_directory=str(tmp_path),
        log_level="WARNING",
    )
    pipeline = TrackingPipeline(config)
    pipeline.simulate()

    started = time.perf_counter()
    summary = pipeline.track()
    elapsed = time.perf_counter() - started
    print(f"✓ 16 objects over 100 frames tracked in {elapsed:.2f} s")
    assert summary["frames"] == 100
    assert elapsed < 10.0


def _rejection_rate(accel_noise, seeds):
    rejected = 0
    for seed in seeds:
        spec = steady_scenario(60, 300, seed=seed, accel_noise=accel_noise, max_speed=None)
        truth, _ = generate(spec)
        report = analyze_accelerations(truth.records())
        rejected += report.axis("x").decision == "reject"
    return rejected / len(seeds)


def test_normality_test_has_power():
    seeds = range(20)
    gaussian = _rejection_rate("gaussian", seeds)
    uniform = _rejection_rate("uniform", seeds)
    print(f"✓ rejection rate: gaussian {gaussian:.2f}, uniform {uniform:.2f}")
    assert uniform > gaussian


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s"])
