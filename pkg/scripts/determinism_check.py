#!/usr/bin/env python3
# determinism_check.py - Same seed, different thread counts, identical reports
"""
Generate a synthetic bundle and run the pipeline with one worker and with
several; the two JSON reports must match byte for byte.

Usage:
    python scripts/determinism_check.py [--threads 8] [--seed 0]
"""
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import click

from app.dependencies.deps import get_executor
from app.models.index import IndexId
from app.models.pipeline import AceConfig
from app.models.synth import SynthSpec
from app.services.pipeline_service import run_configured
from app.services.synth_service import SynthService


def _report_json(spec: SynthSpec, cfg: AceConfig, threads: int) -> str:
    with get_executor(threads) as executor:
        bundle = SynthService.generate_bundle(spec, executor)
        return run_configured(bundle, cfg, executor).model_dump_json()


@click.command()
@click.option("--threads", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
def check(threads: int, seed: int):
    spec = SynthSpec(m=8, n=300, d=8, k=4, corrupt=frozenset({3}), label_noise=(0.0, 0.05, 0.1, 0.0, 0.2, 0.3, 0.15, 0.25), seed=seed)
    cfg = AceConfig(index=IndexId.CALINSKI_HARABASZ, dip_replicates=300, seed=seed, include_outlier_rescue=True)

    print("Running with 1 thread...")
    single = _report_json(spec, cfg, 1)
    print(f"Running with {threads} threads...")
    multi = _report_json(spec, cfg, threads)

    if single == multi:
        print("✅ Reports are identical")
    else:
        print("❌ Reports differ between thread counts")
        sys.exit(1)


if __name__ == "__main__":
    check()
