"""Sweep orchestration: deterministic per-cell seeds, worker scheduling,
canonical outputs, resume support.

All randomness flows from one 64-bit global seed: the seed of cell
(N, p, seed_index) is SeedSequence([global_seed, N, p, seed_index]).
Results are keyed by cell, so worker count and completion order never change
the canonical output.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np


def derive_seed(global_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence([int(global_seed)] + [int(k) for k in key])
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)


def run_cells(cells, fn, workers: int = 1) -> dict:
    """Evaluate fn(cell) for every cell; returns {cell: result}.

    Cells already computed may be omitted by the caller (resume). Exceptions
    are collected per cell rather than aborting the sweep.
    """
    results: dict = {}
    failures: dict = {}
    if workers <= 1:
        for cell in cells:
            try:
                results[cell] = fn(cell)
            except Exception as exc:  # noqa: BLE001 - cell isolation
                failures[cell] = repr(exc)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = {cell: ex.submit(fn, cell) for cell in cells}
            for cell, fut in futs.items():
                try:
                    results[cell] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures[cell] = repr(exc)
    return {"results": results, "failures": failures}


def write_manifest(out_dir, command: str, config: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{command}_manifest.json"
    with open(path, "w") as fh:
        json.dump({"command": command, "config": config}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
