import os
import sys
import json
from typing import Any, Callable, Dict, Iterable, List, TypeVar
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
from tqdm import tqdm

from seqwit.config import MAX_WORKERS

T = TypeVar("T")
R = TypeVar("R")

_QUIET = False


def set_quiet(quiet: bool) -> None:
    global _QUIET
    _QUIET = quiet


def log(message: str) -> None:
    """Status line on stderr; stdout is reserved for reports."""
    if not _QUIET:
        print(message, file=sys.stderr)


def load_json_object(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError("Config JSON should be a flat object of flag values.")
    return data


def l2_normalize(v: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(v), dtype=float)
    norm = np.linalg.norm(arr)
    if norm == 0:
        raise ValueError("Cannot normalize a zero vector")
    return arr / norm


def run_parallel(fn: Callable[[T], R], items: List[T], desc: str, workers: int = MAX_WORKERS) -> List[R]:
    """Map fn over items on a thread pool; results come back in input order."""
    results: Dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(fn, item): i for i, item in enumerate(items)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=_QUIET, file=sys.stderr):
            results[futures[future]] = future.result()
    return [results[i] for i in range(len(items))]
