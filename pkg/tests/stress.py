"""Protocol stress harness shared by the unit and acceptance suites."""

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from eeihv.core import EvaluationError
from eeihv.external import ExternalObjective

CHILD = Path(__file__).with_name("child_scripted.py")


@dataclass
class StressResult:
    failures: dict = field(default_factory=dict)  # request id -> exception class name
    desyncs: int = 0
    ids: list = field(default_factory=list)


def run_stress(n_evals=1000, malformed=137, slow=613, timeout=0.5, delay=1.5, seed=0) -> StressResult:
    cmd = [sys.executable, str(CHILD), "--malformed", str(malformed), "--slow", f"{slow}:{delay}"]
    rng = np.random.default_rng(seed)
    result = StressResult()
    with ExternalObjective(cmd, dim=3, n_objectives=2, timeout=timeout) as obj:
        for k in range(n_evals):
            x = rng.uniform(size=3)
            try:
                y = obj.evaluate(x)
            except EvaluationError as exc:
                result.failures[k] = type(exc).__name__
                continue
            result.ids.append(int(y[1]))
            if int(y[1]) != k or abs(y[0] - x.sum()) > 1e-12:
                result.desyncs += 1
    return result
