"""Objective evaluated by a child process over a line-delimited JSON protocol.

Each evaluation writes one request ``{"id": K, "x": [...]}`` to the child's
stdin and waits for ``{"id": K, "y": [...]}`` (or ``{"id": K, "error": "..."}``)
on its stdout. Requests are strictly sequential. A child that misses the timeout is killed
and a fresh one is started for the next request, so a busy child can never
receive a second request. Replies carrying an id from an earlier request are
discarded as a further guard, so a late answer is never attributed to the
wrong design.
"""

from __future__ import annotations

import collections
import json
import logging
import math
import queue
import subprocess
import threading
import time

import numpy as np

from .core import BoxBounds, EvaluationError, affine_map

logger = logging.getLogger(__name__)

_EOF = object()


class ObjectiveTimeout(EvaluationError):
    pass


class ProtocolError(EvaluationError):
    pass


class ExternalObjective:
    """Persistent child process answering objective requests.

    Designs are supplied in unit-box coordinates and sent to the child after
    mapping onto ``bounds``. Replies are multiplied by ``signs`` to bring them
    into the maximization convention.
    """

    def __init__(self, command, dim: int, n_objectives: int, timeout: float = 60.0, bounds: BoxBounds | None = None, signs=None):
        self.command = list(command)
        self.dim = dim
        self.n_objectives = n_objectives
        self.timeout = timeout
        self.bounds = bounds
        self.signs = np.ones(n_objectives) if signs is None else np.asarray(signs, dtype=float)
        self._proc = None
        self._lines: queue.Queue = queue.Queue()
        self._stderr = collections.deque(maxlen=200)
        self._next_id = 0

    def start(self) -> "ExternalObjective":
        self._lines = queue.Queue()
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        threading.Thread(target=self._pump, args=(self._proc.stdout, self._lines.put), daemon=True).start()
        self._stderr_reader = threading.Thread(target=self._pump, args=(self._proc.stderr, self._stderr.append), daemon=True)
        self._stderr_reader.start()
        return self

    @staticmethod
    def _pump(stream, sink):
        for line in stream:
            sink(line)
        sink(_EOF)

    def stderr_tail(self) -> str:
        return "".join(line for line in self._stderr if line is not _EOF).strip()

    def _kill(self) -> None:
        if self._proc is None:
            return
        self._proc.kill()
        self._proc.wait()
        self._proc = None

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()

    def _fail(self, cls, msg):
        tail = self.stderr_tail()
        raise cls(f"{msg}; child stderr: {tail}" if tail else msg)

    def evaluate(self, x, rng=None) -> np.ndarray:
        """Send one design and wait for its reply. ``rng`` is ignored; the child owns its randomness."""
        if self._proc is not None and self._proc.poll() is not None:
            logger.warning("objective process exited with code %s; restarting", self._proc.returncode)
            self._proc = None
        if self._proc is None:
            self.start()
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if self.bounds is not None:
            x = affine_map(x, self.bounds)
        req_id = self._next_id
        self._next_id += 1
        request = json.dumps({"id": req_id, "x": [float(v) for v in x]}, allow_nan=False)
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self._proc.wait()
            self._proc = None
            self._fail(EvaluationError, f"child exited before request {req_id} (code {code})")

        deadline = time.monotonic() + self.timeout
        while True:
            remaining = deadline - time.monotonic()
            try:
                if remaining <= 0:
                    raise queue.Empty
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                self._kill()
                self._fail(ObjectiveTimeout, f"no reply to request {req_id} within {self.timeout} s; process restarted")
            if line is _EOF:
                code = self._proc.wait()
                self._proc = None
                self._stderr_reader.join(timeout=1.0)
                self._fail(EvaluationError, f"child exited while handling request {req_id} (code {code})")
            try:
                reply = json.loads(line)
            except json.JSONDecodeError:
                self._fail(ProtocolError, f"malformed reply to request {req_id}: {line.strip()[:200]!r}")
            if not isinstance(reply, dict) or not isinstance(reply.get("id"), int):
                self._fail(ProtocolError, f"reply to request {req_id} lacks an integer id: {line.strip()[:200]!r}")
            if reply["id"] < req_id:
                logger.warning("discarding stale reply for request %d", reply["id"])
                continue
            if reply["id"] != req_id:
                self._fail(ProtocolError, f"reply id {reply['id']} does not match request {req_id}")
            if "error" in reply:
                raise EvaluationError(f"objective reported an error for request {req_id}: {reply['error']}")
            return self._parse_values(reply, req_id)

    def _parse_values(self, reply, req_id) -> np.ndarray:
        y = reply.get("y")
        if not isinstance(y, list) or len(y) != self.n_objectives:
            self._fail(ProtocolError, f"reply to request {req_id} must carry {self.n_objectives} values in 'y'")
        try:
            values = [float(v) for v in y]
        except (TypeError, ValueError):
            self._fail(ProtocolError, f"reply to request {req_id} has non-numeric values")
        if not all(math.isfinite(v) for v in values):
            self._fail(ProtocolError, f"reply to request {req_id} has non-finite values")
        return np.asarray(values) * self.signs


def external_objective(command, dim: int, n_objectives: int, timeout: float = 60.0, bounds=None, signs=None) -> ExternalObjective:
    return ExternalObjective(command, dim, n_objectives, timeout, bounds, signs).start()
