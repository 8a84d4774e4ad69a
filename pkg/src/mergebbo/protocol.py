"""Client for external evaluator processes speaking JSON lines over stdio.

The evaluator prints one handshake line on startup, then answers each
request line with exactly one response line, in request order:

    handshake:  {"protocol": "merge-bbo/1", "space": {"n_models": N, "n_layers": L} | null}
    request:    {"id": k, "z": [0|1, ...], "x": [...], "meta": {...}}
    response:   {"id": k, "objective": v, "score": s?, "aux": {...}?}
                or {"id": k, "error": "..."}

Requests are strictly serialized here; the evaluator is shut down by closing
its stdin and, failing that, by SIGTERM.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from typing import Optional, Sequence

from .space import Candidate, EvalResult, EvaluatorFailure, MixedSpace, Objective

__all__ = [
    "PROTOCOL_NAME",
    "encode_request",
    "parse_response",
    "SubprocessEvaluator",
]

PROTOCOL_NAME = "merge-bbo/1"


def encode_request(
    request_id: int, candidate: Candidate, space: MixedSpace, objective_id: str
) -> dict:
    wire = candidate.to_wire()
    return {
        "id": request_id,
        "z": wire["z"],
        "x": wire["x"],
        "meta": {
            "space": {"n_models": space.n_models, "n_layers": space.n_layers},
            "objective_id": objective_id,
        },
    }


def parse_response(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EvaluatorFailure(f"unparseable response line: {line!r}") from exc
    if not isinstance(obj, dict) or "id" not in obj:
        raise EvaluatorFailure(f"response without id: {line!r}")
    has_objective = "objective" in obj
    has_error = "error" in obj
    if has_objective == has_error:
        raise EvaluatorFailure(
            f"response must carry exactly one of objective/error: {line!r}"
        )
    return obj


class _LineReader:
    """Background reader so response waits can time out."""

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        try:
            for line in stream:
                self._queue.put(line)
        finally:
            self._queue.put(None)

    def readline(self, timeout: float) -> Optional[str]:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            return None


class SubprocessEvaluator(Objective):
    """Black-box objective served by a child process.

    Declares itself serial: one request is in flight at a time. The
    handshake's announced space, when present, must match the expected one.
    """

    concurrency = "serial"

    def __init__(
        self,
        argv: Sequence[str],
        space: MixedSpace,
        objective_id: str = "external",
        timeout: float = 60.0,
    ):
        super().__init__(space)
        self.argv = list(argv)
        self.objective_id = objective_id
        self.timeout = timeout
        self._next_id = 0
        self._io_lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise EvaluatorFailure(f"could not launch evaluator {self.argv!r}: {exc}") from exc
        self._reader = _LineReader(self._proc.stdout)
        self._handshake()

    def _handshake(self) -> None:
        line = self._reader.readline(self.timeout)
        if line is None:
            self._abort()
            raise EvaluatorFailure("evaluator produced no handshake line")
        try:
            hello = json.loads(line)
        except json.JSONDecodeError as exc:
            self._abort()
            raise EvaluatorFailure(f"bad handshake line: {line!r}") from exc
        if hello.get("protocol") != PROTOCOL_NAME:
            self._abort()
            raise EvaluatorFailure(
                f"unsupported protocol {hello.get('protocol')!r}, expected {PROTOCOL_NAME!r}"
            )
        announced = hello.get("space")
        if announced:
            if (
                announced.get("n_models") != self.space.n_models
                or announced.get("n_layers") != self.space.n_layers
            ):
                self._abort()
                raise EvaluatorFailure(
                    f"evaluator space {announced} does not match expected "
                    f"{self.space.n_models}x{self.space.n_layers}"
                )
        self.handshake = hello

    def _send_line(self, payload: str) -> None:
        try:
            self._proc.stdin.write(payload + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise EvaluatorFailure(f"evaluator pipe closed: {exc}") from exc

    def _evaluate(self, candidate: Candidate) -> EvalResult:
        with self._io_lock:
            request_id = self._next_id
            self._next_id += 1
            request = encode_request(request_id, candidate, self.space, self.objective_id)
            self._send_line(json.dumps(request, separators=(",", ":")))
            line = self._reader.readline(self.timeout)
        if line is None:
            raise EvaluatorFailure(
                f"no response for request {request_id} within {self.timeout}s"
            )
        response = parse_response(line)
        if response["id"] != request_id:
            raise EvaluatorFailure(
                f"out-of-order response: expected id {request_id}, got {response['id']}"
            )
        if "error" in response:
            raise EvaluatorFailure(f"evaluator error: {response['error']}")
        aux = response.get("aux") or {}
        return EvalResult(
            objective=float(response["objective"]),
            score=response.get("score"),
            aux=aux,
        )

    def config(self) -> dict:
        return {
            "type": "SubprocessEvaluator",
            "argv": self.argv,
            "objective_id": self.objective_id,
            "m": self.space.m,
        }

    def _abort(self) -> None:
        try:
            self._proc.kill()
        except OSError:
            pass

    def close(self) -> None:
        """Shut the evaluator down: close stdin, then SIGTERM, then SIGKILL."""
        if self._proc.poll() is not None:
            return
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=5.0)
            return
        except subprocess.TimeoutExpired:
            pass
        self._proc.terminate()
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "SubprocessEvaluator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
