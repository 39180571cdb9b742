"""Line-delimited JSON inference protocol.

Request:  {"id": N, "width": W, "height": H, "pixels_b64": "<base64 raw rows>"}
Response: {"id": N, "x": <float>, "y": <float>}           (one per request, in order)
          {"id": N, "error": "<message>"}                  (recoverable server-side error)

The same framing runs over a child process's standard streams or a TCP
socket. Responses must arrive in request order; an id mismatch is a
protocol error.
"""

from __future__ import annotations

import base64
import json
import queue
import socket
import subprocess
import threading
import time
from dataclasses import dataclass

import numpy as np

from .image import GrayImage

DEFAULT_TIMEOUT_S = 5.0


class ProtocolError(RuntimeError):
    pass


class ProtocolTimeout(ProtocolError):
    pass


def encode_request(request_id: int, image: GrayImage) -> bytes:
    payload = {
        "id": request_id,
        "width": image.width,
        "height": image.height,
        "pixels_b64": base64.b64encode(image.pixels.tobytes()).decode("ascii"),
    }
    return (json.dumps(payload) + "\n").encode("utf-8")


def decode_request(line: str | bytes) -> tuple[int, GrayImage]:
    try:
        msg = json.loads(line)
        request_id = int(msg["id"])
        width, height = int(msg["width"]), int(msg["height"])
        raw = base64.b64decode(msg["pixels_b64"], validate=True)
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed request: {exc}") from exc
    if len(raw) != width * height:
        raise ProtocolError(f"pixel payload is {len(raw)} bytes, expected {width * height}")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()
    return request_id, GrayImage(pixels)


def encode_response(request_id: int, x: float, y: float) -> bytes:
    return (json.dumps({"id": request_id, "x": float(x), "y": float(y)}) + "\n").encode("utf-8")


def decode_response(line: str | bytes, expected_id: int) -> tuple[float, float]:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response line: {exc}") from exc
    if msg.get("id") != expected_id:
        raise ProtocolError(f"response id {msg.get('id')} does not match request {expected_id}")
    if "error" in msg:
        raise ProtocolError(f"endpoint reported error: {msg['error']}")
    try:
        return float(msg["x"]), float(msg["y"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"response missing numeric x/y: {msg}") from exc


@dataclass
class EndpointReply:
    x: float
    y: float
    wall_seconds: float


class _LineReader(threading.Thread):
    """Pumps lines from a stream into a queue so requests can time out."""

    def __init__(self, stream):
        super().__init__(daemon=True)
        self._stream = stream
        self.lines: queue.Queue = queue.Queue()

    def run(self):
        try:
            for line in self._stream:
                self.lines.put(line)
        except (OSError, ValueError):
            pass
        self.lines.put(None)  # EOF sentinel


class ChildProcessEndpoint:
    """Speaks the protocol with a child process over stdin/stdout."""

    def __init__(self, cmd: list[str], timeout: float = DEFAULT_TIMEOUT_S, cwd: str | None = None):
        self.cmd = list(cmd)
        self.timeout = timeout
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                cwd=cwd,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot start endpoint {self.cmd!r}: {exc}") from exc
        self._reader = _LineReader(self._proc.stdout)
        self._reader.start()

    def request(self, image: GrayImage) -> EndpointReply:
        request_id = self._next_id
        self._next_id += 1
        start = time.perf_counter()
        try:
            self._proc.stdin.write(encode_request(request_id, image))
            self._proc.stdin.flush()
        except (OSError, ValueError, AttributeError) as exc:
            raise ProtocolError(f"endpoint pipe closed: {exc}") from exc
        try:
            line = self._reader.lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ProtocolTimeout(f"no response within {self.timeout} s") from None
        if line is None:
            raise ProtocolError("endpoint closed its output stream")
        x, y = decode_response(line, request_id)
        return EndpointReply(x, y, time.perf_counter() - start)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class TcpEndpoint:
    """Same framing as ChildProcessEndpoint, over a TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = DEFAULT_TIMEOUT_S):
        self.timeout = timeout
        self._next_id = 0
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ProtocolError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._sock.settimeout(timeout)
        self._file = self._sock.makefile("rwb")

    def request(self, image: GrayImage) -> EndpointReply:
        request_id = self._next_id
        self._next_id += 1
        start = time.perf_counter()
        try:
            self._file.write(encode_request(request_id, image))
            self._file.flush()
            line = self._file.readline()
        except socket.timeout:
            raise ProtocolTimeout(f"no response within {self.timeout} s") from None
        except OSError as exc:
            raise ProtocolError(f"connection failed: {exc}") from exc
        if not line:
            raise ProtocolError("endpoint closed the connection")
        x, y = decode_response(line, request_id)
        return EndpointReply(x, y, time.perf_counter() - start)

    def close(self) -> None:
        try:
            self._file.close()
            self._sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
