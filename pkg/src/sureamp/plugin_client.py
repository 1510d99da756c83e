"""Client for external denoiser plugins (child processes).

Wire protocol, both directions, over the child's stdin/stdout:

    frame   = 10-byte zero-padded ASCII decimal header length + "\\n"
              + JSON header + raw little-endian float32 payload
    request = {"op":"denoise","h":H,"w":W,"complex":bool,
               "noise":{"type":"white","sigma":s} |
                       {"type":"subband","tau":[...]}}
              payload: H*W*(2 if complex else 1) f32 samples
              (complex = interleaved re,im)
    reply   = {"status":"ok"} + same-shape payload
            | {"status":"error","msg":...} with empty payload
    quit    = {"op":"quit"}; the child exits 0.

The child must first emit a payload-less handshake frame
{"proto":"sure-amp-denoise","version":1}. One plugin handle serves one
request at a time; launch several processes for concurrency.
"""

import json
import os
import select
import shlex
import subprocess
import threading
import time
from collections import deque

import numpy as np
from sklearn.base import BaseEstimator

from .noise import SubbandDiagonal, White
from .validation import check_grid

__all__ = ["PluginError", "PluginDenoiser", "encode_frame", "PROTO_NAME",
           "PROTO_VERSION"]

PROTO_NAME = "sure-amp-denoise"
PROTO_VERSION = 1
_LEN_DIGITS = 10


class PluginError(RuntimeError):
    """Protocol violation, child death, or timeout; carries stderr excerpt."""


def encode_frame(header: dict, payload: bytes = b"") -> bytes:
    head = json.dumps(header, separators=(",", ":")).encode("utf-8")
    return b"%0*d\n" % (_LEN_DIGITS, len(head)) + head + payload


def _noise_header(noise):
    if isinstance(noise, White):
        return {"type": "white", "sigma": noise.sigma}
    if isinstance(noise, SubbandDiagonal):
        return {"type": "subband", "tau": [float(t) for t in noise.tau]}
    raise TypeError(f"not a noise model: {noise!r}")


class PluginDenoiser(BaseEstimator):
    """Denoiser backed by a plugin child process.

    Parameters
    ----------
    command : str or sequence
        Executable and arguments (a string is split shell-style).
    timeout : float
        Per-read deadline in seconds; a killed child fails fast via EOF,
        the timeout only guards against a hung-but-alive child.
    """

    def __init__(self, command, timeout: float = 30.0):
        self.command = command
        self.timeout = timeout
        self._proc = None
        self._lock = threading.Lock()
        self._stderr_tail = deque(maxlen=64)
        self._start()

    # -- process management --

    def _start(self):
        argv = shlex.split(self.command) if isinstance(self.command, str) \
            else list(self.command)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.PIPE)
        except OSError as exc:
            raise PluginError(f"could not launch plugin {argv!r}: {exc}") from exc
        drain = threading.Thread(target=self._drain_stderr, daemon=True)
        drain.start()
        handshake, _ = self._read_frame(expect_payload=0)
        if handshake.get("proto") != PROTO_NAME or \
                handshake.get("version") != PROTO_VERSION:
            self._kill()
            raise PluginError(f"bad handshake: {handshake!r}")

    def _drain_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.decode("utf-8", "replace").rstrip())

    def _stderr_excerpt(self):
        return "\n".join(self._stderr_tail)[-2000:]

    def _fail(self, msg):
        excerpt = self._stderr_excerpt()
        self._kill()
        suffix = f"\nplugin stderr:\n{excerpt}" if excerpt else ""
        raise PluginError(msg + suffix)

    def _kill(self):
        if self._proc and self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()

    def close(self):
        """Ask the child to quit; kill it if it lingers."""
        if self._proc is None or self._proc.poll() is not None:
            return
        try:
            self._proc.stdin.write(encode_frame({"op": "quit"}))
            self._proc.stdin.flush()
            self._proc.wait(timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired):
            self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- framing --

    def _read_exact(self, nbytes):
        fd = self._proc.stdout.fileno()
        chunks = []
        deadline = time.monotonic() + self.timeout
        remaining = nbytes
        while remaining > 0:
            wait = deadline - time.monotonic()
            if wait <= 0:
                self._fail(f"plugin timed out after {self.timeout}s")
            ready, _, _ = select.select([fd], [], [], wait)
            if not ready:
                continue
            chunk = os.read(fd, remaining)
            if not chunk:
                self._fail("plugin closed its output mid-frame")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def _read_frame(self, expect_payload: int):
        prefix = self._read_exact(_LEN_DIGITS + 1)
        if prefix[-1:] != b"\n":
            self._fail(f"malformed length prefix {prefix!r}")
        try:
            head_len = int(prefix[:_LEN_DIGITS])
        except ValueError:
            self._fail(f"malformed length prefix {prefix!r}")
        try:
            header = json.loads(self._read_exact(head_len).decode("utf-8"))
        except ValueError:
            self._fail("plugin sent an unparsable header")
        payload = self._read_exact(expect_payload) if expect_payload else b""
        return header, payload

    # -- denoiser interface --

    def denoise(self, r, noise) -> np.ndarray:
        r = check_grid(r, "r")
        h, w = r.shape
        is_complex = np.iscomplexobj(r)
        payload = np.ascontiguousarray(
            r, dtype="<c8" if is_complex else "<f4").tobytes()
        header = {"op": "denoise", "h": h, "w": w, "complex": bool(is_complex),
                  "noise": _noise_header(noise)}
        with self._lock:
            if self._proc.poll() is not None:
                self._fail(f"plugin exited with code {self._proc.returncode}")
            try:
                self._proc.stdin.write(encode_frame(header, payload))
                self._proc.stdin.flush()
            except (OSError, ValueError):
                self._fail("plugin closed its input")
            reply, _ = self._read_frame(expect_payload=0)
            status = reply.get("status")
            if status == "error":
                raise PluginError(f"plugin error: {reply.get('msg')}")
            if status != "ok":
                self._fail(f"unexpected reply {reply!r}")
            body = self._read_exact(len(payload))
        out = np.frombuffer(body, dtype="<c8" if is_complex else "<f4")
        out = out.reshape(h, w)
        return out.astype(np.complex128 if is_complex else np.float64)

    __call__ = denoise
