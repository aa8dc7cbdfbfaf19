"""TCP marker recorder.

A session UI connects over TCP and streams one JSON marker object per line
(``{"t_sample": ..., "task": ..., "trial": ..., "truth": ..., "phase": ...}``).
The recorder answers every line with a single JSON response line:
``{"ok": true, "accepted": n}`` or ``{"ok": false, "error": code}``.

One connection is served at a time and markers are processed strictly in
arrival order.  A marker is rejected (connection stays up) when it does not
parse, when its timestamp does not strictly increase, or when it points past
the end of the sample stream being recorded.  When the client closes the
connection, the accepted markers become the session's marker log.
"""
from __future__ import annotations

import json
import socket

from .core import EventMarker, MarkerLog, Recording
from .io import save_markers, save_recording


class MarkerRecorder:
    """Listens on a TCP port and records one marker session at a time."""

    def __init__(self, source: Recording, host: str = "127.0.0.1", port: int = 0):
        self.source = source
        self._sock = socket.create_server((host, port))
        self._sock.listen(1)

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._sock.getsockname()[:2]
        return host, port

    @property
    def port(self) -> int:
        return self.address[1]

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "MarkerRecorder":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _handle_line(self, line: str, last_t: int, accepted: int) -> tuple[EventMarker | None, dict]:
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            return None, {"error": "invalid_json", "ok": False}
        if not isinstance(record, dict):
            return None, {"error": "invalid_marker", "message": "marker must be an object", "ok": False}
        try:
            marker = EventMarker.from_dict(record)
        except ValueError as exc:
            return None, {"error": "invalid_marker", "message": str(exc), "ok": False}
        if marker.t_sample <= last_t:
            return None, {
                "error": "out_of_order",
                "message": f"t_sample {marker.t_sample} does not increase past {last_t}",
                "ok": False,
            }
        if marker.t_sample >= self.source.n_samples:
            return None, {
                "error": "beyond_stream_end",
                "message": f"t_sample {marker.t_sample} outside stream of {self.source.n_samples} samples",
                "ok": False,
            }
        return marker, {"accepted": accepted + 1, "ok": True}

    def serve_once(self, timeout_s: float | None = None) -> MarkerLog:
        """Accept one connection, ingest markers until the client closes,
        and return the accepted marker log."""
        self._sock.settimeout(timeout_s)
        conn, _addr = self._sock.accept()
        conn.settimeout(timeout_s)
        accepted: list[EventMarker] = []
        last_t = -1
        with conn:
            reader = conn.makefile("r", encoding="utf-8", newline="\n")
            writer = conn.makefile("w", encoding="utf-8", newline="\n")
            for line in reader:
                line = line.strip()
                if not line:
                    continue
                marker, response = self._handle_line(line, last_t, len(accepted))
                if marker is not None:
                    accepted.append(marker)
                    last_t = marker.t_sample
                writer.write(json.dumps(response, sort_keys=True, separators=(",", ":")) + "\n")
                writer.flush()
        return MarkerLog(tuple(accepted))


def record_session(
    source: Recording,
    host: str = "127.0.0.1",
    port: int = 0,
    out_rec: str | None = None,
    out_markers: str | None = None,
    timeout_s: float | None = None,
    on_listen=None,
) -> tuple[Recording, MarkerLog]:
    """Serve one recording session and optionally persist both outputs.

    ``on_listen`` (if given) is called with (host, port) once the socket is
    ready, so a caller can start the client side.
    """
    with MarkerRecorder(source, host, port) as recorder:
        if on_listen is not None:
            on_listen(*recorder.address)
        log = recorder.serve_once(timeout_s=timeout_s)
    if out_rec is not None:
        save_recording(source, out_rec)
    if out_markers is not None:
        save_markers(log, out_markers)
    return source, log
