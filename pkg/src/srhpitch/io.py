"""
File formats: PCM WAV audio, two-column reference pitch files, track and
metrics CSVs, plot data and batch manifests.
"""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .dsp import AudioSignal
from .evaluation import EvalReport, GroundTruthTrack, UncertainPolicy
from .tracker import PitchTrack, SrhCurve, TrackerConfig

TRACK_HEADER = ("time_s", "f0_hz", "srh", "voiced")
METRICS_HEADER = ("file", "condition", "vde", "gpe", "fpe", "ffe")
PLOT_HEADER = ("time_s", "f0_hz", "srh", "voiced", "truth_f0_hz", "truth_voiced")

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class ParseError(ValueError):
    """Malformed input file. Carries the byte offset or line number when known."""

    def __init__(self, message: str, path=None, *, offset: int | None = None, line: int | None = None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.path = path
        self.offset = offset
        self.line = line


# ----------------------------------------------------------------------------
# WAV

def _check_wav_header(data: bytes, path) -> None:
    """Walk the RIFF chunks far enough to reject anything that is not PCM/float."""
    if len(data) < 12 or data[:4] != b"RIFF":
        raise ParseError("not a RIFF file", path, offset=0)
    if data[8:12] != b"WAVE":
        raise ParseError("RIFF form type is not WAVE", path, offset=8)
    pos = 12
    seen_fmt = False
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = pos + 8
        if chunk_id == b"fmt ":
            if size < 16 or body + 16 > len(data):
                raise ParseError("truncated fmt chunk", path, offset=pos)
            tag, channels, _, _, _, bits = struct.unpack("<HHIIHH", data[body:body + 16])
            if tag == _WAVE_FORMAT_EXTENSIBLE and size >= 40:
                (tag,) = struct.unpack("<H", data[body + 24:body + 26])
            if tag == _WAVE_FORMAT_PCM:
                if bits not in (8, 16, 24, 32):
                    raise ParseError(f"unsupported PCM bit depth {bits}", path, offset=body + 14)
            elif tag == _WAVE_FORMAT_IEEE_FLOAT:
                if bits not in (32, 64):
                    raise ParseError(f"unsupported float bit depth {bits}", path, offset=body + 14)
            else:
                raise ParseError(f"compressed or unknown format tag 0x{tag:04x}", path, offset=body)
            if channels < 1:
                raise ParseError("zero channels", path, offset=body + 2)
            seen_fmt = True
        elif chunk_id == b"data":
            if not seen_fmt:
                raise ParseError("data chunk before fmt chunk", path, offset=pos)
            return
        pos = body + size + (size & 1)
    raise ParseError("missing fmt or data chunk", path, offset=min(pos, len(data)))


def read_wav(path) -> AudioSignal:
    """
    Read a PCM or float WAV file as a mono signal.

    Channels are averaged. Integer samples are scaled by the magnitude of the
    most negative value of their type, so full-scale negative reads as -1.0.
    """
    path = Path(path)
    raw = path.read_bytes()
    _check_wav_header(raw, path)
    try:
        sr, data = wavfile.read(io.BytesIO(raw))
    except (ValueError, struct.error) as exc:
        raise ParseError(f"cannot decode WAV data ({exc})", path) from exc

    if data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit samples into int32
        x = data.astype(np.float64) / 2147483648.0
    elif np.issubdtype(data.dtype, np.floating):
        x = data.astype(np.float64)
    else:
        raise ParseError(f"unsupported sample type {data.dtype}", path)
    if x.ndim == 2:
        x = x.mean(axis=1)
    return AudioSignal(x, sr)


def write_wav(path, signal: AudioSignal) -> None:
    """Write 16-bit PCM; samples outside [-1, 1) are clipped."""
    q = np.clip(np.round(signal.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), signal.sample_rate, q)


# ----------------------------------------------------------------------------
# reference pitch

def _split_fields(line: str) -> list[str]:
    return line.replace(",", " ").split()


def read_truth(path, uncertain: UncertainPolicy | str = UncertainPolicy.UNVOICED) -> GroundTruthTrack:
    """
    Read a ``time_s f0_hz`` reference file (whitespace or comma separated).

    ``0`` marks unvoiced frames; negative values mark uncertain frames, which
    are loaded as unvoiced and flagged in ``GroundTruthTrack.uncertain`` (the
    ``exclude`` policy is applied later, at alignment time).
    """
    UncertainPolicy(uncertain)
    times, f0 = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            fields = _split_fields(text)
            if len(fields) < 2:
                raise ParseError("expected two columns: time_s f0_hz", path, line=lineno)
            try:
                t, f = float(fields[0]), float(fields[1])
            except ValueError:
                # tolerate a single header line
                if not times and lineno == 1:
                    continue
                raise ParseError(f"non-numeric field in {text!r}", path, line=lineno) from None
            if not (np.isfinite(t) and np.isfinite(f)):
                raise ParseError("non-finite value", path, line=lineno)
            if times and t <= times[-1]:
                raise ParseError(f"time {t} does not increase", path, line=lineno)
            times.append(t)
            f0.append(f)
    if not times:
        raise ParseError("no reference frames", path)
    f0 = np.array(f0)
    flagged = f0 < 0
    return GroundTruthTrack(np.array(times), np.where(flagged, 0.0, f0), flagged)


# ----------------------------------------------------------------------------
# CSV

def _g6(x: float) -> str:
    return f"{x:#.6g}"


def track_rows(track: PitchTrack):
    for t, f, s, v in zip(track.times, track.f0_hz, track.srh, track.voiced):
        yield _g6(t), _g6(f), _g6(s), "1" if v else "0"


def format_track(track: PitchTrack) -> str:
    lines = [",".join(TRACK_HEADER)]
    lines += [",".join(row) for row in track_rows(track)]
    return "\n".join(lines) + "\n"


def write_track(track: PitchTrack, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_track(track))


def read_track(path) -> PitchTrack:
    """Parse a CSV written by :func:`write_track`."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACK_HEADER:
        raise ParseError(f"expected header {','.join(TRACK_HEADER)}", path, line=1)
    cols = [[], [], [], []]
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", path, line=lineno)
        try:
            t, f, s = float(row[0]), float(row[1]), float(row[2])
        except ValueError:
            raise ParseError("non-numeric field", path, line=lineno) from None
        if row[3] not in ("0", "1"):
            raise ParseError(f"voiced flag must be 0 or 1, got {row[3]!r}", path, line=lineno)
        for col, val in zip(cols, (t, f, s, row[3] == "1")):
            col.append(val)
    times, f0, srh, voiced = (np.array(c) for c in cols)
    return PitchTrack(times, f0, srh, voiced.astype(bool))


def _metric(x: float | None) -> str:
    return "" if x is None else f"{x:.4f}"


def format_metrics(rows) -> str:
    """``rows`` holds ``(file, condition, EvalReport | None)`` tuples."""
    lines = [",".join(METRICS_HEADER)]
    for name, condition, rep in rows:
        if rep is None:
            vals = ["", "", "", ""]
        else:
            vals = [_metric(rep.vde_pct), _metric(rep.gpe_pct), _metric(rep.fpe_pct), _metric(rep.ffe_pct)]
        lines.append(",".join([_csv_field(name), _csv_field(condition), *vals]))
    return "\n".join(lines) + "\n"


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def write_metrics(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_metrics(rows))


def read_metrics(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise ParseError(f"expected header {','.join(METRICS_HEADER)}", path, line=1)
        return [
            {k: (v if k in ("file", "condition") else (float(v) if v else None)) for k, v in row.items()}
            for row in reader
        ]


def write_plot_data(track: PitchTrack, path, truth: GroundTruthTrack | None = None) -> None:
    """Per-frame estimate, SRH score and (optionally) the reference interpolated onto the frame times."""
    if truth is not None:
        # nearest reference frame for each estimate frame
        idx = np.clip(np.searchsorted(truth.times, track.times), 1, max(len(truth) - 1, 1))
        left = idx - 1
        nearest = np.where(np.abs(track.times - truth.times[left]) <= np.abs(truth.times[idx] - track.times),
                           left, idx) if len(truth) > 1 else np.zeros(len(track), int)
        ref_f0 = truth.f0_hz[nearest]
    lines = [",".join(PLOT_HEADER)]
    for i, row in enumerate(track_rows(track)):
        extra = ["", ""] if truth is None else [_g6(ref_f0[i]), "1" if ref_f0[i] > 0 else "0"]
        lines.append(",".join([*row, *extra]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_surface(times: np.ndarray, curve: SrhCurve, path) -> None:
    """SRH of every frame on the candidate grid; one row per frame."""
    lines = [",".join(["time_s", *(_g6(f) for f in curve.frequencies)])]
    for t, values in zip(times, np.atleast_2d(curve.values)):
        lines.append(",".join([_g6(t), *(_g6(v) for v in values)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ----------------------------------------------------------------------------
# batch manifest

_CONFIG_KEYS = {
    "f0_min": float, "f0_max": float, "n_harm": int, "nharm": int, "theta": float,
    "frame_ms": float, "frame_length_ms": float, "hop_ms": float, "lpc_order": int,
    "source": str, "grid_step_hz": float,
}
_CONFIG_ALIASES = {"nharm": "n_harm", "frame_ms": "frame_length_ms"}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class FileEntry:
    audio: Path
    truth: Path | None = None


@dataclass
class RunManifest:
    files: list[FileEntry]
    output_dir: Path
    condition: str | None = None
    noise: Path | None = None
    snr_db: float | None = None
    noise_offset: int = 0
    uncertain: UncertainPolicy = UncertainPolicy.UNVOICED
    plot_data: bool = False
    plot_surface: bool = False
    jobs: int = 1
    config_overrides: dict = field(default_factory=dict)

    @property
    def config(self) -> TrackerConfig:
        return TrackerConfig(**self.config_overrides)

    @property
    def condition_label(self) -> str:
        if self.condition:
            return self.condition
        if self.noise is not None:
            return f"{self.noise.stem}@{self.snr_db:g}dB"
        return "clean"

    def validate(self) -> None:
        missing = [p for p in self.input_paths() if not p.is_file()]
        if missing:
            raise FileNotFoundError(f"manifest references missing files: {', '.join(map(str, missing))}")
        if (self.noise is None) != (self.snr_db is None):
            raise ValueError("noise and snr_db must be given together")
        self.config  # noqa: B018  (validates overrides)

    def input_paths(self) -> list[Path]:
        paths = []
        for entry in self.files:
            paths.append(entry.audio)
            if entry.truth is not None:
                paths.append(entry.truth)
        if self.noise is not None:
            paths.append(self.noise)
        return paths


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
        return value[1:-1]
    return value


def _bool(value: str, path, lineno: int) -> bool:
    low = value.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ParseError(f"expected a boolean, got {value!r}", path, line=lineno)


def read_manifest(path) -> RunManifest:
    """
    Parse a flat ``key = value`` manifest.

    ``file = <audio.wav> [<truth.txt>]`` may repeat; every other key appears
    at most once. Relative paths are resolved against the manifest directory.
    ``#`` starts a comment.
    """
    path = Path(path)
    base = path.parent
    files: list[FileEntry] = []
    values: dict[str, tuple[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError("expected key = value", path, line=lineno)
            key, value = (s.strip() for s in text.split("=", 1))
            key = key.lower().replace("-", "_")
            if key == "file":
                parts = [_unquote(p) for p in value.split()]
                if not 1 <= len(parts) <= 2:
                    raise ParseError("file = <audio> [<truth>]", path, line=lineno)
                files.append(FileEntry(base / parts[0], base / parts[1] if len(parts) == 2 else None))
                continue
            if key in values:
                raise ParseError(f"duplicate key {key!r}", path, line=lineno)
            values[key] = (_unquote(value), lineno)

    if not files:
        raise ParseError("manifest lists no files", path)
    out = RunManifest(files=files, output_dir=base / values.pop("output_dir", ("out", 0))[0])
    for key, (value, lineno) in values.items():
        try:
            if key == "condition":
                out.condition = value
            elif key == "noise":
                out.noise = base / value
            elif key == "snr_db":
                out.snr_db = float(value)
            elif key == "noise_offset":
                out.noise_offset = int(value)
            elif key == "uncertain":
                out.uncertain = UncertainPolicy(value)
            elif key == "plot_data":
                out.plot_data = _bool(value, path, lineno)
            elif key == "plot_surface":
                out.plot_surface = _bool(value, path, lineno)
            elif key == "jobs":
                out.jobs = int(value)
            elif key in _CONFIG_KEYS:
                out.config_overrides[_CONFIG_ALIASES.get(key, key)] = _CONFIG_KEYS[key](value)
            else:
                raise ParseError(f"unknown key {key!r}", path, line=lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad value for {key!r}: {exc}", path, line=lineno) from None
    return out
