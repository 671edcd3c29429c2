"""Manifest rows, serialization, and whole-file validation.

The manifest is line-delimited JSON, one utterance per line, sorted by
(title_id, language, start_ms); paths are stored relative to the manifest's
directory so runs are relocatable and byte-comparable. Dropped utterances go
to a sidecar rejects manifest carrying the dropping stage and reason.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..audio.io import WavFormatError, wav_info

STAGE_FLAGS = ("merged", "wer_kept", "dur_kept", "paired", "spk_kept")
ROW_SORT_KEY = lambda row: (row.title_id, row.language, row.start_ms)  # noqa: E731


@dataclass(frozen=True)
class ManifestRow:
    utterance_id: str
    title_id: str
    language: str
    start_ms: int
    end_ms: int
    duration_s: float
    audio_path: str
    subtitle_text: str
    asr_text: str
    wer: float
    speaker_cluster: int
    pair_id: str | None = None
    unit_path: str | None = None
    stage_flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        unknown = set(self.stage_flags) - set(STAGE_FLAGS)
        if unknown:
            raise ValueError(f"unknown stage flags {sorted(unknown)}")
        object.__setattr__(self, "stage_flags", frozenset(self.stage_flags))

    def to_json(self) -> str:
        data = {
            "utterance_id": self.utterance_id,
            "title_id": self.title_id,
            "language": self.language,
            "start_ms": self.start_ms,
            "end_ms": self.end_ms,
            "duration_s": self.duration_s,
            "audio_path": self.audio_path,
            "subtitle_text": self.subtitle_text,
            "asr_text": self.asr_text,
            "wer": self.wer,
            "speaker_cluster": self.speaker_cluster,
            "pair_id": self.pair_id,
            "unit_path": self.unit_path,
            "stage_flags": sorted(self.stage_flags),
        }
        return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ManifestRow":
        data = json.loads(line)
        return cls(
            utterance_id=data["utterance_id"],
            title_id=data["title_id"],
            language=data["language"],
            start_ms=data["start_ms"],
            end_ms=data["end_ms"],
            duration_s=data["duration_s"],
            audio_path=data["audio_path"],
            subtitle_text=data["subtitle_text"],
            asr_text=data["asr_text"],
            wer=data["wer"],
            speaker_cluster=data["speaker_cluster"],
            pair_id=data.get("pair_id"),
            unit_path=data.get("unit_path"),
            stage_flags=frozenset(data.get("stage_flags", ())),
        )


def write_manifest(path: str | Path, rows: Iterable[ManifestRow]) -> None:
    ordered = sorted(rows, key=ROW_SORT_KEY)
    text = "".join(row.to_json() + "\n" for row in ordered)
    Path(path).write_text(text, encoding="utf-8")


def read_manifest(path: str | Path) -> list[ManifestRow]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(ManifestRow.from_json(line))
    return rows


def export_manifest_csv(manifest_path: str | Path, csv_path: str | Path) -> None:
    """Flatten the manifest into the structured-CSV form."""
    rows = read_manifest(manifest_path)
    columns = [
        "utterance_id", "title_id", "language", "start_ms", "end_ms",
        "duration_s", "audio_path", "subtitle_text", "asr_text", "wer",
        "speaker_cluster", "pair_id", "unit_path", "stage_flags",
    ]
    with Path(csv_path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    row.utterance_id, row.title_id, row.language, row.start_ms,
                    row.end_ms, row.duration_s, row.audio_path, row.subtitle_text,
                    row.asr_text, row.wer, row.speaker_cluster,
                    row.pair_id or "", row.unit_path or "",
                    ";".join(sorted(row.stage_flags)),
                ]
            )


def validate_manifest(manifest_path: str | Path, hop_ms: int = 20) -> list[str]:
    """Check every row invariant plus cross-row consistency.

    Returns a list of violation strings; an empty list means the manifest is
    valid. Unreadable rows become violations rather than exceptions.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    violations: list[str] = []
    rows: list[ManifestRow] = []
    try:
        lines = manifest_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        return [f"cannot read manifest: {exc}"]

    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rows.append(ManifestRow.from_json(line))
        except (ValueError, KeyError, TypeError) as exc:
            violations.append(f"line {line_no}: corrupt row ({exc})")

    seen_ids: set[str] = set()
    for row in rows:
        rid = row.utterance_id
        if rid in seen_ids:
            violations.append(f"{rid}: duplicate utterance_id")
        seen_ids.add(rid)

        expected = (row.end_ms - row.start_ms) / 1000.0
        if abs(row.duration_s - expected) > 1e-6:
            violations.append(f"{rid}: duration_s does not match interval")
        if row.wer is None:
            violations.append(f"{rid}: missing wer")

        audio = base / row.audio_path
        if not audio.is_file():
            violations.append(f"{rid}: missing audio file {row.audio_path}")
        else:
            try:
                n, rate = wav_info(audio)
                if abs(n / rate - row.duration_s) > hop_ms / 1000.0:
                    violations.append(
                        f"{rid}: audio length {n / rate:.3f}s deviates from "
                        f"duration_s {row.duration_s:.3f} by more than one hop"
                    )
            except WavFormatError as exc:
                violations.append(f"{rid}: unreadable audio ({exc})")
        if row.unit_path is not None and not (base / row.unit_path).is_file():
            violations.append(f"{rid}: missing unit file {row.unit_path}")

    by_pair: dict[str, list[ManifestRow]] = {}
    for row in rows:
        if row.pair_id is not None:
            by_pair.setdefault(row.pair_id, []).append(row)
    for pair_id, members in sorted(by_pair.items()):
        if len(members) != 2:
            violations.append(f"pair {pair_id}: expected 2 rows, found {len(members)}")
            continue
        if {m.language for m in members} != {"en", "es"}:
            violations.append(f"pair {pair_id}: languages must be {{en, es}}")
        if len({m.title_id for m in members}) != 1:
            violations.append(f"pair {pair_id}: spans multiple titles")

    scopes: dict[tuple[str, str], set[int]] = {}
    for row in rows:
        scopes.setdefault((row.title_id, row.language), set()).add(row.speaker_cluster)
    for (title, language), clusters in sorted(scopes.items()):
        if clusters != set(range(len(clusters))):
            violations.append(
                f"{title}/{language}: speaker clusters not dense: {sorted(clusters)}"
            )
    return violations
