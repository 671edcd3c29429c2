"""SRT subtitle parsing and same-speaker cue merging.

Subtitle files arrive as SubRip (.srt) byte streams, one per title per
language. Parsing strips markup, pulls an optional leading ``NAME:`` speaker
hint, and yields an ordered :class:`CueTrack`. :func:`merge_cues` then joins
consecutive cues that belong to the same speaker so each data point covers a
full conversational turn.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

LANGUAGES = ("en", "es")
TERMINAL_PUNCTUATION = (".", "!", "?")

_TIMING_RE = re.compile(
    r"^(\d{2}):(\d{2}):(\d{2}),(\d{3}) --> (\d{2}):(\d{2}):(\d{2}),(\d{3})\s*$"
)
_TAG_RE = re.compile(r"<[^<>]*>|\{[^{}]*\}")
_LEADING_HYPHEN_RE = re.compile(r"^\s*-+\s*")
_WS_RE = re.compile(r"\s+")
# 1-3 whitespace-separated words before a colon; upper-case check happens after.
_SPEAKER_RE = re.compile(r"^(\S+(?: \S+){0,2}):\s*(.*)$", re.DOTALL)


class SrtParseError(ValueError):
    """Raised when an SRT document cannot be parsed."""


@dataclass(frozen=True)
class SubtitleCue:
    """One timed subtitle line after cleanup."""

    index: int
    start_ms: int
    end_ms: int
    text: str
    speaker_hint: str | None = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"cue index must be positive, got {self.index}")
        if self.start_ms < 0:
            raise ValueError(f"cue start must be >= 0, got {self.start_ms}")
        if self.end_ms <= self.start_ms:
            raise ValueError(
                f"cue end ({self.end_ms}) must be after start ({self.start_ms})"
            )
        if self.speaker_hint is not None and not self.speaker_hint:
            raise ValueError("speaker_hint must be non-empty when present")


@dataclass(frozen=True)
class CueTrack:
    """Ordered cues of one subtitle file, plus non-fatal parse warnings."""

    title_id: str
    language: str
    cues: tuple[SubtitleCue, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")


def _lines_with_offsets(raw: bytes) -> list[tuple[int, bytes]]:
    lines: list[tuple[int, bytes]] = []
    pos = 0
    while pos <= len(raw):
        nl = raw.find(b"\n", pos)
        if nl == -1:
            lines.append((pos, raw[pos:]))
            break
        lines.append((pos, raw[pos:nl]))
        pos = nl + 1
    return lines


def _decode_line(offset: int, chunk: bytes) -> str:
    chunk = chunk.rstrip(b"\r")
    if offset == 0 and chunk.startswith(b"\xef\xbb\xbf"):
        chunk = chunk[3:]
    try:
        return chunk.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SrtParseError(f"undecodable UTF-8 at byte offset {offset}: {exc}") from exc


def _timing_to_ms(h: str, m: str, s: str, ms: str) -> int:
    return int(h) * 3_600_000 + int(m) * 60_000 + int(s) * 1_000 + int(ms)


def _split_speaker(text: str) -> tuple[str | None, str]:
    match = _SPEAKER_RE.match(text)
    if not match:
        return None, text
    words = match.group(1).split(" ")
    if not all(word.isupper() for word in words):
        return None, text
    return " ".join(words).upper(), match.group(2)


def _clean_block_text(text_lines: list[str]) -> tuple[str, str | None]:
    cleaned = []
    for line in text_lines:
        line = _TAG_RE.sub("", line)
        line = _LEADING_HYPHEN_RE.sub("", line)
        cleaned.append(line)
    joined = _WS_RE.sub(" ", " ".join(cleaned)).strip()
    hint, joined = _split_speaker(joined)
    return joined.strip(), hint


def parse_srt(raw_bytes: bytes, title_id: str, language: str) -> CueTrack:
    """Parse an SRT byte stream into a :class:`CueTrack`.

    Markup tags are stripped, a leading run of up to three upper-case words
    followed by ``:`` becomes the speaker hint, leading dialogue hyphens are
    removed, and multi-line text is joined with single spaces. Cues whose text
    is empty after cleanup are dropped; cues whose end does not follow their
    start are rejected into the warnings tally. A malformed timing line is a
    hard :class:`SrtParseError` naming the byte offset.
    """
    if language not in LANGUAGES:
        raise ValueError(f"unsupported language {language!r}")

    lines = [(off, _decode_line(off, chunk)) for off, chunk in _lines_with_offsets(raw_bytes)]

    blocks: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    for off, text in lines:
        if text.strip():
            current.append((off, text))
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)

    warnings: list[str] = []
    cues: list[SubtitleCue] = []
    for block in blocks:
        i = 0
        if i < len(block) and block[i][1].strip().isdigit():
            i += 1
        if i >= len(block):
            raise SrtParseError(
                f"malformed timing line at byte offset {block[0][0]}: missing timing"
            )
        timing_off, timing_line = block[i]
        match = _TIMING_RE.match(timing_line)
        if not match:
            raise SrtParseError(
                f"malformed timing line at byte offset {timing_off}: {timing_line!r}"
            )
        start_ms = _timing_to_ms(*match.group(1, 2, 3, 4))
        end_ms = _timing_to_ms(*match.group(5, 6, 7, 8))
        text, hint = _clean_block_text([line for _, line in block[i + 1 :]])
        if not text:
            warnings.append(f"dropped empty cue at byte offset {block[0][0]}")
            continue
        if end_ms <= start_ms:
            warnings.append(
                f"rejected cue with end <= start at byte offset {block[0][0]}"
            )
            continue
        cues.append(
            SubtitleCue(
                index=len(cues) + 1,
                start_ms=start_ms,
                end_ms=end_ms,
                text=text,
                speaker_hint=hint,
            )
        )

    cues.sort(key=lambda cue: cue.start_ms)
    for prev, cur in zip(cues, cues[1:]):
        if cur.start_ms < prev.end_ms:
            warnings.append(f"overlapping cues at {cur.start_ms} ms")
    for cue in cues:
        if cue.text.endswith(("...", "…")):
            warnings.append(f"ellipsis-terminated cue at {cue.start_ms} ms")

    cues = [replace(cue, index=i + 1) for i, cue in enumerate(cues)]
    return CueTrack(title_id, language, tuple(cues), tuple(warnings))


def _mergeable(prev: SubtitleCue, nxt: SubtitleCue, max_gap_ms: int) -> bool:
    gap = nxt.start_ms - prev.end_ms
    if gap < 0 or gap > max_gap_ms:
        return False
    if prev.speaker_hint is not None and nxt.speaker_hint is not None:
        return prev.speaker_hint == nxt.speaker_hint
    if prev.speaker_hint is None and nxt.speaker_hint is None:
        return not prev.text.endswith(TERMINAL_PUNCTUATION)
    return False


def merge_cues(track: CueTrack, max_gap_ms: int = 1000) -> CueTrack:
    """Merge adjacent cues that continue the same speaker turn.

    Cues merge when the gap between them is within ``max_gap_ms`` and either
    both carry the same speaker hint, or neither carries a hint and the
    earlier text does not end in terminal punctuation. Overlapping cues are
    never merged. The merged cue spans the full interval and joins texts with
    a single space.
    """
    if max_gap_ms < 0:
        raise ValueError("max_gap_ms must be >= 0")
    merged: list[SubtitleCue] = []
    for cue in track.cues:
        if merged and _mergeable(merged[-1], cue, max_gap_ms):
            prev = merged[-1]
            merged[-1] = replace(
                prev,
                end_ms=cue.end_ms,
                text=f"{prev.text} {cue.text}",
            )
        else:
            merged.append(cue)
    merged = [replace(cue, index=i + 1) for i, cue in enumerate(merged)]
    return replace(track, cues=tuple(merged))
