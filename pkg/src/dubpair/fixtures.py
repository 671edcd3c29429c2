"""Synthetic mini-corpus generator for offline, deterministic pipeline runs.

Two titles, two language tracks each. Every speaker is a fixed tone+noise
template, so all of a speaker's utterances are byte-identical once sliced;
that makes the mock adapter's hash-seeded embeddings cluster them exactly,
and lets the ASR fixture table key one transcript per speaker template.
Subtitle texts are perturbed against those transcripts to hit exact WER
levels (0, 0.2, 0.5, 0.8), and the layout exercises merging, duration
outliers, an unpaired cue per track, and one identical-audio pair whose
embedding similarity is exactly 1.0.
"""

from __future__ import annotations

import hashlib
import json
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import AudioBuffer, read_wav, slice_ms, write_wav

SAMPLE_RATE = 16000
TITLES = ("t01", "t02")
LANGS = ("en", "es")

# Per-title, per-language tone frequencies for each speaker role. The "X"
# role is shared between languages of a title: both tracks carry the same
# waveform at the same offset, producing an identical-audio pair.
ROLE_FREQS = {
    "t01": {
        "en": {"A": 210.0, "B": 190.0, "C": 230.0, "L": 250.0, "N": 270.0},
        "es": {"A": 140.0, "B": 160.0, "C": 290.0, "L": 120.0, "N": 330.0},
        "X": 310.0,
    },
    "t02": {
        "en": {"A": 215.0, "B": 185.0, "C": 235.0, "L": 255.0, "N": 275.0},
        "es": {"A": 145.0, "B": 165.0, "C": 285.0, "L": 125.0, "N": 325.0},
        "X": 305.0,
    },
}

WORDS = {
    "en": {
        "A": "alpha bravo charlie delta echo",
        "A_p": "alpha bravo charlie delta foxtrot",        # 1 sub / 5 -> 0.2
        "B": "golf hotel india juliett kilo",
        "B_p": "golf hotel india juliett lima",            # 0.2
        "C": "mike november oscar papa quebec",
        "C_08": "romeo sierra tango uniform quebec",       # 4 subs / 5 -> 0.8
        "C_05": "mike november oscar victor whiskey xray",  # 3 edits / 6 -> 0.5
        "M": "papa quebec romeo sierra tango uniform victor whiskey xray yankee",
        "M_a": "papa quebec rome sierra tango",            # 1 of the 2 merged diffs
        "M_b": "uniform victor whiskey xray zulu",         # the other diff -> 2/10
        "H_a": "i think we should wait",
        "H_b": "until tomorrow morning.",
        "H": "i think we should wait until tomorrow morning",
        "S_a": "Stop right there now.",
        "S_a_t": "stop right there now",
        "S_b": "Hands where i can see.",
        "S_b_t": "hands where i can see",
        "L": "lima mike november oscar papa quebec romeo sierra",
        "X": "x one two three four",
    },
    "es": {
        "A": "azul blanco casa dedo este",
        "A_p": "azul blanco casa dedo flor",
        "B": "gato hoja isla jugo kilo",
        "B_p": "gato hoja isla jugo luna",
        "C": "mesa noche oso pato queso",
        "C_08": "rana selva tigre uva queso",
        "C_05": "mesa noche oso vaca wifi xilo",
        "M": "pan queso rosa selva tambor uno verde whisky xilo yate",
        "M_a": "pan queso rojo selva tambor",
        "M_b": "uno verde whisky xilo zumo",
        "H_a": "creo que debemos esperar",
        "H_b": "hasta mañana temprano.",
        "H": "creo que debemos esperar hasta mañana temprano",
        "S_a": "¡Detente ahí ahora!",
        "S_a_t": "detente ahí ahora",
        "S_b": "Manos donde pueda ver.",
        "S_b_t": "manos donde pueda ver",
        "L": "luna mesa noche oso pato queso rana selva",
        "X": "x one two three four",
    },
}

HINTS = {"A": "ANNA", "B": "BRUNO", "C": "CARLA", "L": "DIEGO", "X": "SAM"}


@dataclass(frozen=True)
class RawCue:
    start_ms: int
    end_ms: int
    hint: str | None
    text: str
    role: str  # waveform template id within the track


@dataclass(frozen=True)
class SegmentSpec:
    """A post-merge segment interval with the transcript the mock returns."""

    start_ms: int
    end_ms: int
    transcript: str


def _sec(seconds: float) -> int:
    return round(seconds * 1000)


def _layout(lang: str) -> tuple[list[RawCue], list[SegmentSpec]]:
    w = WORDS[lang]
    shift = 0 if lang == "en" else 200
    cues: list[RawCue] = []
    segments: list[SegmentSpec] = []

    def add(start_s, dur_s, hint, text, role, transcript=None, merged_into=None):
        start = _sec(start_s) + (0 if role == "X" else shift)
        end = start + _sec(dur_s)
        cues.append(RawCue(start, end, hint, text, role))
        if merged_into is None and transcript is not None:
            segments.append(SegmentSpec(start, end, transcript))

    # Speaker A: 7 utterances, WER pattern 0/0/.2/.2/0/0/.2
    for start, text in zip(
        (10, 20, 30, 40, 50, 60, 70),
        (w["A"], w["A"], w["A_p"], w["A_p"], w["A"], w["A"], w["A_p"]),
    ):
        add(start, 4, HINTS["A"], text, "A", transcript=w["A"])
    # Speaker B: 4 utterances (one 0.2) -> a four-pair cluster
    for start, text in zip((80, 90, 100, 110), (w["B"], w["B"], w["B_p"], w["B"])):
        add(start, 4, HINTS["B"], text, "B", transcript=w["B"])
    # Same-speaker merge: two ANNA cues 500 ms apart -> one 6 s segment
    add(120, 2, HINTS["A"], w["M_a"], "m1", merged_into="M")
    add(122.5, 3.5, HINTS["A"], w["M_b"], "m2", merged_into="M")
    segments.append(SegmentSpec(_sec(120) + shift, _sec(126) + shift, w["M"]))
    # Hintless merge: no terminal punctuation on the first cue
    add(130, 1.5, None, w["H_a"], "n1", merged_into="H")
    add(132, 2, None, w["H_b"], "n2", merged_into="H")
    segments.append(SegmentSpec(_sec(130) + shift, _sec(134) + shift, w["H"]))
    # Hintless non-merge (terminal punctuation): two 2 s segments, dropped by duration
    add(140, 2, None, w["S_a"], "n3", transcript=w["S_a_t"])
    add(142.5, 2, None, w["S_b"], "n4", transcript=w["S_b_t"])
    # Speaker C, WER 0.8: dropped at the threshold
    for start in (150, 156):
        add(start, 4, HINTS["C"], w["C_08"], "C", transcript=w["C"])
    # Speaker C, WER 0.5: cut by the keep-fraction rule
    for start in (162, 168, 174, 180, 186):
        add(start, 4, HINTS["C"], w["C_05"], "C", transcript=w["C"])
    # 16 s utterance: survives WER, dropped by the duration ceiling
    add(192, 16, HINTS["L"], w["L"], "L", transcript=w["L"])
    if lang == "en":
        # English-only utterance with no Spanish counterpart
        add(210, 4, HINTS["A"], w["A"], "A", transcript=w["A"])
    # Identical-audio pair: same waveform, same offset in both tracks
    add(216, 4, HINTS["X"], w["X"], "X", transcript=w["X"])
    if lang == "es":
        # Spanish-only utterance with no English counterpart
        add(222, 4, HINTS["A"], w["A"], "A", transcript=w["A"])
    return cues, segments


def _format_timestamp(ms: int) -> str:
    hours, rem = divmod(ms, 3_600_000)
    minutes, rem = divmod(rem, 60_000)
    seconds, millis = divmod(rem, 1000)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d},{millis:03d}"


def _render_srt(cues: list[RawCue]) -> bytes:
    blocks = []
    for i, cue in enumerate(cues, start=1):
        text = f"{cue.hint}: {cue.text}" if cue.hint else cue.text
        blocks.append(
            f"{i}\n{_format_timestamp(cue.start_ms)} --> {_format_timestamp(cue.end_ms)}\n{text}\n"
        )
    return "\n".join(blocks).encode("utf-8")


def _role_seed(title_id: str, lang: str, role: str) -> int:
    scope = f"{title_id}/{role}" if role == "X" else f"{title_id}/{lang}/{role}"
    return zlib.crc32(scope.encode("utf-8"))


def _role_freq(title_id: str, lang: str, role: str) -> float:
    table = ROLE_FREQS[title_id]
    if role == "X":
        return table["X"]
    base = role[0].upper() if role[0] in "mn" else role
    if role in ("m1", "m2"):
        base = "A"
    elif role.startswith("n"):
        base = "N"
    return table[lang][base]


def _tone(n_samples: int, freq: float, seed: int) -> np.ndarray:
    t = np.arange(n_samples) / SAMPLE_RATE
    rng = np.random.default_rng(seed)
    wave = 0.35 * np.sin(2 * np.pi * freq * t) + 0.01 * rng.standard_normal(n_samples)
    return np.clip(wave, -1.0, 1.0)


def _build_track(title_id: str, lang: str, cues: list[RawCue]) -> AudioBuffer:
    end_ms = max(c.end_ms for c in cues) + 800
    samples = np.zeros(end_ms * SAMPLE_RATE // 1000)
    templates: dict[str, np.ndarray] = {}
    for cue in cues:
        n = (cue.end_ms - cue.start_ms) * SAMPLE_RATE // 1000
        if cue.role not in templates:
            templates[cue.role] = _tone(
                n, _role_freq(title_id, lang, cue.role), _role_seed(title_id, lang, cue.role)
            )
        template = templates[cue.role]
        if template.shape[0] != n:
            raise AssertionError(f"role {cue.role} reused with a different duration")
        lo = cue.start_ms * SAMPLE_RATE // 1000
        samples[lo : lo + n] = template
    return AudioBuffer(samples, SAMPLE_RATE)


def build_mini_corpus(dest: str | Path) -> dict:
    """Write the synthetic corpus under ``dest``; returns a small summary.

    Layout: ``dest/<title>/{en,es}.{wav,srt}`` plus ``dest/fixtures.json``
    holding the mock-ASR transcript table keyed by segment content hash.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    transcripts: dict[str, str] = {}
    cue_counts: dict[str, int] = {}
    scratch = dest / ".scratch.wav"
    for title_id in TITLES:
        title_dir = dest / title_id
        title_dir.mkdir(exist_ok=True)
        for lang in LANGS:
            cues, segments = _layout(lang)
            cue_counts[f"{title_id}/{lang}"] = len(cues)
            track = _build_track(title_id, lang, cues)
            wav_path = title_dir / f"{lang}.wav"
            write_wav(wav_path, track)
            (title_dir / f"{lang}.srt").write_bytes(_render_srt(cues))
            # Hash each post-merge segment exactly as the pipeline will cut it:
            # read the quantized track back, slice, and re-encode.
            quantized = read_wav(wav_path)
            for segment in segments:
                piece = slice_ms(quantized, segment.start_ms, segment.end_ms)
                write_wav(scratch, piece)
                digest = hashlib.sha256(scratch.read_bytes()).hexdigest()
                transcripts[digest] = segment.transcript
    scratch.unlink(missing_ok=True)
    (dest / "fixtures.json").write_text(
        json.dumps({"transcripts": transcripts}, indent=2, sort_keys=True, ensure_ascii=False)
        + "\n",
        encoding="utf-8",
    )
    return {"titles": list(TITLES), "cues": cue_counts, "transcripts": len(transcripts)}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m dubpair.fixtures <dest-dir>", file=sys.stderr)
        return 1
    summary = build_mini_corpus(argv[0])
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
