"""End-to-end pipeline: ingest through manifest write.

Stage order: ingest -> parse -> merge -> segment (slice+resample) -> denoise
-> asr -> wer filter -> duration filter -> pair -> speaker label ->
pair-similarity filter -> speaker-count filter -> units -> manifest. Titles
are the parallelism unit; global stages run once over the merged results.
Every stage is cached under a content hash of its inputs and the config keys
it reads, so reruns skip finished work and outputs are byte-stable across
parallelism levels.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import srt
from ..adapter import (
    MOCK_EMBED_DIM,
    AdapterError,
    AdapterPool,
    MockAdapterSession,
    ProcessAdapterSession,
)
from ..audio import read_wav, resample, slice_ms, write_wav
from ..audio.features import mfcc
from ..filtering import SegmentRecord, filter_by_duration, filter_by_wer, normalize_text, wer
from ..speakers import (
    cosine_similarity,
    interval_iou,
    pseudo_label,
)
from ..units import assign_units, condense, format_units, kmeans_fit, save_centroids
from .cache import StageCache, material_key
from .config import ADAPTER_CMD_ENV, PipelineConfig, config_fingerprint
from .manifest import ManifestRow, write_manifest

logger = logging.getLogger(__name__)

LANGS = ("en", "es")
STAGES = (
    "ingest",
    "parse",
    "merge",
    "segment",
    "denoise",
    "asr",
    "wer_filter",
    "duration_filter",
    "pair",
    "speaker_label",
    "pair_similarity_filter",
    "speaker_count_filter",
    "units",
    "manifest",
)
FIXTURES_NAME = "fixtures.json"


class PipelineError(RuntimeError):
    """A non-config failure that aborts the run."""


@dataclass
class StageReport:
    stage: str
    input_count: int
    output_count: int
    dropped_count: int
    wall_time_s: float
    warnings: list[str] = field(default_factory=list)
    cache_hits: int = 0

    def __post_init__(self) -> None:
        if self.input_count != self.output_count + self.dropped_count:
            raise ValueError(
                f"stage {self.stage}: input {self.input_count} != "
                f"output {self.output_count} + dropped {self.dropped_count}"
            )

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "dropped_count": self.dropped_count,
            "wall_time_s": self.wall_time_s,
            "warnings": list(self.warnings),
            "cache_hits": self.cache_hits,
        }


@dataclass(frozen=True)
class TitleInputs:
    title_id: str
    wav_paths: dict[str, Path]
    srt_paths: dict[str, Path]
    file_hashes: dict[str, str]


@dataclass
class _Tally:
    """Accumulates counts, timings, and cache hits for one stage."""

    input_count: int = 0
    output_count: int = 0
    dropped_count: int = 0
    wall_time_s: float = 0.0
    warnings: list[str] = field(default_factory=list)
    cache_hits: int = 0

    def report(self, stage: str) -> StageReport:
        return StageReport(
            stage,
            self.input_count,
            self.output_count,
            self.dropped_count,
            round(self.wall_time_s, 6),
            self.warnings,
            self.cache_hits,
        )


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


_TALLY_LOCK = threading.Lock()


def _cached(cache: StageCache, stage: str, material: dict, tally: _Tally,
            compute: Callable[[str], dict]) -> dict:
    """Load a stage payload or compute+store it; returns the payload."""
    key = material_key({"stage": stage, **material})
    started = time.perf_counter()
    payload = cache.load(stage, key)
    hit = payload is not None
    if not hit:
        payload = compute(key)
        cache.store(stage, key, payload)
    payload["_key"] = key
    elapsed = time.perf_counter() - started
    with _TALLY_LOCK:
        tally.cache_hits += 1 if hit else 0
        tally.wall_time_s += elapsed
    return payload


def _discover_titles(input_root: Path, tally: _Tally) -> list[TitleInputs]:
    if not input_root.is_dir():
        raise PipelineError(f"input_root {input_root} is not a directory")
    titles: list[TitleInputs] = []
    candidates = sorted(p for p in input_root.iterdir() if p.is_dir())
    tally.input_count = len(candidates)
    for directory in candidates:
        wavs = {lang: directory / f"{lang}.wav" for lang in LANGS}
        srts = {lang: directory / f"{lang}.srt" for lang in LANGS}
        missing = [p.name for p in (*wavs.values(), *srts.values()) if not p.is_file()]
        if missing:
            tally.dropped_count += 1
            tally.warnings.append(
                f"title {directory.name} skipped: missing {', '.join(sorted(missing))}"
            )
            continue
        hashes = {f"{lang}.wav": _file_sha256(wavs[lang]) for lang in LANGS}
        hashes.update({f"{lang}.srt": _file_sha256(srts[lang]) for lang in LANGS})
        titles.append(TitleInputs(directory.name, wavs, srts, hashes))
        tally.output_count += 1
    return titles


def _count_blocks(raw: bytes) -> int:
    blocks = 0
    in_block = False
    for line in raw.replace(b"\r\n", b"\n").split(b"\n"):
        if line.strip():
            if not in_block:
                blocks += 1
                in_block = True
        else:
            in_block = False
    return blocks


def _utt_id(title_id: str, language: str, start_ms: int) -> str:
    return f"{title_id}-{language}-{start_ms:08d}"


def _make_adapter_factory(config: PipelineConfig) -> tuple[Callable[[], object], dict]:
    cmd = os.environ.get(ADAPTER_CMD_ENV) or config.adapter_cmd
    if cmd:
        identity = {"kind": "cmd", "cmd": cmd}
        return (lambda: ProcessAdapterSession(cmd)), identity
    fixtures_path = config.input_root / FIXTURES_NAME
    transcripts: dict[str, str] = {}
    fixtures_hash = "none"
    if fixtures_path.is_file():
        fixtures_hash = _file_sha256(fixtures_path)
        data = json.loads(fixtures_path.read_text(encoding="utf-8"))
        transcripts = dict(data.get("transcripts", {}))
    identity = {"kind": "mock", "fixtures": fixtures_hash, "embed_dim": MOCK_EMBED_DIM}
    return (lambda: MockAdapterSession(transcripts)), identity


def _parse_stage(title: TitleInputs, lang: str, cache: StageCache, tally: _Tally) -> dict:
    def compute(_key: str) -> dict:
        raw = title.srt_paths[lang].read_bytes()
        track = srt.parse_srt(raw, title.title_id, lang)
        return {
            "blocks": _count_blocks(raw),
            "cues": [
                {
                    "start_ms": c.start_ms,
                    "end_ms": c.end_ms,
                    "text": c.text,
                    "speaker_hint": c.speaker_hint,
                }
                for c in track.cues
            ],
            "warnings": list(track.warnings),
        }

    material = {
        "title": title.title_id,
        "language": lang,
        "srt": title.file_hashes[f"{lang}.srt"],
    }
    return _cached(cache, "parse", material, tally, compute)


def _merge_stage(title: TitleInputs, lang: str, parse_payload: dict,
                 config: PipelineConfig, cache: StageCache, tally: _Tally) -> dict:
    def compute(_key: str) -> dict:
        cues = tuple(
            srt.SubtitleCue(i + 1, c["start_ms"], c["end_ms"], c["text"], c["speaker_hint"])
            for i, c in enumerate(parse_payload["cues"])
        )
        track = srt.CueTrack(title.title_id, lang, cues)
        merged = srt.merge_cues(track, config.merge_gap_ms)
        spans = {(c.start_ms, c.end_ms) for c in cues}
        return {
            "cues": [
                {
                    "start_ms": c.start_ms,
                    "end_ms": c.end_ms,
                    "text": c.text,
                    "speaker_hint": c.speaker_hint,
                    "merged": (c.start_ms, c.end_ms) not in spans,
                }
                for c in merged.cues
            ]
        }

    material = {"parse": parse_payload["_key"], "merge_gap_ms": config.merge_gap_ms}
    return _cached(cache, "merge", material, tally, compute)


def _segment_stage(title: TitleInputs, lang: str, merge_payload: dict,
                   config: PipelineConfig, cache: StageCache, tally: _Tally) -> dict:
    def compute(key: str) -> dict:
        track = read_wav(title.wav_paths[lang])
        track = resample(track, config.sample_rate_hz)
        artifact_dir = cache.artifact_dir("segment", key)
        segments = []
        dropped = []
        for cue in merge_payload["cues"]:
            utt = _utt_id(title.title_id, lang, cue["start_ms"])
            entry = {
                "utterance_id": utt,
                "title_id": title.title_id,
                "language": lang,
                "start_ms": cue["start_ms"],
                "end_ms": cue["end_ms"],
                "subtitle_text": cue["text"],
                "merged": cue["merged"],
            }
            if cue["end_ms"] * track.sample_rate_hz > track.n_samples * 1000:
                dropped.append({**entry, "reason": "cue extends past audio end"})
                continue
            piece = slice_ms(track, cue["start_ms"], cue["end_ms"])
            rel = f"cache/segment/{key}/{utt}.wav"
            write_wav(artifact_dir / f"{utt}.wav", piece)
            entry["audio_rel"] = rel
            entry["duration_s"] = (cue["end_ms"] - cue["start_ms"]) / 1000.0
            segments.append(entry)
        return {"segments": segments, "dropped": dropped}

    material = {
        "merge": merge_payload["_key"],
        "wav": title.file_hashes[f"{lang}.wav"],
        "sample_rate_hz": config.sample_rate_hz,
    }
    return _cached(cache, "segment", material, tally, compute)


def _denoise_stage(segment_payload: dict, adapter_identity: dict, pool: AdapterPool,
                   output_root: Path, cache: StageCache, tally: _Tally) -> dict:
    def compute(key: str) -> dict:
        paths: dict[str, str] = {}
        dropped = []
        with pool.session() as session:
            for seg in segment_payload["segments"]:
                audio_abs = output_root / seg["audio_rel"]
                try:
                    response = session.denoise(str(audio_abs))
                except AdapterError as exc:
                    response = None
                    reason = f"denoise failed: {exc}"
                if response is None:
                    dropped.append({"utterance_id": seg["utterance_id"], "reason": reason})
                    continue
                if not response.ok:
                    dropped.append(
                        {
                            "utterance_id": seg["utterance_id"],
                            "reason": f"denoise failed: {response.error}",
                        }
                    )
                    continue
                returned = Path(response.result)
                if returned == audio_abs:
                    paths[seg["utterance_id"]] = seg["audio_rel"]
                else:
                    # Sidecar wrote a new file: pull it under the cache so the
                    # manifest stays relative and relocatable.
                    rel = f"cache/denoise/{key}/{seg['utterance_id']}.wav"
                    target = cache.artifact_dir("denoise", key) / f"{seg['utterance_id']}.wav"
                    target.write_bytes(returned.read_bytes())
                    paths[seg["utterance_id"]] = rel
        return {"paths": paths, "dropped": dropped}

    material = {"segment": segment_payload["_key"], "adapter": adapter_identity}
    return _cached(cache, "denoise", material, tally, compute)


def _asr_stage(lang: str, segment_payload: dict, denoise_payload: dict,
               adapter_identity: dict, pool: AdapterPool, output_root: Path,
               cache: StageCache, tally: _Tally) -> dict:
    def compute(_key: str) -> dict:
        results: dict[str, dict] = {}
        dropped = []
        with pool.session() as session:
            for seg in segment_payload["segments"]:
                utt = seg["utterance_id"]
                rel = denoise_payload["paths"].get(utt)
                if rel is None:
                    continue  # already dropped at denoise
                reference = normalize_text(seg["subtitle_text"], lang)
                if not reference:
                    dropped.append(
                        {"utterance_id": utt, "reason": "empty reference after normalization"}
                    )
                    continue
                try:
                    response = session.asr(str(output_root / rel), language=lang)
                except AdapterError as exc:
                    dropped.append({"utterance_id": utt, "reason": f"asr failed: {exc}"})
                    continue
                if not response.ok:
                    dropped.append(
                        {"utterance_id": utt, "reason": f"asr failed: {response.error}"}
                    )
                    continue
                hypothesis = normalize_text(response.result, lang)
                results[utt] = {
                    "asr_text": response.result,
                    "wer": wer(reference, hypothesis),
                }
        return {"results": results, "dropped": dropped}

    material = {
        "segment": segment_payload["_key"],
        "denoise": denoise_payload["_key"],
        "language": lang,
        "adapter": adapter_identity,
    }
    return _cached(cache, "asr", material, tally, compute)


def _segment_records(utterances: dict[str, dict]) -> dict[str, SegmentRecord]:
    records = {}
    for utt, info in utterances.items():
        records[utt] = SegmentRecord(
            utterance_id=utt,
            title_id=info["title_id"],
            language=info["language"],
            start_ms=info["start_ms"],
            end_ms=info["end_ms"],
            subtitle_text=info["subtitle_text"],
            asr_text=info.get("asr_text"),
            wer=info.get("wer"),
        )
    return records


def run_pipeline(
    config: PipelineConfig, stop_after: str | None = None
) -> tuple[list[ManifestRow], list[StageReport]]:
    """Run the corpus pipeline; returns (manifest rows, stage reports).

    ``stop_after`` truncates the run after the named stage (used by the
    stage-level CLI subcommands); the manifest is only written on full runs.
    """
    config.validate()
    if stop_after is not None and stop_after not in STAGES:
        raise ValueError(f"unknown stage {stop_after!r}")
    output_root = config.output_root
    output_root.mkdir(parents=True, exist_ok=True)
    cache = StageCache(output_root / "cache")
    reports: list[StageReport] = []
    fingerprint = config_fingerprint(config)

    def done(stage: str) -> bool:
        return stop_after is not None and STAGES.index(stage) >= STAGES.index(stop_after)

    # ingest ---------------------------------------------------------------
    tally = _Tally()
    started = time.perf_counter()
    titles = _discover_titles(config.input_root, tally)
    tally.wall_time_s = time.perf_counter() - started
    reports.append(tally.report("ingest"))
    if done("ingest"):
        return [], reports

    adapter_factory, adapter_identity = _make_adapter_factory(config)
    pool = AdapterPool(adapter_factory, config.parallelism)

    try:
        # per-title stages ---------------------------------------------------
        tallies = {stage: _Tally() for stage in
                   ("parse", "merge", "segment", "denoise", "asr")}
        per_title: dict[str, dict[str, dict]] = {}

        def title_work(title: TitleInputs) -> dict[str, dict]:
            payloads: dict[str, dict] = {}
            for lang in LANGS:
                parse_payload = _parse_stage(title, lang, cache, tallies["parse"])
                payloads[f"parse_{lang}"] = parse_payload
                if done("parse"):
                    continue
                merge_payload = _merge_stage(
                    title, lang, parse_payload, config, cache, tallies["merge"]
                )
                payloads[f"merge_{lang}"] = merge_payload
                if done("merge"):
                    continue
                segment_payload = _segment_stage(
                    title, lang, merge_payload, config, cache, tallies["segment"]
                )
                payloads[f"segment_{lang}"] = segment_payload
                if done("segment"):
                    continue
                denoise_payload = _denoise_stage(
                    segment_payload, adapter_identity, pool, output_root, cache,
                    tallies["denoise"],
                )
                payloads[f"denoise_{lang}"] = denoise_payload
                if done("denoise"):
                    continue
                payloads[f"asr_{lang}"] = _asr_stage(
                    lang, segment_payload, denoise_payload, adapter_identity, pool,
                    output_root, cache, tallies["asr"],
                )
            return payloads

        if config.parallelism > 1 and len(titles) > 1:
            with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
                futures = {t.title_id: executor.submit(title_work, t) for t in titles}
                per_title = {tid: f.result() for tid, f in futures.items()}
        else:
            per_title = {t.title_id: title_work(t) for t in titles}

        rejects: list[dict] = []
        utterances: dict[str, dict] = {}

        # Aggregate per-title counts into stage reports.
        for title in titles:
            payloads = per_title[title.title_id]
            for lang in LANGS:
                parse_payload = payloads.get(f"parse_{lang}")
                if parse_payload:
                    t = tallies["parse"]
                    t.input_count += parse_payload["blocks"]
                    t.output_count += len(parse_payload["cues"])
                    t.dropped_count += parse_payload["blocks"] - len(parse_payload["cues"])
                    t.warnings.extend(
                        f"{title.title_id}/{lang}: {w}" for w in parse_payload["warnings"]
                    )
                merge_payload = payloads.get(f"merge_{lang}")
                if merge_payload:
                    t = tallies["merge"]
                    t.input_count += len(parse_payload["cues"])
                    t.output_count += len(merge_payload["cues"])
                    t.dropped_count += len(parse_payload["cues"]) - len(merge_payload["cues"])
                segment_payload = payloads.get(f"segment_{lang}")
                if segment_payload:
                    t = tallies["segment"]
                    t.input_count += len(merge_payload["cues"])
                    t.output_count += len(segment_payload["segments"])
                    t.dropped_count += len(segment_payload["dropped"])
                    for item in segment_payload["dropped"]:
                        rejects.append({**item, "dropped_stage": "segment"})
                        t.warnings.append(f"{item['utterance_id']}: {item['reason']}")
                    for seg in segment_payload["segments"]:
                        utterances[seg["utterance_id"]] = dict(seg)
                denoise_payload = payloads.get(f"denoise_{lang}")
                if denoise_payload:
                    t = tallies["denoise"]
                    t.input_count += len(segment_payload["segments"])
                    t.output_count += len(denoise_payload["paths"])
                    t.dropped_count += len(denoise_payload["dropped"])
                    for item in denoise_payload["dropped"]:
                        info = utterances.pop(item["utterance_id"], {})
                        rejects.append({**info, **item, "dropped_stage": "denoise"})
                    for utt, rel in denoise_payload["paths"].items():
                        utterances[utt]["audio_rel"] = rel
                asr_payload = payloads.get(f"asr_{lang}")
                if asr_payload:
                    t = tallies["asr"]
                    t.input_count += len(denoise_payload["paths"])
                    t.output_count += len(asr_payload["results"])
                    t.dropped_count += len(asr_payload["dropped"])
                    for item in asr_payload["dropped"]:
                        info = utterances.pop(item["utterance_id"], {})
                        rejects.append({**info, **item, "dropped_stage": "asr"})
                    for utt, result in asr_payload["results"].items():
                        utterances[utt].update(result)

        for stage in ("parse", "merge", "segment", "denoise", "asr"):
            if stop_after is not None and STAGES.index(stage) > STAGES.index(stop_after):
                break
            reports.append(tallies[stage].report(stage))
        if stop_after in ("parse", "merge", "segment", "denoise", "asr"):
            return [], reports

        asr_keys = sorted(
            per_title[t.title_id][f"asr_{lang}"]["_key"] for t in titles for lang in LANGS
        )

        # wer filter (global, per language) ----------------------------------
        tally = _Tally()
        wer_payloads = {}
        for lang in LANGS:
            def compute(_key: str, lang=lang) -> dict:
                records = [
                    r for r in _segment_records(utterances).values() if r.language == lang
                ]
                kept, dropped = filter_by_wer(records, config.wer_max, config.keep_fraction)
                return {
                    "kept": [s.utterance_id for s in kept],
                    "dropped": [
                        {
                            "utterance_id": s.utterance_id,
                            "reason": (
                                f"wer {s.wer:.6f} > {config.wer_max}"
                                if s.wer > config.wer_max
                                else "keep-fraction cut"
                            ),
                        }
                        for s in dropped
                    ],
                }

            material = {
                "asr_keys": asr_keys,
                "language": lang,
                "wer_max": config.wer_max,
                "keep_fraction": config.keep_fraction,
            }
            wer_payloads[lang] = _cached(cache, "wer_filter", material, tally, compute)
            tally.input_count += len(wer_payloads[lang]["kept"]) + len(
                wer_payloads[lang]["dropped"]
            )
            tally.output_count += len(wer_payloads[lang]["kept"])
            tally.dropped_count += len(wer_payloads[lang]["dropped"])
            for item in wer_payloads[lang]["dropped"]:
                info = utterances.get(item["utterance_id"], {})
                rejects.append({**info, **item, "dropped_stage": "wer_filter"})
        reports.append(tally.report("wer_filter"))
        if done("wer_filter"):
            return [], reports

        # duration filter -----------------------------------------------------
        tally = _Tally()
        duration_payloads = {}
        for lang in LANGS:
            def compute(_key: str, lang=lang) -> dict:
                records = _segment_records(utterances)
                survivors = [records[u] for u in wer_payloads[lang]["kept"]]
                kept, dropped = filter_by_duration(
                    survivors, config.min_duration_s, config.max_duration_s
                )
                return {
                    "kept": [s.utterance_id for s in kept],
                    "dropped": [
                        {
                            "utterance_id": s.utterance_id,
                            "reason": f"duration {s.duration_s:.3f}s outside "
                            f"[{config.min_duration_s}, {config.max_duration_s}]",
                        }
                        for s in dropped
                    ],
                }

            material = {
                "wer": wer_payloads[lang]["_key"],
                "min_duration_s": config.min_duration_s,
                "max_duration_s": config.max_duration_s,
            }
            duration_payloads[lang] = _cached(
                cache, "duration_filter", material, tally, compute
            )
            tally.input_count += len(wer_payloads[lang]["kept"])
            tally.output_count += len(duration_payloads[lang]["kept"])
            tally.dropped_count += len(duration_payloads[lang]["dropped"])
            for item in duration_payloads[lang]["dropped"]:
                info = utterances.get(item["utterance_id"], {})
                rejects.append({**info, **item, "dropped_stage": "duration_filter"})
        reports.append(tally.report("duration_filter"))
        if done("duration_filter"):
            return [], reports

        # pair ------------------------------------------------------------------
        tally = _Tally()

        def compute_pairs(_key: str) -> dict:
            records = _segment_records(utterances)
            pairs = []
            paired_ids = set()
            for title in titles:
                en = sorted(
                    (
                        records[u]
                        for u in duration_payloads["en"]["kept"]
                        if records[u].title_id == title.title_id
                    ),
                    key=lambda s: s.start_ms,
                )
                es = sorted(
                    (
                        records[u]
                        for u in duration_payloads["es"]["kept"]
                        if records[u].title_id == title.title_id
                    ),
                    key=lambda s: s.start_ms,
                )
                candidates = []
                for e in en:
                    for s in es:
                        iou = interval_iou(e.start_ms, e.end_ms, s.start_ms, s.end_ms)
                        if iou >= config.pair_iou_min:
                            candidates.append((iou, e, s))
                candidates.sort(key=lambda c: (-c[0], c[1].utterance_id, c[2].utterance_id))
                used_en: set[str] = set()
                used_es: set[str] = set()
                for iou, e, s in candidates:
                    if e.utterance_id in used_en or s.utterance_id in used_es:
                        continue
                    used_en.add(e.utterance_id)
                    used_es.add(s.utterance_id)
                    pairs.append(
                        {
                            "pair_id": f"{title.title_id}-{e.start_ms:08d}",
                            "title_id": title.title_id,
                            "en": e.utterance_id,
                            "es": s.utterance_id,
                            "iou": iou,
                        }
                    )
                paired_ids.update(used_en | used_es)
            unpaired = [
                {"utterance_id": u, "reason": "no cross-lingual match"}
                for lang in LANGS
                for u in duration_payloads[lang]["kept"]
                if u not in paired_ids
            ]
            return {"pairs": pairs, "unpaired": unpaired}

        material = {
            "duration_keys": [duration_payloads[lang]["_key"] for lang in LANGS],
            "pair_iou_min": config.pair_iou_min,
        }
        pair_payload = _cached(cache, "pair", material, tally, compute_pairs)
        survivors_count = sum(len(duration_payloads[lang]["kept"]) for lang in LANGS)
        tally.input_count = survivors_count
        tally.output_count = 2 * len(pair_payload["pairs"])
        tally.dropped_count = len(pair_payload["unpaired"])
        for item in pair_payload["unpaired"]:
            info = utterances.get(item["utterance_id"], {})
            rejects.append({**info, **item, "dropped_stage": "pair"})
        reports.append(tally.report("pair"))
        if done("pair"):
            return [], reports

        # speaker labels (per title+language over paired utterances) -----------
        tally = _Tally()

        def compute_labels(_key: str) -> dict:
            paired_by_scope: dict[tuple[str, str], list[str]] = {}
            records = _segment_records(utterances)
            for pair in pair_payload["pairs"]:
                for lang, utt in (("en", pair["en"]), ("es", pair["es"])):
                    scope = (pair["title_id"], lang)
                    paired_by_scope.setdefault(scope, []).append(utt)

            embeddings: dict[str, list[float]] = {}

            def embed_scope(scope: tuple[str, str]) -> None:
                utts = sorted(paired_by_scope[scope], key=lambda u: records[u].start_ms)
                with pool.session() as session:
                    for utt in utts:
                        response = session.embed(
                            str(output_root / utterances[utt]["audio_rel"])
                        )
                        if not response.ok:
                            raise PipelineError(
                                f"embedding failed for {utt}: {response.error}"
                            )
                        embeddings[utt] = response.result

            scopes = sorted(paired_by_scope)
            if config.parallelism > 1 and len(scopes) > 1:
                with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
                    list(executor.map(embed_scope, scopes))
            else:
                for scope in scopes:
                    embed_scope(scope)

            labels: dict[str, int] = {}
            for scope in scopes:
                utts = sorted(paired_by_scope[scope], key=lambda u: records[u].start_ms)
                vecs = [np.array(embeddings[u]) for u in utts]
                for utt, label in zip(utts, pseudo_label(vecs, config.cluster_tau)):
                    labels[utt] = label
            return {"labels": labels, "embeddings": embeddings}

        material = {
            "pair": pair_payload["_key"],
            "adapter": adapter_identity,
            "cluster_tau": config.cluster_tau,
        }
        label_payload = _cached(cache, "speaker_label", material, tally, compute_labels)
        tally.input_count = 2 * len(pair_payload["pairs"])
        tally.output_count = len(label_payload["labels"])
        tally.dropped_count = tally.input_count - tally.output_count
        reports.append(tally.report("speaker_label"))
        if done("speaker_label"):
            return [], reports

        # pair-similarity filter ------------------------------------------------
        tally = _Tally()

        def compute_sim(_key: str) -> dict:
            kept = []
            dropped = []
            embeddings = label_payload["embeddings"]
            for pair in pair_payload["pairs"]:
                sim = cosine_similarity(
                    np.array(embeddings[pair["en"]]), np.array(embeddings[pair["es"]])
                )
                annotated = {**pair, "cross_similarity": sim}
                if sim < config.pair_sim_max:
                    kept.append(annotated)
                else:
                    dropped.append(annotated)
            return {"kept": kept, "dropped": dropped}

        material = {
            "labels": label_payload["_key"],
            "pair_sim_max": config.pair_sim_max,
        }
        sim_payload = _cached(cache, "pair_similarity_filter", material, tally, compute_sim)
        tally.input_count = len(pair_payload["pairs"])
        tally.output_count = len(sim_payload["kept"])
        tally.dropped_count = len(sim_payload["dropped"])
        for pair in sim_payload["dropped"]:
            for utt in (pair["en"], pair["es"]):
                info = utterances.get(utt, {})
                rejects.append(
                    {
                        **info,
                        "utterance_id": utt,
                        "dropped_stage": "pair_similarity_filter",
                        "reason": (
                            f"pair similarity {pair['cross_similarity']:.6f} >= "
                            f"{config.pair_sim_max}"
                        ),
                    }
                )
        reports.append(tally.report("pair_similarity_filter"))
        if done("pair_similarity_filter"):
            return [], reports

        # speaker-count filter ----------------------------------------------------
        tally = _Tally()

        def compute_speaker(_key: str) -> dict:
            labels = label_payload["labels"]
            remaining = list(sim_payload["kept"])
            dropped = []
            while True:
                counts: dict[tuple[str, int], int] = {}
                for pair in remaining:
                    cluster = (pair["title_id"], labels[pair["en"]])
                    counts[cluster] = counts.get(cluster, 0) + 1
                doomed = [
                    p
                    for p in remaining
                    if counts[(p["title_id"], labels[p["en"]])]
                    < config.min_segments_per_speaker
                ]
                if not doomed:
                    break
                doomed_ids = {p["pair_id"] for p in doomed}
                for pair in doomed:
                    cluster = (pair["title_id"], labels[pair["en"]])
                    dropped.append({**pair, "cluster_count": counts[cluster]})
                remaining = [p for p in remaining if p["pair_id"] not in doomed_ids]
            return {"kept": remaining, "dropped": dropped}

        material = {
            "sim": sim_payload["_key"],
            "min_segments_per_speaker": config.min_segments_per_speaker,
        }
        speaker_payload = _cached(
            cache, "speaker_count_filter", material, tally, compute_speaker
        )
        tally.input_count = len(sim_payload["kept"])
        tally.output_count = len(speaker_payload["kept"])
        tally.dropped_count = len(speaker_payload["dropped"])
        for pair in speaker_payload["dropped"]:
            labels = label_payload["labels"]
            for utt in (pair["en"], pair["es"]):
                info = utterances.get(utt, {})
                rejects.append(
                    {
                        **info,
                        "utterance_id": utt,
                        "dropped_stage": "speaker_count_filter",
                        "reason": (
                            f"speaker cluster {labels[pair['en']]} retains "
                            f"{pair['cluster_count']} pairs < {config.min_segments_per_speaker}"
                        ),
                    }
                )
        reports.append(tally.report("speaker_count_filter"))
        if done("speaker_count_filter"):
            return [], reports

        # units --------------------------------------------------------------------
        tally = _Tally()
        final_utts = sorted(
            {u for pair in speaker_payload["kept"] for u in (pair["en"], pair["es"])}
        )

        def compute_units(key: str) -> dict:
            if not final_utts:
                return {"unit_rel": {}, "centroids_rel": None, "inertia": None}
            frames_per_utt = {}
            for utt in final_utts:
                buf = read_wav(output_root / utterances[utt]["audio_rel"])
                frames_per_utt[utt] = mfcc(buf, hop_ms=config.frame_hop_ms).frames
            stacked = np.vstack([frames_per_utt[u] for u in final_utts])
            if stacked.shape[0] < config.k_units:
                raise PipelineError(
                    f"units stage needs at least k={config.k_units} frames, "
                    f"got {stacked.shape[0]}"
                )
            centroids = kmeans_fit(stacked, config.k_units, seed=config.seed)
            artifact_dir = cache.artifact_dir("units", key)
            save_centroids(artifact_dir / "centroids.txt", centroids)
            unit_rel = {}
            for utt in final_utts:
                units_seq = assign_units(frames_per_utt[utt], centroids)
                text = format_units(condense(units_seq))
                (artifact_dir / f"{utt}.units").write_text(text + "\n", encoding="utf-8")
                unit_rel[utt] = f"cache/units/{key}/{utt}.units"
            return {
                "unit_rel": unit_rel,
                "centroids_rel": f"cache/units/{key}/centroids.txt",
                "inertia": centroids.inertia,
            }

        material = {
            "speaker": speaker_payload["_key"],
            "k_units": config.k_units,
            "seed": config.seed,
            "frame_hop_ms": config.frame_hop_ms,
        }
        units_payload = _cached(cache, "units", material, tally, compute_units)
        tally.input_count = len(final_utts)
        tally.output_count = len(units_payload["unit_rel"])
        tally.dropped_count = tally.input_count - tally.output_count
        reports.append(tally.report("units"))
        if done("units"):
            return [], reports

        # manifest ----------------------------------------------------------------
        tally = _Tally()
        started = time.perf_counter()
        labels = label_payload["labels"]
        pair_of: dict[str, str] = {}
        for pair in speaker_payload["kept"]:
            pair_of[pair["en"]] = pair["pair_id"]
            pair_of[pair["es"]] = pair["pair_id"]

        # Re-map surviving cluster ids densely per (title, language), in order
        # of first appearance along the timeline.
        remap: dict[tuple[str, str, int], int] = {}
        scope_next: dict[tuple[str, str], int] = {}
        records = _segment_records(utterances)
        for utt in sorted(final_utts, key=lambda u: (records[u].title_id,
                                                     records[u].language,
                                                     records[u].start_ms)):
            rec = records[utt]
            scope = (rec.title_id, rec.language)
            key = (rec.title_id, rec.language, labels[utt])
            if key not in remap:
                remap[key] = scope_next.get(scope, 0)
                scope_next[scope] = remap[key] + 1

        rows = []
        for utt in final_utts:
            info = utterances[utt]
            flags = {"wer_kept", "dur_kept", "paired", "spk_kept"}
            if info["merged"]:
                flags.add("merged")
            rows.append(
                ManifestRow(
                    utterance_id=utt,
                    title_id=info["title_id"],
                    language=info["language"],
                    start_ms=info["start_ms"],
                    end_ms=info["end_ms"],
                    duration_s=info["duration_s"],
                    audio_path=info["audio_rel"],
                    subtitle_text=info["subtitle_text"],
                    asr_text=info["asr_text"],
                    wer=info["wer"],
                    speaker_cluster=remap[(info["title_id"], info["language"], labels[utt])],
                    pair_id=pair_of[utt],
                    unit_path=units_payload["unit_rel"].get(utt),
                    stage_flags=frozenset(flags),
                )
            )
        rows.sort(key=lambda r: (r.title_id, r.language, r.start_ms))
        write_manifest(output_root / "manifest.jsonl", rows)

        def reject_sort_key(item: dict):
            return (
                item.get("title_id", ""),
                item.get("language", ""),
                item.get("start_ms", -1),
                item["utterance_id"],
            )

        reject_lines = []
        for item in sorted(rejects, key=reject_sort_key):
            body = {
                "utterance_id": item["utterance_id"],
                "title_id": item.get("title_id"),
                "language": item.get("language"),
                "start_ms": item.get("start_ms"),
                "end_ms": item.get("end_ms"),
                "duration_s": item.get("duration_s"),
                "audio_path": item.get("audio_rel"),
                "subtitle_text": item.get("subtitle_text"),
                "asr_text": item.get("asr_text"),
                "wer": item.get("wer"),
                "dropped_stage": item["dropped_stage"],
                "reason": item["reason"],
            }
            reject_lines.append(
                json.dumps(body, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
            )
        (output_root / "rejects.jsonl").write_text(
            "".join(line + "\n" for line in reject_lines), encoding="utf-8"
        )

        tally.input_count = len(rows)
        tally.output_count = len(rows)
        tally.wall_time_s = time.perf_counter() - started
        reports.append(tally.report("manifest"))

        report_data = {
            "config_fingerprint": fingerprint,
            "stages": [r.to_json() for r in reports],
        }
        (output_root / "reports.json").write_text(
            json.dumps(report_data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        logger.info(
            "pipeline complete: %d manifest rows, %d rejects", len(rows), len(reject_lines)
        )
        return rows, reports
    finally:
        pool.close()
