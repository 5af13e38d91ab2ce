"""Synthetic lifelog streams with planted activities.

Each activity owns a centroid in predictor-feature space, a direction in
word/region space and a handful of sentences. Images are drawn around their
activity's centroid and direction, so both the decoder and the alignment
score can recover the activity, while per-image noise makes independent
caption choices flicker within an activity.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from lifecap.alignment import AlignmentModel, RegionSet
from lifecap.decoder import START, STOP, ToyPredictor, Vocabulary
from lifecap.formats import ImageRecord, StreamManifest, write_manifest

ACTIVITIES = (
    (
        "eating",
        [
            ("i am eating lunch", 3.0),
            ("i am eating a sandwich", 2.6),
            ("eating food at a table", 2.2),
            ("a plate of food on a table", 1.8),
        ],
        ["eating", "lunch", "sandwich", "food", "plate", "table"],
    ),
    (
        "working",
        [
            ("i am working on a laptop", 3.0),
            ("i am typing on a computer", 2.6),
            ("a desk with a laptop", 2.2),
            ("working at my desk", 1.8),
        ],
        ["working", "laptop", "typing", "computer", "desk"],
    ),
    (
        "walking",
        [
            ("i am walking outside", 3.0),
            ("walking in the park", 2.6),
            ("a street with trees", 2.2),
            ("i am walking on the street", 1.8),
        ],
        ["walking", "outside", "park", "street", "trees"],
    ),
)
TRUTH = {"eating": "NotSen", "working": "Display", "walking": "NotSen"}
BACKGROUND = -4.0


def predictor_from_sentences(clusters, centroids, background=BACKGROUND) -> ToyPredictor:
    """Bigram predictor whose clusters favour the given ``(sentence, weight)`` lists.

    Every bigram of a listed sentence (including START and STOP) gets the
    sentence's weight; all other transitions get ``background``.
    """
    words = sorted({w for sents in clusters for s, _ in sents for w in s.split()})
    vocab = Vocabulary([START, STOP, *words])
    bigrams = {}
    for c, sents in enumerate(clusters):
        rows = {}
        for sentence, weight in sents:
            toks = [START, *sentence.split(), STOP]
            for prev, nxt in zip(toks, toks[1:]):
                row = rows.setdefault(prev, np.full(len(vocab), background))
                row[vocab.index[nxt]] = max(row[vocab.index[nxt]], weight)
        bigrams[c] = {p: r.tolist() for p, r in rows.items()}
    return ToyPredictor(vocab, centroids, bigrams)


@dataclass
class PlantedStream:
    manifest: StreamManifest
    predictor: ToyPredictor
    alignment: AlignmentModel
    boundaries: list[tuple[int, int]]
    truth: dict[str, str]
    activity_of: dict[str, str]


def planted_stream(
    sizes=(17, 16, 17),
    seed=0,
    region_noise=0.25,
    feature_noise=0.1,
    regions_per_image=3,
    start="2016-01-20T08:00:00",
    interval_s=30,
) -> PlantedStream:
    """Stream of ``sum(sizes)`` images visiting the activities in order."""
    rng = np.random.default_rng(seed)
    n_act = len(ACTIVITIES)
    if len(sizes) > n_act:
        raise ValueError(f"at most {n_act} planted activities are available")
    dim = 2 * n_act
    centroids = 5.0 * np.eye(n_act)
    predictor = predictor_from_sentences([a[1] for a in ACTIVITIES], centroids)

    # content words point along their activity axis, each tilted a little
    # into the spare dimensions so that noise decides between them
    vectors = {}
    for k, (_, _, content) in enumerate(ACTIVITIES):
        for j, w in enumerate(content):
            v = np.zeros(dim)
            v[k] = 1.0
            v[n_act + j % n_act] = 0.3 + 0.05 * j
            vectors[w] = v
    for w in predictor.vocab.tokens:
        if w not in vectors and w not in (START, STOP):
            vectors[w] = np.full(dim, 0.05)
    alignment = AlignmentModel(vectors)

    t0 = datetime.fromisoformat(start)
    records, boundaries, truth, activity_of = [], [], {}, {}
    i = 0
    for k, size in enumerate(sizes):
        name = ACTIVITIES[k][0]
        boundaries.append((i, i + size - 1))
        for _ in range(size):
            image_id = f"img{i:04d}"
            axis = np.zeros(dim)
            axis[k] = 1.0
            regions = axis + region_noise * rng.standard_normal((regions_per_image, dim))
            feature = centroids[k] + feature_noise * rng.standard_normal(n_act)
            ts = (t0 + timedelta(seconds=interval_s * i)).isoformat()
            records.append(ImageRecord(image_id, ts, RegionSet(regions, image_id), feature))
            truth[image_id] = TRUTH[name]
            activity_of[image_id] = name
            i += 1
    manifest = StreamManifest(records, stream_id=f"planted-{seed}")
    return PlantedStream(manifest, predictor, alignment, boundaries, truth, activity_of)


def write_demo(outdir, seed=0, sizes=(17, 16, 17)) -> PlantedStream:
    """Write manifest, predictor, word vectors and labels for a planted stream."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stream = planted_stream(sizes=sizes, seed=seed)
    write_manifest(stream.manifest, outdir / "manifest.jsonl")
    stream.predictor.save(outdir / "predictor.json")
    stream.alignment.save(outdir / "vectors.txt")
    (outdir / "labels.json").write_text(json.dumps(stream.truth, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return stream


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="Write a synthetic planted-activity stream for demos.")
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[17, 16, 17], help="images per activity (at most 3)")
    a = ap.parse_args()
    write_demo(a.outdir, a.seed, tuple(a.sizes))
