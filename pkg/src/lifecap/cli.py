"""Command-line entry point: ``lifecap <subcommand> ...``.

Exit codes: 0 success, 1 internal error, 2 missing input file, 64 bad usage
or configuration, 65 bad input data, 70 non-deterministic output under
``--seed-free``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from lifecap import formats
from lifecap.alignment import AlignmentModel
from lifecap.decoder import DecoderConfig, ToyPredictor
from lifecap.errors import InvalidConfigError, InvalidInputError, LifecapError, ManifestError, UndefinedScoreError
from lifecap.joint import EnergyInstance, group_segments, cost_matrix_text, read_cost_matrix
from lifecap.metrics import EvalPair, report_from_scores, summarize
from lifecap.metrics.meteor import load_synonyms
from lifecap.pipeline import (
    PipelineConfig,
    build_unary,
    candidates_jsonl,
    diary_json,
    diary_text,
    generate_candidates,
    pool,
    report_files,
    retrieval_files,
    run_pipeline,
    smooth,
    top_captions,
)
from lifecap.retrieval import KeywordConfig, evaluate_retrieval

log = logging.getLogger("lifecap")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_NOINPUT = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NONDETERMINISTIC = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def _existing(path):
    if path is not None and not Path(path).is_file():
        raise FileNotFoundError(path)
    return path


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _pos_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _decoder_config(args) -> DecoderConfig:
    return DecoderConfig(args.beam_size, args.rounds, args.diversity_penalty, args.max_len)


def _keywords(args) -> KeywordConfig:
    if args.keywords:
        return KeywordConfig.load(_existing(args.keywords))
    return KeywordConfig()


def _attach_regions(target, manifest_path):
    """Copy regions from a manifest onto a candidates-only stream."""
    source = {r.image_id: r for r in formats.load_manifest(_existing(manifest_path))}
    for rec in target:
        if rec.image_id in source:
            rec.regions = source[rec.image_id].regions


# each handler returns {filename: content}; main() writes them atomically


def cmd_decode(args):
    manifest = formats.load_manifest(_existing(args.manifest))
    predictor = ToyPredictor.load(_existing(args.predictor))
    config = PipelineConfig(decoder=_decoder_config(args), workers=args.workers)
    cands = generate_candidates(manifest, config, predictor)
    return {"candidates.jsonl": candidates_jsonl(manifest, cands)}


def _instance_from_candidates(args):
    stream = formats.load_manifest(_existing(args.candidates))
    model = None
    if args.manifest:
        _attach_regions(stream, args.manifest)
    if args.word_vectors:
        model = AlignmentModel.load(_existing(args.word_vectors))
    cands = {r.image_id: r.candidates or [] for r in stream}
    pooled = pool(stream, cands)
    if not len(pooled):
        raise InvalidInputError(f"{args.candidates}: no nonempty candidate sentences")
    unary = build_unary(stream, pooled, model)
    return stream, EnergyInstance(
        unary,
        images=[r.image_id for r in stream],
        sentences=[s.words for s in pooled],
        timestamps=[r.timestamp for r in stream],
    )


def cmd_score(args):
    _, instance = _instance_from_candidates(args)
    table, sentences = cost_matrix_text(instance)
    return {"costs.csv": table, "sentences.txt": sentences}


def cmd_smooth(args):
    if bool(args.candidates) == bool(args.costs):
        raise UsageError("give exactly one of --candidates or --costs")
    if args.costs:
        instance = read_cost_matrix(_existing(args.costs), _existing(args.sentences))
    else:
        _, instance = _instance_from_candidates(args)
    labeling, total = smooth(instance, args.beta, args.window)
    segments = group_segments(instance, labeling)
    return {
        "labeling.json": formats.dumps(
            {"beta": args.beta, "energy": total, "labels": labeling, "num_candidates": instance.num_candidates}
        ) + "\n",
        "selection.jsonl": "".join(
            formats.dumps({"image_id": img, "label": lab, "text": " ".join(instance.sentences[lab])}) + "\n"
            for img, lab in zip(instance.images, labeling)
        ),
        "diary.txt": diary_text(segments),
        "diary.json": diary_json(segments),
    }


def cmd_diary(args):
    manifest = formats.load_manifest(_existing(args.manifest))
    config = PipelineConfig(
        decoder=_decoder_config(args),
        beta=args.beta,
        keywords=_keywords(args),
        predictor_path=_existing(args.predictor),
        word_vectors_path=_existing(args.word_vectors),
        window=args.window,
        workers=args.workers,
    )
    references = formats.load_references(_existing(args.references)) if args.references else None
    truth = formats.load_labels(_existing(args.labels)) if args.labels else None
    result = run_pipeline(manifest, config, references=references, truth=truth)
    return result.files


def cmd_evaluate(args):
    if args.scores:
        with open(_existing(args.scores), encoding="utf-8") as fh:
            data = json.load(fh)
        rows = data if isinstance(data, dict) else {"": data}
        files = {}
        lines = []
        for label, scores in rows.items():
            report = report_from_scores(scores)
            lines.append(report.table_row(label))
            files.setdefault("eval.json", {})[label] = report.to_dict()
        return {"eval.json": formats.dumps(files["eval.json"]) + "\n", "eval.txt": "\n".join(lines) + "\n"}
    if not (args.candidates and args.references):
        raise UsageError("give --candidates and --references, or --scores")
    selected = formats.selected_sentences(_existing(args.candidates))
    references = formats.load_references(_existing(args.references))
    missing = sorted(img for img in selected if not references.get(img))
    if not selected:
        raise InvalidInputError(f"{args.candidates}: no sentences to evaluate")
    if missing:
        raise InvalidInputError("images without reference sentences: " + ", ".join(missing))
    synonyms = load_synonyms(_existing(args.synonyms)) if args.synonyms else None
    report = summarize(
        [EvalPair.make(selected[img], references[img]) for img in sorted(selected)],
        synonyms=synonyms,
        sentence_level_bleu=args.sentence_bleu,
    )
    return report_files(report, args.label)


def cmd_retrieve(args):
    keywords = _keywords(args)
    stream = formats.load_manifest(_existing(args.candidates))
    truth = formats.load_labels(_existing(args.labels)) if args.labels else None
    captions = {r.image_id: top_captions(r.candidates or [], keywords.captions_per_image) for r in stream}
    return retrieval_files(evaluate_retrieval(captions, keywords, truth))


def _add_decoder_flags(p):
    p.add_argument("--beam-size", type=_pos_int, default=5, help="beam width b (default 5)")
    p.add_argument("--rounds", type=_pos_int, default=3, help="diverse beam-search rounds (default 3)")
    p.add_argument("--diversity-penalty", type=_nonneg_float, default=2.0, help="activation penalty per earlier use (default 2.0)")
    p.add_argument("--max-len", type=_pos_int, default=20, help="maximum caption length in tokens (default 20)")


def _add_smoothing_flags(p):
    p.add_argument("--beta", type=_nonneg_float, default=1.0, help="temporal smoothing weight (default 1.0)")
    p.add_argument("--window", type=_pos_int, default=None, help="solve independently over windows of this many images")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag defaults (keys are flag names with underscores)")
    common.add_argument("--output-dir", "-o", default=".", help="directory for output files (default: cwd)")
    common.add_argument("--seed-free", action="store_true", help="run twice and fail (exit 70) unless outputs are identical")
    common.add_argument("--workers", type=_pos_int, default=1, help="threads for per-image work")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="lifecap", description="Joint captioning of lifelogging photo streams.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decode", parents=[common], help="generate diverse candidate captions per image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictor", required=True, help="toy predictor JSON file")
    _add_decoder_flags(p)
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("score", parents=[common], help="export the alignment cost matrix for a candidates file")
    p.add_argument("--candidates", required=True)
    p.add_argument("--manifest", help="manifest supplying region vectors")
    p.add_argument("--word-vectors")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("smooth", parents=[common], help="select one sentence per image by exact chain inference")
    p.add_argument("--candidates", help="candidates JSON-lines file (e.g. from 'decode')")
    p.add_argument("--costs", help="cost-matrix CSV (rows images, columns candidates)")
    p.add_argument("--sentences", help="sentence sidecar for --costs, one per line")
    p.add_argument("--manifest", help="manifest supplying region vectors for alignment scoring")
    p.add_argument("--word-vectors")
    _add_smoothing_flags(p)
    p.set_defaults(handler=cmd_smooth)

    p = sub.add_parser("diary", parents=[common], help="run the whole pipeline on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictor")
    p.add_argument("--word-vectors")
    p.add_argument("--references", help="reference sentences JSON-lines file")
    p.add_argument("--labels", help="ground-truth sensitivity labels (JSON or CSV)")
    p.add_argument("--keywords", help="keyword config JSON")
    _add_decoder_flags(p)
    _add_smoothing_flags(p)
    p.set_defaults(handler=cmd_diary)

    p = sub.add_parser("evaluate", parents=[common], help="BLEU-1..4, CIDEr, METEOR, ROUGE-L and mean")
    p.add_argument("--candidates", help="selection or candidates JSON-lines file")
    p.add_argument("--references")
    p.add_argument("--scores", help="JSON list of seven scores, or object of named rows, to aggregate")
    p.add_argument("--synonyms", help="synonym table for METEOR")
    p.add_argument("--sentence-bleu", action="store_true", help="average sentence-level BLEU instead of corpus BLEU")
    p.add_argument("--label", default="", help="row label in eval.txt")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("retrieve", parents=[common], help="keyword-based sensitive image detection")
    p.add_argument("--candidates", required=True)
    p.add_argument("--keywords", help="keyword config JSON")
    p.add_argument("--labels", help="ground-truth sensitivity labels (JSON or CSV)")
    p.set_defaults(handler=cmd_retrieve)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(_existing(args.config), encoding="utf-8") as fh:
                defaults = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(defaults, dict):
            raise InvalidConfigError(f"{args.config}: expected a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(defaults) - known)
        if unknown:
            raise InvalidConfigError(f"{args.config}: unknown keys {unknown}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = _parse(parser, argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        files = args.handler(args)
        if args.seed_free and args.handler(args) != files:
            print("error: outputs differ between two identical runs", file=sys.stderr)
            return EXIT_NONDETERMINISTIC
        formats.write_atomically(args.output_dir, files)
        for name in sorted(files):
            log.info("wrote %s", Path(args.output_dir) / name)
        return EXIT_OK
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (UsageError, InvalidConfigError) as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ManifestError, InvalidInputError, UndefinedScoreError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except LifecapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
