"""Command line entry point: ``crgscore {score,label,crg,reward,simulate}``.

Option values resolve as command-line flag, then ``CRGSCORE_<NAME>``
environment variable, then the ``--config`` YAML file, then the built-in
default. Resolved values are echoed into the report metadata.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Sequence

import yaml

from crgscore import __version__
from crgscore import io as cio
from crgscore.crg import DegenerateDistributionError
from crgscore.evaluate import align_reports, evaluate, evaluate_counts, evaluate_labels
from crgscore.labeler import ExtractorConfig, LlmExtractor, label_corpus
from crgscore.labeler.llm import CACHE_DIR_ENV, ExtractionFailure
from crgscore.nlg import bleu, rouge_l_pair, tokenize_text
from crgscore.reward import RewardConfig, batch_reward, freeze_weights, per_sample_rewards
from crgscore.schema import AlignmentError, LabelError, SchemaError
from crgscore.simulate import RNG_ALGORITHM, SimulationSpec, simulate

logger = logging.getLogger("crgscore")

EXIT_INPUT = 2
EXIT_DEGENERATE = 3

DEFAULTS: dict[str, Any] = {
    "schema": None,
    "rules": None,
    "strict": True,
    "nlg": True,
    "conditional": False,
    "format": "table",
    "seed": 0,
    "lambda": 1.0,
    "fluency": "none",
    "llm_endpoint": None,
    "llm_model": None,
    "max_workers": 4,
}

_BOOL = {"1": True, "true": True, "on": True, "yes": True, "0": False, "false": False, "off": False, "no": False}


def _coerce(key: str, value: Any) -> Any:
    if not isinstance(value, str):
        return value
    default = DEFAULTS.get(key)
    if isinstance(default, bool):
        try:
            return _BOOL[value.strip().lower()]
        except KeyError:
            raise ValueError(f"{key}: expected a boolean, got {value!r}") from None
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def resolve_options(args: argparse.Namespace, keys: Sequence[str]) -> dict[str, Any]:
    config: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            config = yaml.safe_load(fh) or {}
    resolved = {}
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        env = os.environ.get(f"CRGSCORE_{key.upper()}")
        if flag is not None:
            value = flag
        elif env is not None:
            value = env
        elif key in config:
            value = config[key]
        else:
            value = DEFAULTS.get(key)
        resolved[key] = _coerce(key, value)
    return resolved


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _schema(opts: dict):
    return cio.load_schema(opts["schema"]) if opts["schema"] else cio.default_schema()


def _rulesets(paths: Sequence[str] | None):
    if not paths:
        return [cio.default_rules()]
    return [cio.load_rules(p) for p in paths]


def _extractor(opts: dict) -> LlmExtractor:
    config = ExtractorConfig(
        endpoint=opts["llm_endpoint"],
        model_name=opts["llm_model"] or "",
        cache_path=os.environ.get(CACHE_DIR_ENV),
    )
    return LlmExtractor(config)


def _label_inputs(args: argparse.Namespace, schema, levels):
    preds, refs = args.labels_pred or [], args.labels_ref or []
    if len(preds) != len(refs):
        raise ValueError("--labels-pred and --labels-ref must be given the same number of times")
    pairs = []
    for p, r in zip(preds, refs):
        ref = cio.load_label_matrix(r, schema)
        pred = cio.load_label_matrix(p, schema, ref.schema_level)
        pairs.append((pred, ref))
    pairs.sort(key=lambda pr: pr[1].schema_level)
    if levels:
        pairs = [pr for pr in pairs if pr[1].schema_level in set(levels)]
    return pairs


# -- subcommands ----------------------------------------------------------------


def cmd_score(args: argparse.Namespace) -> int:
    keys = ["schema", "strict", "nlg", "conditional", "format", "seed", "llm_endpoint", "llm_model", "max_workers"]
    opts = resolve_options(args, keys)
    meta = {"config": {k: opts[k] for k in keys}}
    if args.counts:
        counts = cio.load_counts(args.counts)
        report = evaluate_counts(counts, meta)
    else:
        schema = _schema(opts)
        candidates = cio.load_reports(args.candidates) if args.candidates else None
        references = cio.load_reports(args.references) if args.references else None
        label_inputs = None
        rulesets = []
        if args.labels_pred or args.labels_ref:
            label_inputs = _label_inputs(args, schema, args.level)
        elif opts["llm_endpoint"]:
            if candidates is None or references is None:
                raise ValueError("--candidates and --references are required")
            ext = _extractor(opts)
            label_inputs = []
            for k in args.level or range(1, schema.depth + 1):
                names = schema.label_names(k)
                label_inputs.append(
                    (
                        ext.label_many(candidates, names, k, opts["max_workers"]),
                        ext.label_many(references, names, k, opts["max_workers"]),
                    )
                )
        else:
            if candidates is None or references is None:
                raise ValueError("need --counts, --labels-pred/--labels-ref, or --candidates/--references")
            rulesets = _rulesets(args.rules)
        report = evaluate(
            schema,
            candidates=candidates,
            references=references,
            label_inputs=label_inputs,
            rulesets=rulesets,
            levels=args.level,
            strict=opts["strict"],
            conditional=opts["conditional"],
            nlg=opts["nlg"],
            metadata=meta,
        )
    _write(report.to_json() if opts["format"] == "structured" else report.to_table(), args.out)
    return 0


def cmd_crg(args: argparse.Namespace) -> int:
    keys = ["schema", "strict", "conditional", "format"]
    opts = resolve_options(args, keys)
    if args.counts:
        report = evaluate_counts(cio.load_counts(args.counts))
        crg = report.crg
    else:
        schema = _schema(opts)
        pairs = _label_inputs(args, schema, args.level)
        if not pairs:
            raise ValueError("need --counts or --labels-pred/--labels-ref")
        crg, _, _ = evaluate_labels(pairs, schema, opts["strict"], opts["conditional"])
    if opts["format"] == "structured":
        _write(json.dumps(crg.as_dict(), sort_keys=True, indent=2) + "\n", args.out)
    else:
        lines = [f"CRG final: {crg.final:.4f}"]
        lines += [f"  CRG-{k}: {r.score:.4f}" for k, r in enumerate(crg.per_level, start=1)]
        _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_label(args: argparse.Namespace) -> int:
    keys = ["schema", "llm_endpoint", "llm_model", "max_workers"]
    opts = resolve_options(args, keys)
    schema = _schema(opts)
    reports = cio.load_reports(args.reports)
    level = args.level[0] if args.level else 1
    names = schema.label_names(level)
    if opts["llm_endpoint"]:
        matrix = _extractor(opts).label_many(reports, names, level, opts["max_workers"])
    else:
        by_level = {rs.level: rs for rs in _rulesets(args.rules)}
        if level not in by_level:
            raise ValueError(f"no rules for level {level}")
        matrix = label_corpus(reports, by_level[level], names, level)
    _write(cio.dump_label_matrix(matrix, schema.version), args.out)
    return 0


def cmd_reward(args: argparse.Namespace) -> int:
    keys = ["schema", "strict", "lambda", "fluency"]
    opts = resolve_options(args, keys)
    schema = _schema(opts)
    pairs = _label_inputs(args, schema, args.level)
    if len(pairs) != 1:
        raise ValueError("reward scoring takes exactly one --labels-pred/--labels-ref pair")
    pred, ref = pairs[0]
    frozen_src = cio.load_label_matrix(args.weights_from, schema) if args.weights_from else ref
    config = RewardConfig(
        freeze_weights(frozen_src), opts["lambda"], opts["fluency"], frozen_src.labels
    )
    if args.mode == "batch":
        value = batch_reward(pred, ref, config, opts["strict"])
        _write(json.dumps({"batch_reward": value}) + "\n", args.out)
        return 0
    fluency = None
    if config.fluency_metric != "none":
        if not (args.candidates and args.references):
            raise ValueError("--fluency needs --candidates and --references")
        ids, cands, refs, _ = align_reports(
            cio.load_reports(args.candidates), cio.load_reports(args.references), opts["strict"]
        )
        if config.fluency_metric == "bleu4":
            fluency = {i: bleu([c], [r], 4) for i, c, r in zip(ids, cands, refs)}
        else:
            fluency = {
                i: rouge_l_pair(tokenize_text(c), tokenize_text(r)) for i, c, r in zip(ids, cands, refs)
            }
    rewards = per_sample_rewards(pred, ref, config, fluency, opts["strict"])
    lines = [json.dumps({"sample_id": sid, "reward": value}) for sid, value in rewards.items()]
    _write("\n".join(lines) + ("\n" if lines else ""), args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    opts = resolve_options(args, ["seed", "format"])
    rows = []
    for prevalence in args.prevalence or [0.193]:
        spec = SimulationSpec(
            n_samples=args.n_samples,
            n_labels=args.n_labels,
            prevalence=prevalence,
            predictor=args.predictor,
            sensitivity=args.sensitivity,
            specificity=args.specificity,
            seed=opts["seed"],
        )
        rows.append(simulate(spec))
    if opts["format"] == "structured":
        _write(json.dumps({"rng": RNG_ALGORITHM, "rows": rows}, sort_keys=True, indent=2) + "\n", args.out)
    else:
        cols = ["prevalence", "accuracy", "f1", "recall", "precision", "crg"]
        lines = [f"# predictor={args.predictor} seed={opts['seed']} rng={RNG_ALGORITHM}"]
        lines.append("".join(f"{c:>12}" for c in cols))
        for row in rows:
            lines.append("".join(f"{row[c]:>12.4f}" for c in cols))
        _write("\n".join(lines) + "\n", args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with option defaults")
    p.add_argument("--schema", help="schema file (default: shipped 18-label schema)")
    p.add_argument("--format", choices=["table", "structured"], default=None)
    p.add_argument("--out", help="write output here instead of stdout")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--strict", dest="strict", action="store_const", const=True, default=None)
    g.add_argument("--lenient", dest="strict", action="store_const", const=False)


def _labels(p: argparse.ArgumentParser) -> None:
    p.add_argument("--labels-pred", action="append", help="predicted label matrix (repeat per level)")
    p.add_argument("--labels-ref", action="append", help="reference label matrix (repeat per level)")
    p.add_argument("--level", type=int, action="append", help="restrict to this schema level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crgscore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"crgscore {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="full evaluation report")
    _common(p)
    _labels(p)
    p.add_argument("--candidates", help="generated reports (JSONL sample_id/text)")
    p.add_argument("--references", help="reference reports (JSONL sample_id/text)")
    p.add_argument("--counts", help="counts file with tp/fn/fp/tn")
    p.add_argument("--rules", action="append", help="rule file (repeat per level)")
    p.add_argument("--nlg", type=lambda s: _coerce("nlg", s), default=None, metavar="{on,off}")
    p.add_argument("--conditional", action="store_const", const=True, default=None,
                   help="score child labels only where the reference parent is positive")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--llm-endpoint", default=None)
    p.add_argument("--llm-model", default=None)
    p.add_argument("--max-workers", type=int, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("crg", help="CRG from label matrices or a counts file")
    _common(p)
    _labels(p)
    p.add_argument("--counts")
    p.add_argument("--conditional", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_crg)

    p = sub.add_parser("label", help="label a report corpus")
    _common(p)
    p.add_argument("--reports", required=True)
    p.add_argument("--rules", action="append")
    p.add_argument("--level", type=int, action="append")
    p.add_argument("--llm-endpoint", default=None)
    p.add_argument("--llm-model", default=None)
    p.add_argument("--max-workers", type=int, default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("reward", help="per-sample or batch rewards under frozen weights")
    _common(p)
    _labels(p)
    p.add_argument("--weights-from", help="label matrix the weights are frozen from (default: --labels-ref)")
    p.add_argument("--lambda", dest="lambda", type=float, default=None)
    p.add_argument("--fluency", choices=["bleu4", "rouge_l", "none"], default=None)
    p.add_argument("--candidates")
    p.add_argument("--references")
    p.add_argument("--mode", choices=["sample", "batch"], default="sample")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("simulate", help="metric behaviour on synthetic imbalanced corpora")
    p.add_argument("--config")
    p.add_argument("--format", choices=["table", "structured"], default=None)
    p.add_argument("--out")
    p.add_argument("--n-samples", type=int, default=3039)
    p.add_argument("--n-labels", type=int, default=18)
    p.add_argument("--prevalence", type=float, action="append")
    p.add_argument("--predictor", choices=["always_negative", "always_positive", "noisy"],
                   default="always_negative")
    p.add_argument("--sensitivity", type=float, default=1.0)
    p.add_argument("--specificity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DegenerateDistributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, ValueError, AlignmentError, LabelError, SchemaError, ExtractionFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
