"""Command-line driver: datagen, rank, session, eval, wilcoxon, serve.

Thin adapters over the library functions; exit code 0 on success, 1 for
usage errors, 2 for data or validation errors (message on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import datagen
from .config import EngineConfig
from .embeddings import load_vectors
from .errors import PetelkitError, SlotExhaustedError
from .evaluation import load_validation, evaluate, wilcoxon_signed_rank
from .petel import SLOT_DISPLAY, SlotKind, render_petel
from .ranker import Session, feedback, propose_top, start_session
from .schema import load_schema

USAGE_ERROR = 1
DATA_ERROR = 2

DATA_DIR_ENV = "PETELKIT_DATA_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", choices=("cosine", "euclidean"), default="cosine")
    parser.add_argument("--max-n", type=int, default=3, dest="max_n")
    parser.add_argument("--k", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="petelkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("datagen", help="emit a synthetic training corpus")
    p.add_argument("--schema", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--format", required=True, choices=("conll", "squad"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=None)

    p = sub.add_parser("rank", help="rank all four slots for one utterance")
    p.add_argument("--schema", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--utterance", required=True)
    _add_engine_flags(p)

    p = sub.add_parser("session", help="interactive accept/reject loop")
    p.add_argument("--schema", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--utterance", default=None, help="skip the opening prompt")
    _add_engine_flags(p)

    p = sub.add_parser("eval", help="replay a validation set and report metrics")
    p.add_argument("--schema", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--extractor", choices=("lexical", "remote"), default="lexical")
    p.add_argument("--endpoint", default=None)
    _add_engine_flags(p)

    p = sub.add_parser("wilcoxon", help="paired signed-rank test on two score files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    return parser


def _engine(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(
        metric=args.metric,
        max_n=args.max_n,
        k=args.k,
        extractor_mode=getattr(args, "extractor", "lexical"),
        endpoint=getattr(args, "endpoint", None),
    )


def _print_posteriors(session: Session, out) -> None:
    for kind in SlotKind:
        dist = session.petel.slot(kind)
        print(f"== {SLOT_DISPLAY[kind]} ==", file=out)
        for candidate, prob in dist.ranked()[:5]:
            phrase = session.provenance_phrase(kind, candidate.id)
            via = f'  (phrase: "{phrase}")' if phrase else ""
            print(f"  {candidate.display:<32} {prob:.6f}{via}", file=out)


def cmd_datagen(args: argparse.Namespace, out, err) -> int:
    schema = load_schema(args.schema)
    templates = datagen.load_templates(args.templates)
    corpus = datagen.fill_templates(templates, schema)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def write(part, stem: str) -> Path:
        if args.format == "conll":
            path = out_dir / f"{stem}.conll"
            path.write_text(datagen.emit_conll(part), "utf-8")
        else:
            path = out_dir / f"{stem}.squad.json"
            path.write_text(datagen.squad_to_json(datagen.emit_squad(part)), "utf-8")
        return path

    if args.split is not None:
        train, test = datagen.train_test_split(corpus, args.split, args.seed)
        for part, stem in ((train, "train"), (test, "test")):
            path = write(part, stem)
            print(f"wrote {len(part)} utterances to {path}", file=out)
    else:
        path = write(corpus, "corpus")
        print(f"wrote {len(corpus)} utterances to {path}", file=out)
    return 0


def cmd_rank(args: argparse.Namespace, out, err) -> int:
    schema = load_schema(args.schema)
    store = load_vectors(args.embeddings)
    session = start_session(schema, args.utterance, store, _engine(args))
    _print_posteriors(session, out)
    return 0


def cmd_session(args: argparse.Namespace, out, err) -> int:
    schema = load_schema(args.schema)
    store = load_vectors(args.embeddings)
    utterance = args.utterance
    if utterance is None:
        print("Describe the forecast you want:", file=out)
        utterance = input("> ")
    session = start_session(schema, utterance, store, _engine(args))
    while session.status == "in_progress":
        slot = session.current_slot()
        if slot is None:
            break
        try:
            candidate = propose_top(session, schema=schema)
        except SlotExhaustedError:
            break
        prob = session.petel.slot(slot).as_mapping()[candidate.id]
        phrase = session.provenance_phrase(slot, candidate.id)
        via = f' (from "{phrase}")' if phrase else ""
        print(
            f"{SLOT_DISPLAY[slot]}: {candidate.display}  p={prob:.6f}{via}",
            file=out,
        )
        answer = input("accept? [y/n] ").strip().lower()
        verdict = "accept" if answer in ("y", "yes") else "reject"
        feedback(session, slot, candidate.id, verdict, schema=schema)
    if session.status == "exhausted":
        print("Every candidate was rejected; no expression produced.", file=out)
        return 0
    print("", file=out)
    print(render_petel(session.petel), file=out)
    return 0


def cmd_eval(args: argparse.Namespace, out, err) -> int:
    schema = load_schema(args.schema)
    store = load_vectors(args.embeddings)
    instances = load_validation(args.validation)
    report = evaluate(
        instances,
        schema,
        store,
        _engine(args),
        embeddings_name=Path(args.embeddings).name,
    )
    print(report.as_table(), file=out)
    return 0


def _read_numbers(path: str) -> list[float]:
    values = []
    for line_no, raw in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise PetelkitError(f"{path}:{line_no}: not a number: {line!r}") from exc
    if not values:
        raise PetelkitError(f"{path}: no numbers found")
    return values


def cmd_wilcoxon(args: argparse.Namespace, out, err) -> int:
    result = wilcoxon_signed_rank(_read_numbers(args.a), _read_numbers(args.b))
    print(f"W={result.w:.6f}", file=out)
    print(f"n_effective={result.n_effective}", file=out)
    print(f"p_two_sided={result.p_two_sided:.6g}", file=out)
    return 0


def cmd_serve(args: argparse.Namespace, out, err) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    document = json.loads(Path(args.config).read_text("utf-8"))
    config = ServiceConfig.from_document(document)
    if not config.embeddings_path:
        raise PetelkitError("service config needs an 'embeddings_path'")
    if os.environ.get(DATA_DIR_ENV) and "data_dir" not in document:
        config.data_dir = os.environ[DATA_DIR_ENV]
    app = create_app(config)
    print(f"serving on http://{config.host}:{config.port}", file=out)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


COMMANDS = {
    "datagen": cmd_datagen,
    "rank": cmd_rank,
    "session": cmd_session,
    "eval": cmd_eval,
    "wilcoxon": cmd_wilcoxon,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except (PetelkitError, OSError, json.JSONDecodeError) as exc:
        print(f"petelkit {args.command}: {exc}", file=err)
        return DATA_ERROR
    except EOFError:
        print(f"petelkit {args.command}: input stream closed", file=err)
        return DATA_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
