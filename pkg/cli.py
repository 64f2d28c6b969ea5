#!/usr/bin/env python3
"""
Ligne de commande du pipeline TSA.

    python cli.py run --seed 42 [--config pipeline.env] [--format text,json]
    python cli.py train --seed 42 --config pipeline.env
    python cli.py evaluate --run-dir runs/run-<hash>-seed42
    python cli.py predict --model runs/.../models/decision_tree.json fiches.csv
    python cli.py merge a.csv "b.csv;aliases=b.env;age_unit=years" -o merged.csv
    python cli.py validate merged.csv
    python cli.py label merged.csv -o labeled.csv
    python cli.py synth --seed 42 --n 3043 -o synth.csv
    python cli.py coverage [--free-items 1,5,9,10]
    python cli.py serve

Codes de sortie: 0 succès, 1 usage, 2 données, 3 erreur interne.
"""

import argparse
import json
import logging
import os
import sys

from dotenv import load_dotenv

from asd_pipeline.config import REPORT_FORMATS, load_config, parse_sources
from asd_pipeline.data_model import dataset_to_csv, load_dataset_file, merge_datasets, validate
from asd_pipeline.errors import ConfigError, DataError, ModelError
from asd_pipeline.persistence import load_model
from asd_pipeline.reports import format_json, format_text
from asd_pipeline.rule_labeling import METHOD_NAMES, label_dataset, resolve_rules, rule_coverage
from asd_pipeline.runner import evaluate_run, predict_records, run_pipeline, train, unwrap
from asd_pipeline.synthetic import generate

load_dotenv()
logger = logging.getLogger("asd_pipeline.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def exit_code_for(error: BaseException) -> int:
    cause = unwrap(error)
    if isinstance(cause, ConfigError):
        return EXIT_USAGE
    if isinstance(cause, (DataError, ModelError, OSError)):
        return EXIT_DATA
    return EXIT_INTERNAL


def _formats(value):
    formats = tuple(f.strip() for f in value.split(",") if f.strip())
    unknown = sorted(set(formats) - set(REPORT_FORMATS))
    if not formats or unknown:
        raise argparse.ArgumentTypeError(f"formats valides: {', '.join(REPORT_FORMATS)}")
    return formats


def _items(value):
    try:
        items = [int(i) for i in value.split(",") if i.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("liste d'entiers attendue (ex: 1,5,9)") from None
    if any(not 1 <= i <= 10 for i in items):
        raise argparse.ArgumentTypeError("indices dans [1,10] attendus")
    return items


def _write_output(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info(f"💾 Écrit: {path}")
    else:
        sys.stdout.write(text)


def _pipeline_overrides(args):
    return {
        "SEED": args.seed,
        "SYNTH_N": getattr(args, "synth_n", None),
        "OUTPUT_DIR": getattr(args, "output_dir", None),
        "REPORT_FORMATS": ",".join(args.format) if getattr(args, "format", None) else None,
    }


def _print_report(report, formats, run_dir):
    if formats[0] == "text":
        sys.stdout.write(format_text(report))
    elif formats[0] == "json":
        sys.stdout.write(format_json(report))
    else:
        print(run_dir)


# =============================================================================
# SOUS-COMMANDES
# =============================================================================

def cmd_run(args):
    cfg = load_config(args.config, _pipeline_overrides(args))
    result = run_pipeline(cfg)
    _print_report(result.report, cfg.report_formats, result.run_dir)
    return EXIT_OK


def cmd_train(args):
    cfg = load_config(args.config, _pipeline_overrides(args))
    print(train(cfg))
    return EXIT_OK


def cmd_evaluate(args):
    report = evaluate_run(args.run_dir, args.format)
    formats = args.format or ("text",)
    _print_report(report, formats, args.run_dir)
    return EXIT_OK


def cmd_predict(args):
    model = load_model(args.model)
    with open(args.input, "rb") as handle:
        predictions = predict_records(model, handle, source_name=args.input)
    for p in predictions:
        if p.ok:
            print(f"{p.row}\t{p.code}\t{p.name}")
        else:
            print(f"{p.row if p.row is not None else '-'}\terror\t{p.error}")
    return EXIT_OK if all(p.ok for p in predictions) else EXIT_DATA


def _load_sources(entries):
    parts = []
    for source in parse_sources(",".join(entries)):
        dataset, report = load_dataset_file(source.path, source.age_unit, source.aliases)
        for error in report.row_errors:
            logger.warning(f"⚠️ {source.path} ligne {error.row}: {error.column} {error.message}")
        parts.append(dataset)
    return merge_datasets(parts)


def cmd_merge(args):
    _write_output(dataset_to_csv(_load_sources(args.sources)), args.output)
    return EXIT_OK


def cmd_validate(args):
    dataset, load_report = load_dataset_file(args.input, args.age_unit, args.aliases)
    report = validate(dataset)
    document = {"load": load_report.to_dict(), "validation": report.to_dict()}
    print(json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False))
    failed = load_report.rows_rejected or report.rows_rejected
    return EXIT_DATA if failed else EXIT_OK


def cmd_label(args):
    dataset = _load_sources([args.input])
    _write_output(dataset_to_csv(label_dataset(dataset, resolve_rules(args.rules))), args.output)
    return EXIT_OK


def cmd_synth(args):
    cfg = load_config(args.config, {"SEED": args.seed, "SYNTH_N": args.n})
    if cfg.synth is None:
        raise ConfigError("La configuration définit SOURCES: rien à générer")
    _write_output(dataset_to_csv(generate(cfg.synth)), args.output)
    return EXIT_OK


def cmd_coverage(args):
    table = rule_coverage(resolve_rules(args.rules), args.free_items)
    if args.format == "json":
        print(json.dumps(table.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
        return EXIT_OK
    width = max(len(name) for name in METHOD_NAMES)
    for code, count in table.counts.items():
        print(f"{code}  {METHOD_NAMES[code]:<{width}}  {count:>5}")
    print(f"{'':<3}{'total':<{width}}  {table.total:>5}")
    return EXIT_OK


def cmd_serve(args):
    from server import create_server

    create_server().run(host=args.host, port=args.port)
    return EXIT_OK


# =============================================================================
# PARSER
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asd-pipeline", description="Pipeline de classification TSA")
    parser.add_argument("-v", "--verbose", action="store_true", help="logs DEBUG")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pipeline_command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="fichier KEY=VALUE")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--synth-n", type=int, dest="synth_n")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--format", type=_formats, help=f"liste parmi {','.join(REPORT_FORMATS)}")
        p.set_defaults(handler=handler)
        return p

    pipeline_command("run", cmd_run, "pipeline complet")
    pipeline_command("train", cmd_train, "entraîne et persiste les modèles")

    p = sub.add_parser("evaluate", help="évalue les modèles d'un run")
    p.add_argument("--run-dir", required=True, dest="run_dir")
    p.add_argument("--format", type=_formats)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("predict", help="prédit la méthode pour chaque fiche")
    p.add_argument("--model", required=True)
    p.add_argument("input")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("merge", help="fusionne plusieurs CSV")
    p.add_argument("sources", nargs="+", help="chemin[;aliases=FICHIER][;age_unit=months|years]")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser("validate", help="valide un CSV")
    p.add_argument("input")
    p.add_argument("--age-unit", dest="age_unit", choices=("months", "years"), default="months")
    p.add_argument("--aliases")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("label", help="ajoute la colonne Preferred_Education")
    p.add_argument("input", help="chemin[;aliases=FICHIER][;age_unit=months|years]")
    p.add_argument("--rules", default="builtin")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_label)

    p = sub.add_parser("synth", help="génère un jeu synthétique")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--config")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("coverage", help="couverture des règles")
    p.add_argument("--rules", default="builtin")
    p.add_argument("--free-items", type=_items, dest="free_items")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_coverage)

    p = sub.add_parser("serve", help="démarre le serveur JSON-RPC")
    p.add_argument("--host", default=os.getenv("ASD_SERVER_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.getenv("ASD_SERVER_PORT", "8000")))
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else os.getenv("ASD_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        return args.handler(args)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_INTERNAL:
            logger.exception(f"❌ Erreur interne: {e}")
        else:
            logger.error(f"❌ {e}")
        return code


if __name__ == "__main__":
    sys.exit(main())
