"""Operations entry point: serve the API or run maintenance tasks directly.

Non-serve subcommands open the data directory in-process; they do not need a
running server.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import (
    code_set_from_json,
    project_from_json,
    validate_code_set,
    detect_wizard_conflicts,
    ValidationReport,
)
from .errors import CalError, SchemaError
from .store import DataStore


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cal", description="conversation labeling service")
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("CAL_DATA_DIR", "./data"),
        help="project data directory (env: CAL_DATA_DIR; default ./data)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8750)
    serve.add_argument(
        "--static-dir",
        default=os.environ.get("CAL_STATIC_DIR", "./frontend/dist"),
        help="built UI to serve at / (skipped when missing)",
    )

    validate = sub.add_parser("validate", help="check a config file")
    validate.add_argument("path", help="project or code set JSON file")

    imp = sub.add_parser("import", help="add conversations to a project")
    imp.add_argument("project")
    imp.add_argument("file", help="transcript JSON file")

    export = sub.add_parser("export", help="write label CSV files")
    export.add_argument("project")
    export.add_argument("--annotator", help="one annotator (default: all)")
    export.add_argument("--out", default=".", help="output directory")

    agreement = sub.add_parser("agreement", help="print inter-rater agreement")
    agreement.add_argument("project")
    agreement.add_argument("--out", default=".", help="directory for agreement.json")
    return parser


def _cmd_validate(args) -> int:
    try:
        document = json.loads(Path(args.path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ERROR $: {exc}", file=sys.stderr)
        return 1
    report = ValidationReport()
    try:
        if isinstance(document, dict) and "code_sets" in document:
            project = project_from_json(document)
            for i, code_set in enumerate(project.code_sets):
                prefix = f"$.code_sets[{i}]"
                report.extend(validate_code_set(code_set, prefix))
                report.extend(detect_wizard_conflicts(code_set, prefix))
        else:
            code_set = code_set_from_json(document)
            report.extend(validate_code_set(code_set))
            report.extend(detect_wizard_conflicts(code_set))
    except SchemaError as exc:
        report.error(exc.path, exc.message)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def _cmd_import(args, data: DataStore) -> int:
    store = data.open_project(args.project)
    count = store.import_conversations(Path(args.file).read_text("utf-8"))
    print(f"imported {count} conversations into {args.project}")
    return 0


def _cmd_export(args, data: DataStore) -> int:
    store = data.open_project(args.project)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    annotators = [args.annotator] if args.annotator else list(store.project.annotators)
    for annotator in annotators:
        main_csv, conv_csv = store.export_csv(annotator)
        suffix = "" if args.annotator else f"-{annotator}"
        main_path = out / f"{args.project}{suffix}.csv"
        main_path.write_text(main_csv, "utf-8", newline="")
        print(f"wrote {main_path}")
        if conv_csv is not None:
            conv_path = out / f"{args.project}{suffix}-conversations.csv"
            conv_path.write_text(conv_csv, "utf-8", newline="")
            print(f"wrote {conv_path}")
    return 0


def _cmd_agreement(args, data: DataStore) -> int:
    from .metrics import agreement_report

    store = data.open_project(args.project)
    report = agreement_report(store.project, store.live_assignments())
    for line in report.lines():
        print(line)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "agreement.json"
    path.write_text(json.dumps(report.to_json(), indent=2), "utf-8")
    print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    static_dir = Path(args.static_dir) if args.static_dir else None
    if static_dir is not None and not static_dir.is_dir():
        static_dir = None
    app = create_app(Path(args.data_dir), static_dir=static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "validate":
            return _cmd_validate(args)
        data = DataStore(Path(args.data_dir))
        if args.command == "import":
            return _cmd_import(args, data)
        if args.command == "export":
            return _cmd_export(args, data)
        if args.command == "agreement":
            return _cmd_agreement(args, data)
    except CalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
