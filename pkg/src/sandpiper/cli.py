"""Command-line interface.

Exit codes: 0 success, 1 domain error (printed to stderr), 2 usage error
(argparse). Read commands accept --json for machine consumption.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import SandpiperError
from .ingest import export_session_json, session_from_doc
from .model import RUN_FAILED, RunParams
from .service import Service


def _print_json(value) -> None:
    print(json.dumps(value, indent=2, ensure_ascii=False, sort_keys=True))


def _read_lines_file(path: str) -> tuple[str, ...]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)


def _fmt_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _print_matrix(title: str, members: list[str], matrix: list[list]) -> None:
    print(f"{title}:")
    width = max(len(m) for m in members) + 2
    header = " " * width + "".join(m.ljust(width) for m in members)
    print(header)
    for name, row in zip(members, matrix):
        print(name.ljust(width) + "".join(_fmt_cell(v).ljust(width) for v in row))
    print()


# -- command handlers ---------------------------------------------------


def cmd_ingest(service: Service, args) -> int:
    for path in args.files:
        data = Path(path).read_bytes()
        title = args.title or Path(path).stem
        doc = service.ingest(data, args.format, title)
        if args.json:
            _print_json(doc)
        else:
            report = doc.get("ingest_report", {})
            skipped = len(report.get("lines_skipped", []))
            warnings = report.get("warnings", [])
            print(f"ingested {doc['id']} ({len(doc['utterances'])} utterances, "
                  f"{skipped} lines skipped)")
            for location, message in warnings:
                print(f"  warning: {location}: {message}", file=sys.stderr)
    return 0


def cmd_sessions(service: Service, args) -> int:
    docs = service.list_sessions()
    if args.json:
        _print_json(docs)
        return 0
    for doc in docs:
        print(f"{doc['id']}  {doc['deid_status']:<9} {len(doc['utterances']):>4} utt  {doc['title']}")
    return 0


def cmd_export(service: Service, args) -> int:
    session = session_from_doc(service.get_session(args.session_id))
    data = export_session_json(session)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def cmd_mask(service: Service, args) -> int:
    roster = _read_lines_file(args.roster) if args.roster else ()
    institutions = _read_lines_file(args.institutions) if args.institutions else ()
    doc = service.mask(args.session_id, roster, institutions)
    if args.json:
        _print_json(doc)
    else:
        print(f"masked {doc['id']}: {doc['masked_spans']} spans replaced")
    return 0


def cmd_deid_report(service: Service, args) -> int:
    report = service.deid_report(args.session_id)
    if args.json:
        _print_json(report)
        return 0
    print(f"session {report['session_id']}: {report['status']} "
          f"(deid_status={report['deid_status']})")
    for category, count in sorted(report["counts_by_category"].items()):
        print(f"  {category}: {count} masked")
    if report["residual_hits"]:
        print(f"  residual pattern hits: {len(report['residual_hits'])}")
        for hit in report["residual_hits"]:
            print(f"    utterance {hit['utterance_index']} "
                  f"[{hit['char_start']}:{hit['char_end']}] {hit['category']}")
    if report["leaked_originals"]:
        print(f"  leaked originals: {len(report['leaked_originals'])}")
        for hit in report["leaked_originals"]:
            print(f"    utterance {hit['utterance_index']} "
                  f"[{hit['char_start']}:{hit['char_end']}] {hit['category']}")
    return 0


def cmd_verify(service: Service, args) -> int:
    doc = service.deid_verify(args.session_id, not args.reject, args.notes)
    print(f"session {doc['id']} is now {doc['deid_status']}")
    return 0


def cmd_prompt_create(service: Service, args) -> int:
    instructions = Path(args.instructions).read_text(encoding="utf-8")
    schema_doc = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    doc = service.create_prompt(args.name, instructions, schema_doc)
    if args.json:
        _print_json(doc)
    else:
        print(f"created prompt {doc['id']} version 1")
    return 0


def cmd_prompt_version(service: Service, args) -> int:
    instructions = Path(args.instructions).read_text(encoding="utf-8")
    schema_doc = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    doc = service.add_prompt_version(args.prompt_id, instructions, schema_doc)
    if args.json:
        _print_json(doc)
    else:
        print(f"prompt {doc['id']} now at version {doc['versions'][-1]['version']}")
    return 0


def cmd_prompts(service: Service, args) -> int:
    docs = service.list_prompts()
    if args.json:
        _print_json(docs)
        return 0
    for doc in docs:
        versions = ", ".join(str(v["version"]) for v in doc["versions"])
        print(f"{doc['id']}  {doc['name']} (versions: {versions})")
    return 0


def cmd_run(service: Service, args) -> int:
    params = RunParams(
        temperature=args.temperature,
        max_retries=args.max_retries,
        context_window=args.context_window,
        concurrency=args.concurrency,
    )
    mock_script = None
    if args.mock_script:
        mock_script = json.loads(Path(args.mock_script).read_text(encoding="utf-8"))
        if not isinstance(mock_script, list):
            print("error: mock script file must hold a JSON array", file=sys.stderr)
            return 1
    doc = service.create_run(
        prompt_id=args.prompt,
        prompt_version=args.prompt_version,
        model_id=args.model,
        session_ids=args.sessions.split(","),
        params=params,
        granularity=args.granularity,
        mock_script=mock_script,
    )
    # with --json, stdout must stay parseable, so narration moves to stderr
    chatter = sys.stderr if args.json else sys.stdout
    print(f"run {doc['id']} created; executing...", file=chatter)

    def progress(item: dict) -> None:
        where = (f"{item['session_id']}[{item['utterance_index']}]"
                 if item["utterance_index"] is not None else item["session_id"])
        print(f"  {item['status']:<14} {where} (attempts={item['attempts']})",
              file=chatter)

    final = service.execute_run_sync(doc["id"], on_progress=progress)
    counts = final["counts"]
    print(f"run {final['id']} {final['state']}: "
          f"{counts['succeeded']}/{counts['total_items']} ok, "
          f"{counts['failed_items']} failed", file=chatter)
    if args.json:
        _print_json(final)
    return 1 if final["state"] == RUN_FAILED else 0


def cmd_runs(service: Service, args) -> int:
    docs = service.list_runs()
    if args.json:
        _print_json(docs)
        return 0
    for doc in docs:
        counts = doc["counts"]
        print(f"{doc['id']}  {doc['state']:<22} {counts['succeeded']}/{counts['total_items']} ok  "
              f"model={doc['model_id']}")
    return 0


def cmd_annotate(service: Service, args) -> int:
    document = json.loads(args.document) if args.document else \
        json.loads(Path(args.document_file).read_text(encoding="utf-8"))
    doc = service.add_human_annotation(
        session_id=args.session_id,
        utterance_index=args.index,
        coder_id=args.coder,
        document=document,
        prompt_id=args.prompt,
        prompt_version=args.prompt_version,
    )
    if args.json:
        _print_json(doc)
    else:
        print(f"stored annotation {doc['id']} ({doc['source']})")
    return 0


def cmd_runset_create(service: Service, args) -> int:
    doc = service.create_runset(
        name=args.name,
        members=args.members.split(","),
        target_field=args.target_field,
        reference=args.reference,
    )
    if args.json:
        _print_json(doc)
    else:
        print(f"created run-set {doc['id']} with {len(doc['members'])} members")
    return 0


def cmd_eval(service: Service, args) -> int:
    report = service.evaluate(args.runset)
    if args.csv:
        out_dir = Path(args.csv)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = service.evaluate_csv(args.runset)
        for name, text in sorted(files.items()):
            (out_dir / name).write_text(text, encoding="utf-8")
            print(f"wrote {out_dir / name}")
    if args.json:
        _print_json(report)
        return 0
    members = report["members"]
    print(f"run-set {report['runset_id']} ({report['name']}), "
          f"target field {report['target_field']!r}\n")
    _print_matrix("observed agreement", members, report["agreement"])
    _print_matrix("kappa", members, report["kappa"])
    _print_matrix("aligned items", members, report["coverage"])
    if "per_code" in report:
        print(f"per-code scores against reference {report['reference']}:")
        for member in members:
            if member == report["reference"]:
                continue
            print(f"  {member}:")
            for row in report["per_code"][member]:
                print(f"    {row['code']:<20} precision={row['precision']:.3f} "
                      f"recall={row['recall']:.3f} support={row['support']}")
    return 0


def cmd_serve(service: Service, args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port or service.config.port,
                log_level="info")
    return 0


def cmd_dump(service: Service, args) -> int:
    count = service.dump(args.file)
    print(f"dumped {count} documents to {args.file}")
    return 0


def cmd_load(service: Service, args) -> int:
    count = service.load(args.file)
    print(f"loaded {count} documents from {args.file}")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sandpiper",
        description="Workbench for schema-constrained annotation of "
                    "conversational transcripts.",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--db", help="path to the database file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help: str, json_flag: bool = True):
        p = sub.add_parser(name, help=help)
        p.set_defaults(handler=handler)
        if json_flag:
            p.add_argument("--json", action="store_true", help="print raw JSON")
        return p

    p = add("ingest", cmd_ingest, "parse transcript files into sessions")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", required=True,
                   choices=["plaintext", "csv", "session-json"])
    p.add_argument("--title", help="session title (defaults to the file name)")

    add("sessions", cmd_sessions, "list sessions")

    p = add("export", cmd_export, "write one session in canonical JSON")
    p.add_argument("session_id")
    p.add_argument("--out", help="output path (defaults to stdout)")

    p = add("mask", cmd_mask, "de-identify a session in place")
    p.add_argument("session_id")
    p.add_argument("--roster", help="file with one known participant name per line")
    p.add_argument("--institutions", help="file with one organization name per line")

    p = add("deid-report", cmd_deid_report, "verification report for a masked session")
    p.add_argument("session_id")

    p = add("deid-verify", cmd_verify,
            "approve a masked session, or reject it to restore the original",
            json_flag=False)
    p.add_argument("session_id")
    p.add_argument("--reject", action="store_true",
                   help="undo the mask instead of approving it")
    p.add_argument("--notes", default="")

    p = add("prompt-create", cmd_prompt_create, "create a prompt with version 1")
    p.add_argument("--name", required=True)
    p.add_argument("--instructions", required=True, help="text file with the instructions")
    p.add_argument("--schema", required=True, help="JSON file with the coding schema")

    p = add("prompt-version", cmd_prompt_version, "add a new version to a prompt")
    p.add_argument("prompt_id")
    p.add_argument("--instructions", required=True)
    p.add_argument("--schema", required=True)

    add("prompts", cmd_prompts, "list prompts")

    p = add("run", cmd_run, "create and execute an annotation run")
    p.add_argument("--prompt", required=True, help="prompt id")
    p.add_argument("--prompt-version", required=True, type=int)
    p.add_argument("--model", required=True)
    p.add_argument("--sessions", required=True, help="comma-separated session ids")
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--context-window", type=int, default=10)
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--granularity", choices=["utterance", "session"],
                   default="utterance")
    p.add_argument("--mock-script", help="JSON file with scripted replies (offline)")

    add("runs", cmd_runs, "list runs")

    p = add("annotate", cmd_annotate, "store a human label")
    p.add_argument("session_id")
    p.add_argument("--index", required=True, type=int, help="utterance index")
    p.add_argument("--coder", required=True, help="human coder id")
    p.add_argument("--prompt", required=True)
    p.add_argument("--prompt-version", required=True, type=int)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--document", help="label document as inline JSON")
    group.add_argument("--document-file", help="label document from a JSON file")

    p = add("runset-create", cmd_runset_create, "group label sources for comparison")
    p.add_argument("--name", required=True)
    p.add_argument("--members", required=True,
                   help="comma-separated run:<id> / human:<coder> keys")
    p.add_argument("--target-field", required=True)
    p.add_argument("--reference", help="member to treat as ground truth")

    p = add("eval", cmd_eval, "reliability report for a run-set")
    p.add_argument("--runset", required=True)
    p.add_argument("--csv", help="directory to write CSV exports into")

    p = add("serve", cmd_serve, "start the REST API", json_flag=False)
    p.add_argument("--port", type=int, help="defaults to the configured port")
    p.add_argument("--host", default="127.0.0.1")

    p = add("dump", cmd_dump, "back up every collection to a JSONL file", json_flag=False)
    p.add_argument("file")

    p = add("load", cmd_load, "restore collections from a dump file", json_flag=False)
    p.add_argument("file")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides={"db_path": args.db})
        service = Service(config)
        return args.handler(service, args)
    except SandpiperError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        if exc.details:
            print(json.dumps(exc.details, indent=2, sort_keys=True), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
