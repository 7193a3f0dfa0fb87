"""Offline walkthrough of the whole workbench, no network needed.

Ingests two toy transcripts, masks and approves them, runs two scripted
mock "models" plus a human reference coder, then prints the agreement
matrices and per-code table for the resulting three-member run-set.

    python3 scripts/demo_pipeline.py [--db demo.db] [--csv-dir out/]
"""

import argparse
import json
import sys
from pathlib import Path

from sandpiper.config import AppConfig
from sandpiper.service import Service

TRANSCRIPTS = {
    "proof session": (
        "alice: My name is Devon Park and I have a question about the proof\n"
        "bob: Which step is unclear\n"
        "alice: The induction case mostly\n"
        "bob: Start from the base case and compare\n"
    ),
    "homework session": (
        "carol: Mina Okafor suggested I ask about the homework\n"
        "dave: Sure, what part exactly\n"
        "carol: Problem three I think\n"
        "dave: That one needs the chain rule\n"
    ),
}
ROSTER = ("Devon Park", "Mina Okafor")

SCHEMA = {
    "name": "codes",
    "fields": [
        {"name": "code", "type": "enum",
         "values": ["question", "explanation", "other"]},
    ],
}

# labels per item, items ordered session by session
REFERENCE = ["question", "question", "explanation", "explanation",
             "other", "other", "question", "explanation"]
SCRIPTS = {
    "careful": ["question", "explanation", "explanation", "explanation",
                "other", "question", "question", "explanation"],
    "hasty": ["question", "question", "explanation", "other",
              "other", "other", "question", "question"],
}


def print_matrix(title, members, rows):
    print(f"\n{title}")
    width = max(len(m) for m in members) + 2
    print(" " * width + "  ".join(f"{m:>{width}}" for m in members))
    for member, row in zip(members, rows):
        cells = "  ".join(
            f"{'-':>{width}}" if v is None else f"{v:>{width}.3f}" for v in row)
        print(f"{member:>{width}}{cells}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--db", default=":memory:", help="store path (default in-memory)")
    ap.add_argument("--csv-dir", default=None, help="also write report CSVs here")
    args = ap.parse_args(argv)

    service = Service(AppConfig(db_path=args.db))

    session_ids = []
    for title, text in TRANSCRIPTS.items():
        doc = service.ingest(text.encode("utf-8"), "plaintext", title)
        session_ids.append(doc["id"])
        print(f"ingested {doc['id']} ({title!r}, {len(doc['utterances'])} utterances)")

    for sid in session_ids:
        masked = service.mask(sid, roster=ROSTER)
        report = service.deid_report(sid)
        service.deid_verify(sid, True, notes="demo approval")
        print(f"masked {sid}: {masked['masked_spans']} spans, report {report['status']}")

    prompt = service.create_prompt("codes", "Code each utterance.", SCHEMA)
    print(f"prompt {prompt['id']} v1 created")

    members = []
    for name, labels in SCRIPTS.items():
        script = [json.dumps({"code": label}) for label in labels]
        run = service.create_run(prompt["id"], 1, "mock", session_ids,
                                 mock_script=script)
        final = service.execute_run_sync(run["id"])
        counts = final["counts"]
        print(f"run {run['id']} ({name}): {final['state']}, "
              f"{counts['succeeded']}/{counts['total_items']} items")
        members.append(f"run:{run['id']}")

    for pos, label in enumerate(REFERENCE):
        sid = session_ids[0] if pos < 4 else session_ids[1]
        service.add_human_annotation(sid, pos % 4, "ref", {"code": label},
                                     prompt["id"], 1)
    members.append("human:ref")
    print("human reference labels added (coder 'ref')")

    runset = service.create_runset("demo benchmark", members, "code",
                                   reference="human:ref")
    report = service.evaluate(runset["id"])

    print_matrix("observed agreement", report["members"], report["agreement"])
    print_matrix("cohen kappa", report["members"], report["kappa"])

    print("\nper-code precision/recall vs human:ref")
    for member, rows in report["per_code"].items():
        for row in rows:
            print(f"  {member}  {row['code']:<12} "
                  f"precision={row['precision']:.3f} recall={row['recall']:.3f} "
                  f"(support {row['support']})")

    if args.csv_dir:
        out_dir = Path(args.csv_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(service.evaluate_csv(runset["id"]).items()):
            (out_dir / name).write_text(text, encoding="utf-8")
            print(f"wrote {out_dir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
