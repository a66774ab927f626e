"""Operator command line.

Every subcommand prints machine-parsable output: one JSON object per
line on stdout, diagnostics as JSON on stderr. Exit codes: 0 success,
1 operational error, 2 usage error.

Management commands (user, import, export, sync) open the data
directory directly, so run them while the server is stopped; the
journal files have one writer at a time by design.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import csv_codec
from .accounts import SYSTEM, Role
from .config import NodeConfig, dump_config, load_config
from .errors import TermNodeError, TransportError
from .federation import HttpTransport, SyncWorker
from .logs import read_logs
from .model import Severity, new_id
from .node import Runtime
from .tbx import parse_tbx
from .validation import validate_entry


def _out(doc: dict) -> None:
    print(json.dumps(doc, ensure_ascii=False, sort_keys=True))


def _err(message: str) -> None:
    print(json.dumps({"error": message}, ensure_ascii=False), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termnode",
        description="Run and manage a federated terminology node.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True)

    init = sub.add_parser("init", help="create a data directory and config file")
    init.add_argument("--mode", choices=["node", "central"], required=True)
    init.add_argument("--data-dir", required=True)
    init.add_argument("--listen", default="127.0.0.1:8042")
    init.add_argument("--config", help="where to write the config (default <data-dir>/termnode.toml)")

    user = sub.add_parser("user", help="manage accounts")
    user_sub = user.add_subparsers(dest="user_command", required=True)
    user_add = user_sub.add_parser("add", help="create a user")
    user_add.add_argument("--config", required=True)
    user_add.add_argument("--username", required=True)
    user_add.add_argument("--password", required=True)
    user_add.add_argument("--display-name", default="")
    user_role = user_sub.add_parser("role", help="grant a role in a group")
    user_role.add_argument("--config", required=True)
    user_role.add_argument("--username", required=True)
    user_role.add_argument("--group", required=True)
    user_role.add_argument("--role", choices=[r.value for r in Role], required=True)

    imp = sub.add_parser("import", help="import a TBX or CSV file into a collection")
    imp.add_argument("--config", required=True)
    imp.add_argument("--collection", required=True)
    imp.add_argument("--format", choices=["tbx", "csv"], required=True)
    imp.add_argument("file")

    exp = sub.add_parser("export", help="export a collection to a file")
    exp.add_argument("--config", required=True)
    exp.add_argument("--collection", required=True)
    exp.add_argument("--format", choices=["tbx", "csv"], required=True)
    exp.add_argument("--include-drafts", action="store_true")
    exp.add_argument("file")

    val = sub.add_parser("validate", help="validate a TBX or CSV file without importing")
    val.add_argument("--format", choices=["tbx", "csv"], required=True)
    val.add_argument("file")

    sync = sub.add_parser("sync", help="push the public journal to the central")
    sync_sub = sync.add_subparsers(dest="sync_command", required=True)
    sync_now = sync_sub.add_parser("now", help="push pending changes once")
    sync_now.add_argument("--config", required=True)
    resync = sync_sub.add_parser("full-resync", help="rebuild the journal and push everything")
    resync.add_argument("--config", required=True)

    node = sub.add_parser("node", help="central-side node administration")
    node_sub = node.add_subparsers(dest="node_command", required=True)
    register = node_sub.add_parser("register", help="admit a node to the network")
    register.add_argument("--config", required=True)
    register.add_argument("--name", required=True)
    register.add_argument("--node-id", default=None)

    logs = sub.add_parser("logs", help="print request log records")
    logs.add_argument("--config", required=True)
    logs.add_argument("--level", choices=["debug", "info", "warn", "error"], default=None)
    logs.add_argument("--since", default=None)

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = load_config(args.config)
    runtime = Runtime(config)
    app = create_app(runtime)
    runtime.start()
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        runtime.stop()
    return 0


def _cmd_init(args) -> int:
    import os

    config = NodeConfig(
        mode=args.mode,
        listen_address=args.listen,
        data_dir=args.data_dir,
        node_id=new_id(),
        admin_token="admin-" + new_id() if args.mode == "central" else None,
    )
    config.validate()
    os.makedirs(config.data_dir, exist_ok=True)
    path = args.config or os.path.join(config.data_dir, "termnode.toml")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_config(config))
    result = {"config": path, "node_id": config.node_id, "mode": config.mode}
    if config.admin_token:
        result["admin_token"] = config.admin_token
    _out(result)
    return 0


def _cmd_user_add(args) -> int:
    runtime = Runtime(load_config(args.config))
    try:
        user = runtime.directory.add_user(args.username, args.password, args.display_name)
        _out({"id": user.id, "username": user.username})
    finally:
        runtime.stop()
    return 0


def _cmd_user_role(args) -> int:
    runtime = Runtime(load_config(args.config))
    try:
        if args.group not in runtime.directory.groups:
            runtime.directory.add_group(args.group)
        runtime.directory.set_membership(args.username, args.group, Role(args.role))
        _out({"username": args.username, "group": args.group, "role": args.role})
    finally:
        runtime.stop()
    return 0


def _cmd_import(args) -> int:
    with open(args.file, "rb") as handle:
        document = handle.read()
    runtime = Runtime(load_config(args.config))
    try:
        report = runtime.store.import_collection(
            args.collection, args.format, document, SYSTEM
        )
        _out(report.to_dict())
    finally:
        runtime.stop()
    return 0


def _cmd_export(args) -> int:
    runtime = Runtime(load_config(args.config))
    try:
        data = runtime.store.export_collection(
            args.collection, args.format, args.include_drafts, SYSTEM
        )
    finally:
        runtime.stop()
    with open(args.file, "wb") as handle:
        handle.write(data)
    _out({"written": args.file, "bytes": len(data)})
    return 0


def _cmd_validate(args) -> int:
    with open(args.file, "rb") as handle:
        document = handle.read()
    if args.format == "tbx":
        _, entries, issues = parse_tbx(document)
    else:
        entries, issues = csv_codec.parse_csv(document)
    issues = list(issues)
    for entry in entries:
        issues.extend(validate_entry(entry))
    for issue in issues:
        _out(issue.to_dict())
    errors = sum(1 for i in issues if i.severity is Severity.ERROR)
    warnings = len(issues) - errors
    _out({"entries": len(entries), "errors": errors, "warnings": warnings})
    return 1 if errors else 0


def _one_shot_worker(config: NodeConfig, runtime: Runtime) -> SyncWorker:
    if not config.sync_enabled:
        raise TransportError(
            "sync is not configured: set central_endpoint and central_token"
        )
    return SyncWorker(
        runtime.store,
        config.node_id,
        config.central_endpoint,
        config.central_token,
        HttpTransport(),
    )


def _cmd_sync_now(args) -> int:
    config = load_config(args.config)
    runtime = Runtime(config)
    try:
        pushed = _one_shot_worker(config, runtime).sync_once()
        _out({"pushed": pushed, "cursor": runtime.store.sync_cursor})
    finally:
        runtime.stop()
    return 0


def _cmd_sync_full_resync(args) -> int:
    config = load_config(args.config)
    runtime = Runtime(config)
    try:
        worker = _one_shot_worker(config, runtime)
        records = runtime.store.reset_journal()
        pushed = worker.sync_once()
        _out({"journal_records": records, "pushed": pushed})
    finally:
        runtime.stop()
    return 0


def _cmd_node_register(args) -> int:
    config = load_config(args.config)
    if config.mode != "central" or not config.admin_token:
        _err("node register runs against a central config with an admin_token")
        return 1
    body = {"display_name": args.name}
    if args.node_id:
        body["node_id"] = args.node_id
    url = f"http://{config.listen_address}/sync/v1/register"
    status, doc = HttpTransport().post_json(url, body, config.admin_token)
    if status != 200:
        _err(f"registration rejected with HTTP {status}: {doc}")
        return 1
    _out(doc)
    return 0


def _cmd_logs(args) -> int:
    config = load_config(args.config)
    for record in read_logs(config.log_path, level=args.level, since=args.since):
        _out(record)
    return 0


_HANDLERS = {
    ("serve", None): _cmd_serve,
    ("init", None): _cmd_init,
    ("user", "add"): _cmd_user_add,
    ("user", "role"): _cmd_user_role,
    ("import", None): _cmd_import,
    ("export", None): _cmd_export,
    ("validate", None): _cmd_validate,
    ("sync", "now"): _cmd_sync_now,
    ("sync", "full-resync"): _cmd_sync_full_resync,
    ("node", "register"): _cmd_node_register,
    ("logs", None): _cmd_logs,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    nested = getattr(args, f"{args.command}_command", None)
    handler = _HANDLERS[(args.command, nested)]
    try:
        return handler(args)
    except TermNodeError as exc:
        _err(str(exc))
        return 1
    except OSError as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
