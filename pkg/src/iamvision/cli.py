"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from iamvision import __version__
from iamvision.backend.base import ApiBackend, Credential, Session, load_credentials
from iamvision.backend.fixture import FixtureAccount, FixtureBackend, load_fixture
from iamvision.backend.live import LiveBackend
from iamvision.bench.suite import format_table, run_scenario
from iamvision.bench.truth import SCENARIO_IDS
from iamvision.core.policy import PolicyDocument
from iamvision.deep.catalog import ActionCatalog
from iamvision.deep.diff import diff_versions
from iamvision.deep.sweeps import sweep_readonly_fuzz, sweep_simulation
from iamvision.deep.versions import AMBIGUOUS, fuzz_versions
from iamvision.engine.agent import Agent
from iamvision.engine.report import SCHEMA_VERSION
from iamvision.engine.runner import EnumerationMode, RunConfig, cluster_credentials, run
from iamvision.errors import AccessDenied, ApiError, BadFlags, IamVisionError, Unfuzzable
from iamvision.intel import classify, enrich, load_catalog

log = logging.getLogger("iamvision")

CREDENTIALS_ENV = "IAMVISION_CREDENTIALS"


@dataclass
class Target:
    backend: ApiBackend
    sessions: list[Session]
    account: FixtureAccount | None = None


def _emit(payload: Any, args: argparse.Namespace) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2 if getattr(args, "pretty", False) else None) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fixture", help="JSON account fixture to run against offline")
    p.add_argument("--as", dest="acting", action="append", default=[], metavar="USER",
                   help="fixture user whose credentials to act with (repeatable)")
    p.add_argument("--credentials", help=f"credential file, one AccessKey,SecretKey[,Token] per line "
                                         f"(default: ${CREDENTIALS_ENV})")
    p.add_argument("--region", default="us-east-1")
    p.add_argument("--max-role-depth", type=int, default=None)
    p.add_argument("--output", "-o", help="write JSON here instead of stdout")
    p.add_argument("--pretty", action="store_true", help="indent JSON output")


def _open(args: argparse.Namespace) -> Target:
    if args.fixture and args.credentials:
        raise BadFlags("--fixture and --credentials are mutually exclusive")
    if args.max_role_depth is not None and args.max_role_depth < 1:
        raise BadFlags("--max-role-depth must be at least 1")
    if args.fixture:
        if not args.acting:
            raise BadFlags("--fixture needs at least one --as USER")
        account = load_fixture(Path(args.fixture))
        if args.max_role_depth is not None:
            account.options.max_role_depth = args.max_role_depth
        backend = FixtureBackend(account)
        creds = [account.credential_for(u) for u in args.acting]
        return Target(backend, [backend.session_for(c) for c in creds], account)
    if args.acting:
        raise BadFlags("--as only applies with --fixture")
    path = args.credentials or os.environ.get(CREDENTIALS_ENV)
    if not path:
        raise BadFlags("give --fixture or --credentials")
    creds: list[Credential] = load_credentials(path)
    if not creds:
        raise BadFlags(f"no credentials in {path}")
    backend = LiveBackend(args.region)
    return Target(backend, [s for group in cluster_credentials(backend, creds).values() for s in group])


# -- subcommands -----------------------------------------------------------------


def cmd_enum(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise BadFlags("--workers must be at least 1")
    mode = EnumerationMode(args.mode, tcrem=not args.no_tcrem, short_circuit=not args.no_short_circuit,
                           simulation=args.simulation, fuzz=args.fuzz, force_sweeps=args.force_sweeps)
    catalog = ActionCatalog.load(args.catalog) if args.catalog else None
    target = _open(args)
    clusters: dict[str, list[Session]] = {}
    for s in target.sessions:
        clusters.setdefault(s.account_id, []).append(s)
    reports = run(RunConfig(mode=mode, workers=args.workers, seed=args.seed, catalog=catalog), clusters)
    if not args.no_intel:
        intel = load_catalog(args.intel_catalog)
        reports = [enrich(r, intel) for r in reports]
    _emit({"schema_version": SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]}, args)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.all == bool(args.scenario):
        raise BadFlags("give exactly one of --all or --scenario N")
    ids = list(SCENARIO_IDS) if args.all else args.scenario
    runs = [run_scenario(i, args.mode, short_circuit=not args.no_short_circuit) for i in ids]
    if args.pretty:
        sys.stdout.write(format_table(runs) + "\n")
    else:
        _emit({"schema_version": SCHEMA_VERSION, "scenarios": [r.row() for r in runs]}, args)
    return 0


def _read_document(path: str) -> PolicyDocument:
    return PolicyDocument.from_json(Path(path).read_text())


def _policy_versions(session: Session, arn: str) -> tuple[dict[str, dict[str, Any]], str | None]:
    agent = Agent(session, 0)
    listed = agent.list("ListPolicyVersions", "Versions", PolicyArn=arn)
    if listed is not None:
        docs, default = {}, None
        for v in listed:
            payload = agent.get("GetPolicyVersion", PolicyArn=arn, VersionId=v["VersionId"])
            if payload is not None:
                docs[v["VersionId"]] = payload["PolicyVersion"]["Document"]
            if v.get("IsDefaultVersion"):
                default = v["VersionId"]
        if docs:
            return docs, default
    probe = fuzz_versions(session, arn)
    return probe.versions, probe.default_version_id


def cmd_diff(args: argparse.Namespace) -> int:
    if len(args.targets) == 2 and all(Path(t).is_file() for t in args.targets):
        if args.fixture or args.credentials:
            raise BadFlags("comparing two files takes no --fixture/--credentials")
        diff = diff_versions(_read_document(args.targets[0]), _read_document(args.targets[1]))
        _emit({"schema_version": SCHEMA_VERSION, "baseline": args.targets[0], "candidate": args.targets[1],
               "diff": diff.to_dict()}, args)
        return 0
    if len(args.targets) != 1:
        raise BadFlags("give one policy ARN, or two policy document files")
    target = _open(args)
    arn = args.targets[0]
    try:
        versions, default = _policy_versions(target.sessions[0], arn)
    except Unfuzzable:
        log.error("versions of %s are not readable with these credentials", arn)
        return 3
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "policy_arn": arn, "default_version_id": default,
                           "versions": sorted(versions)}
    if default and default != AMBIGUOUS and default in versions:
        out["diffs"] = {vid: diff_versions(versions[default], doc).to_dict()
                        for vid, doc in sorted(versions.items()) if vid != default}
    _emit(out, args)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    target = _open(args)
    session = target.sessions[0]
    catalog = ActionCatalog.load(args.catalog) if args.catalog else ActionCatalog.load()
    arns = args.target or [session.principal_arn]
    try:
        results = sweep_simulation(session, arns, catalog)
    except AccessDenied as exc:
        log.error("simulation refused: %s", exc)
        return 3
    _emit({"schema_version": SCHEMA_VERSION, "results": {
        arn: {"allowed": sorted(r.allowed, key=str.lower),
              "sources": [{"source_type": s.source_type, "name": s.name, "owner": s.owner,
                           "arn": s.arn(session.account_id), "actions": sorted(a, key=str.lower)}
                          for s, a in sorted(r.sources.items(), key=lambda kv: (kv[0].source_type, kv[0].owner,
                                                                                kv[0].name))]}
        for arn, r in results.items()}}, args)
    return 0


def cmd_fuzz(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise BadFlags("--workers must be at least 1")
    target = _open(args)
    catalog = ActionCatalog.load(args.catalog) if args.catalog else ActionCatalog.load()
    out = {}
    for session in target.sessions:
        found = sweep_readonly_fuzz(session, catalog, args.workers)
        out[session.principal_arn] = sorted(found, key=str.lower)
    _emit({"schema_version": SCHEMA_VERSION, "allowed": out}, args)
    return 0


def cmd_intel(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.intel_catalog)
    _emit({"schema_version": SCHEMA_VERSION,
           "actions": {a: classify(catalog, a).annotation() for a in args.actions}}, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iamvision", description="Cooperative IAM permission enumeration.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enum", help="enumerate permissions and write one report per user credential")
    _add_source(p)
    p.add_argument("--mode", choices=["single", "separate", "cross"], default="cross")
    p.add_argument("--no-tcrem", action="store_true", help="do not assume in-scope roles")
    p.add_argument("--no-short-circuit", action="store_true", help="skip the initial account-dump probe")
    p.add_argument("--simulation", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--fuzz", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--force-sweeps", action="store_true", help="allow sweeps outside single mode")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--catalog", help="action catalog (JSON Lines) for sweeps")
    p.add_argument("--intel-catalog", help="attack intel catalog (JSON Lines)")
    p.add_argument("--no-intel", action="store_true", help="omit intel annotations")
    p.set_defaults(func=cmd_enum)

    p = sub.add_parser("bench", help="run benchmark scenarios and print their scores")
    p.add_argument("--scenario", type=int, action="append", default=[], metavar="N")
    p.add_argument("--all", action="store_true")
    p.add_argument("--mode", choices=["single", "separate", "cross"], default="cross")
    p.add_argument("--no-short-circuit", action="store_true")
    p.add_argument("--output", "-o")
    p.add_argument("--pretty", action="store_true", help="print a text table instead of JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("diff-versions", help="compare policy versions by privilege")
    p.add_argument("targets", nargs="+", metavar="ARN_OR_FILE")
    _add_source(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("simulate", help="simulate every catalog action for principals")
    _add_source(p)
    p.add_argument("--target", action="append", default=[], metavar="ARN")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuzz", help="invoke read-only no-argument actions to see which succeed")
    _add_source(p)
    p.add_argument("--catalog")
    p.add_argument("--workers", type=int, default=8)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("intel", help="look up attack intel for actions")
    p.add_argument("actions", nargs="+")
    p.add_argument("--intel-catalog")
    p.add_argument("--output", "-o")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_intel)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BadFlags as exc:
        print(f"iamvision: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"iamvision: error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (IamVisionError, ApiError) as exc:
        print(f"iamvision: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
