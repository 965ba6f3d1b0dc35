from __future__ import annotations

import json
from importlib import resources

import pytest

from iamvision.backend import FixtureBackend, load_fixture


def scenario_path(n: int):
    return resources.files("iamvision.data").joinpath("scenarios", f"S{n}.json")


def scenario_raw(n: int) -> dict:
    return json.loads(scenario_path(n).read_text())


def open_scenario(n: int):
    """A fresh fixture account and backend for scenario ``n``."""
    account = load_fixture(scenario_raw(n))
    return account, FixtureBackend(account)


def session_of(n: int, user: str):
    account, backend = open_scenario(n)
    return account, backend, backend.session_for(account.credential_for(user))


@pytest.fixture
def s1():
    return session_of(1, "S1_UserA")


def allow_doc(*actions: str) -> dict:
    return {"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "Action": list(actions), "Resource": "*"}]}


def tiny_account(users: dict[str, dict], account_id: str = "123456789012", roles=(), groups=(), policies=()):
    """Build a fixture from ``{user: {"inline": {name: doc}, ...}}`` with one credential per user."""
    raw = {"account_id": account_id, "users": [], "groups": list(groups), "roles": list(roles),
           "managed_policies": list(policies), "credentials": []}
    for i, (name, entry) in enumerate(users.items()):
        raw["users"].append({"name": name, "inline_policies": entry.get("inline", {}),
                             "attached_policies": entry.get("attached", []), "groups": entry.get("groups", [])})
        raw["credentials"].append({"user": name, "access_key_id": f"AKIA{account_id}{i:04d}",
                                   "secret_access_key": f"secret-{name}"})
    account = load_fixture(raw)
    return account, FixtureBackend(account)


def all_sessions(account, backend):
    """Every user session plus every role session reachable by repeated AssumeRole."""
    from iamvision.errors import IamVisionError

    out = [backend.session_for(account.credential_for(u)) for u in sorted(account.users)]
    seen = {s.principal_arn for s in out}
    i = 0
    while i < len(out):
        for role in sorted(account.roles.values(), key=lambda r: r.arn):
            if role.arn in seen:
                continue
            try:
                session = backend.assume_role(out[i], role.arn)
            except IamVisionError:
                continue
            seen.add(role.arn)
            out.append(session)
        i += 1
    return out


def pytest_terminal_summary(terminalreporter):
    lines = [value for key in ("passed", "failed") for rep in terminalreporter.stats.get(key, [])
             if getattr(rep, "when", "") == "call"
             for name, value in rep.user_properties if name == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
