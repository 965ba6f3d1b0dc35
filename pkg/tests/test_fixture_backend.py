from __future__ import annotations

import copy

import pytest

from iamvision.backend import Credential, FixtureBackend, FixtureOptions, load_fixture
from iamvision.backend.base import PAGE_SIZE, parse_credentials
from iamvision.errors import (
    AccessDenied,
    BatchTooLarge,
    ChainDepthExceeded,
    DanglingReference,
    InvalidClientTokenId,
    NoSuchEntity,
    SchemaViolation,
    Throttling,
    UnsupportedOperation,
)

from conftest import open_scenario, scenario_raw, session_of

EMPTY = {"account_id": "123456789012", "users": [], "groups": [], "roles": [], "managed_policies": [],
         "credentials": []}


def test_load_s1_shape():
    account, _ = open_scenario(1)
    assert list(account.users) == ["S1_UserA"]
    assert list(account.groups) == ["S1_GroupA"]
    assert list(account.roles) == ["S1_RoleA"]
    customer = sorted(p.name for p in account.policies.values() if not p.is_aws_managed)
    vendor = [p.name for p in account.policies.values() if p.is_aws_managed]
    assert customer == ["S1_AMP_PolicyA", "S1_AMP_PolicyB", "S1_AMP_PolicyC"]
    assert vendor == ["AmazonEKSServicePolicy"]


def test_empty_account_is_valid():
    account = load_fixture(EMPTY)
    assert not account.users and not account.roles and not account.policies


def test_dangling_policy_reference():
    raw = copy.deepcopy(EMPTY)
    raw["users"] = [{"name": "u", "attached_policies": ["arn:aws:iam::123456789012:policy/Missing"]}]
    with pytest.raises(DanglingReference):
        load_fixture(raw)


def test_schema_violation():
    raw = copy.deepcopy(EMPTY)
    raw["account_id"] = "12"
    with pytest.raises(SchemaViolation):
        load_fixture(raw)


def test_list_roles_allowed(s1):
    _, _, session = s1
    roles = session.list_all("ListRoles", "Roles")
    assert [r["RoleName"] for r in roles] == ["S1_RoleA"]
    assert roles[0]["AssumeRolePolicyDocument"]["Statement"]


def test_denied_operations_are_logged(s1):
    account, _, session = s1
    with pytest.raises(AccessDenied):
        session.call("GetAccountAuthorizationDetails")
    last = account.call_log[-1]
    assert (last.operation, last.outcome, last.decision) == ("GetAccountAuthorizationDetails", "AccessDenied",
                                                              "ImplicitDeny")
    assert [r.seq for r in account.call_log] == list(range(len(account.call_log)))


def test_list_policy_versions_denied_in_s4():
    account, _, session = session_of(4, "S4_UserA")
    with pytest.raises(AccessDenied):
        session.call("ListPolicyVersions", PolicyArn=f"arn:aws:iam::{account.account_id}:policy/S4_AMP_PolicyA")


def test_caller_identity(s1):
    account, backend, session = s1
    ident = backend.get_caller_identity(session)
    assert ident["Arn"] == account.users["S1_UserA"].arn
    assert ident["Account"] == account.account_id
    role = backend.assume_role(session, account.roles["S1_RoleA"].arn)
    assert ":assumed-role/S1_RoleA/" in backend.get_caller_identity(role)["Arn"]
    assert role.principal_arn == account.roles["S1_RoleA"].arn
    assert role.chain == (session.principal_arn,)


def test_unknown_key(s1):
    _, backend, _ = s1
    with pytest.raises(InvalidClientTokenId):
        backend.session_for(Credential("AKIAXXXX", "nope"))


def test_role_chain_follows_trust():
    account, backend, user = session_of(8, "S8_UserA")
    role_a = backend.assume_role(user, account.roles["S8_RoleA"].arn)
    role_b = backend.assume_role(role_a, account.roles["S8_RoleB"].arn)
    assert role_b.name == "S8_RoleB"
    with pytest.raises(AccessDenied):
        backend.assume_role(user, account.roles["S8_RoleB"].arn)


def test_empty_trust_principal_denies():
    raw = copy.deepcopy(EMPTY)
    raw["users"] = [{"name": "u"}]
    raw["roles"] = [{"name": "r", "trust_policy": {"Version": "2012-10-17", "Statement": [
        {"Effect": "Allow", "Principal": {"AWS": []}, "Action": "sts:AssumeRole"}]}}]
    raw["credentials"] = [{"user": "u", "access_key_id": "AKIAU", "secret_access_key": "s"}]
    account = load_fixture(raw)
    backend = FixtureBackend(account)
    session = backend.session_for(Credential("AKIAU", "s"))
    with pytest.raises(AccessDenied):
        backend.assume_role(session, account.roles["r"].arn)


def _self_trusting_chain(depth: int) -> dict:
    raw = copy.deepcopy(EMPTY)
    raw["users"] = [{"name": "u"}]
    raw["credentials"] = [{"user": "u", "access_key_id": "AKIAU", "secret_access_key": "s"}]
    prev = "arn:aws:iam::123456789012:user/u"
    for i in range(depth):
        raw["roles"].append({"name": f"r{i}", "trust_policy": {"Version": "2012-10-17", "Statement": [
            {"Effect": "Allow", "Principal": {"AWS": prev}, "Action": "sts:AssumeRole"}]}})
        prev = f"arn:aws:iam::123456789012:role/r{i}"
    return raw


def test_chain_depth_cap():
    account = load_fixture(_self_trusting_chain(4))
    account.options = FixtureOptions(max_role_depth=2)
    backend = FixtureBackend(account)
    session = backend.session_for(Credential("AKIAU", "s"))
    session = backend.assume_role(session, "arn:aws:iam::123456789012:role/r0")
    session = backend.assume_role(session, "arn:aws:iam::123456789012:role/r1")
    with pytest.raises(ChainDepthExceeded):
        backend.assume_role(session, "arn:aws:iam::123456789012:role/r2")


def test_simulation_examples():
    account, backend, session = session_of(21, "S21_UserA")
    res = backend.simulate_principal_policy(session, account.users["S21_UserA"].arn, ["iam:ListRoles"])
    ev = res["EvaluationResults"][0]
    assert ev["EvalDecision"] == "allowed"
    assert any(m["SourcePolicyId"] == "S21_IP_GroupA" for m in ev["MatchedStatements"])
    res = backend.simulate_principal_policy(session, account.roles["S21_RoleB"].arn, ["s3:CreateBucket"])
    assert res["EvaluationResults"][0]["EvalDecision"] == "allowed"


def test_simulation_denied_for_s1(s1):
    account, backend, session = s1
    with pytest.raises(AccessDenied):
        backend.simulate_principal_policy(session, session.principal_arn, ["iam:ListRoles"])


def test_simulation_batch_cap():
    account, backend, session = session_of(21, "S21_UserA")
    with pytest.raises(BatchTooLarge):
        backend.simulate_principal_policy(session, session.principal_arn, ["iam:ListRoles"] * 101)


def test_missing_entity_after_authorization():
    account, backend, session = session_of(15, "S15_UserB")
    with pytest.raises(NoSuchEntity):
        session.call("ListUserPolicies", UserName="nobody")


def test_pagination():
    raw = copy.deepcopy(EMPTY)
    raw["users"] = [{"name": "u", "inline_policies": {"p": {"Version": "2012-10-17", "Statement": [
        {"Effect": "Allow", "Action": "iam:ListRoles", "Resource": "*"}]}}}]
    raw["roles"] = [{"name": f"r{i:03d}", "trust_policy": {"Version": "2012-10-17", "Statement": []}}
                    for i in range(PAGE_SIZE + 5)]
    raw["credentials"] = [{"user": "u", "access_key_id": "AKIAU", "secret_access_key": "s"}]
    account = load_fixture(raw)
    session = FixtureBackend(account).session_for(Credential("AKIAU", "s"))
    first = session.call("ListRoles")
    assert len(first["Roles"]) == PAGE_SIZE and first["IsTruncated"]
    assert len(session.list_all("ListRoles", "Roles")) == PAGE_SIZE + 5


def test_throttling_is_retried_and_seeded():
    account = load_fixture(scenario_raw(1))
    account.options = FixtureOptions(throttle_rate=0.3, throttle_seed=7)
    backend = FixtureBackend(account)
    session = backend.session_for(account.credential_for("S1_UserA"))
    for _ in range(5):
        assert session.call("ListRoles")["Roles"]
    assert any(r.outcome == "Throttling" for r in account.call_log)

    session.retry_attempts = 1
    account.options = FixtureOptions(throttle_rate=1.0)
    with pytest.raises(Throttling):
        session.call("ListRoles")


def test_unsupported_operation(s1):
    account, _, session = s1
    with pytest.raises(UnsupportedOperation):
        session.call("DeleteEverything")
    account.options = FixtureOptions(unsupported=("ListRoles",))
    with pytest.raises(UnsupportedOperation):
        session.call("ListRoles")


def test_omit_default_flag():
    account = load_fixture(scenario_raw(4))
    account.options = FixtureOptions(omit_default_flag=True)
    backend = FixtureBackend(account)
    session = backend.session_for(account.credential_for("S4_UserA"))
    arn = f"arn:aws:iam::{account.account_id}:policy/S4_AMP_PolicyA"
    assert "IsDefaultVersion" not in session.call("GetPolicyVersion", PolicyArn=arn, VersionId="v1")["PolicyVersion"]


def test_parse_credentials():
    creds = parse_credentials("# keys\nAKIA1,secret1\n\nASIA2,secret2,token2\n")
    assert creds == [Credential("AKIA1", "secret1"), Credential("ASIA2", "secret2", "token2")]
    with pytest.raises(SchemaViolation):
        parse_credentials("onlyone")
