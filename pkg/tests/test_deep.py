from __future__ import annotations

import pytest

from iamvision.backend import FixtureBackend
from iamvision.deep.catalog import NO_ARGS, ActionCatalog, CatalogEntry
from iamvision.deep.diff import Privilege, diff_versions, expand
from iamvision.deep.inverse import inverse_enumerate
from iamvision.deep.sweeps import sweep_readonly_fuzz, sweep_simulation
from iamvision.deep.versions import AMBIGUOUS, fuzz_versions
from iamvision.bench.truth import scenario_catalog
from iamvision.core.evaluate import allowed_actions
from iamvision.core.model import effective_statements
from iamvision.engine.agent import Agent
from iamvision.errors import AccessDenied, SchemaViolation, Unfuzzable

from conftest import all_sessions, allow_doc, open_scenario, session_of, tiny_account

ARN = "arn:aws:iam::123456789012:policy/P"


def versioned_account(versions: dict, default: str, grant=("iam:GetPolicyVersion",)):
    policy = {"arn": ARN, "name": "P", "default_version_id": default,
              "versions": {v: allow_doc(f"s3:Op{v}") for v in versions}}
    return tiny_account({"u": {"inline": {"g": allow_doc(*grant)}}}, policies=[policy])


def test_fuzz_three_versions():
    account, backend = versioned_account(["v1", "v2", "v3"], "v2")
    res = fuzz_versions(backend.session_for(account.credential_for("u")), ARN, 10)
    pol = account.policies[ARN]
    assert res.versions == {v: d.to_dict() for v, d in pol.versions.items()}
    assert res.default_version_id == "v2" and res.probes == 10


def test_fuzz_single_version():
    account, backend = versioned_account(["v1"], "v1")
    res = fuzz_versions(backend.session_for(account.credential_for("u")), ARN)
    assert list(res.versions) == ["v1"] and res.default_version_id == "v1"


def test_fuzz_non_contiguous_ids():
    account, backend = versioned_account(["v1", "v7"], "v7")
    res = fuzz_versions(backend.session_for(account.credential_for("u")), ARN)
    assert sorted(res.versions) == ["v1", "v7"] and res.default_version_id == "v7"


def test_fuzz_denied_is_unfuzzable():
    account, backend = versioned_account(["v1"], "v1", grant=("iam:ListUsers",))
    with pytest.raises(Unfuzzable):
        fuzz_versions(backend.session_for(account.credential_for("u")), ARN)


def test_fuzz_without_default_flag_is_ambiguous():
    account, _ = versioned_account(["v1", "v2"], "v2")
    account.options.omit_default_flag = True
    res = fuzz_versions(FixtureBackend(account).session_for(account.credential_for("u")), ARN)
    assert res.ambiguous and res.default_version_id == AMBIGUOUS
    assert res.probes >= len(res.versions)


def test_fuzz_agrees_with_listing():
    account, backend = versioned_account(["v1", "v2", "v4"], "v4",
                                         grant=("iam:GetPolicyVersion", "iam:ListPolicyVersions"))
    session = backend.session_for(account.credential_for("u"))
    listed = {v["VersionId"] for v in session.call("ListPolicyVersions", PolicyArn=ARN)["Versions"]}
    assert set(fuzz_versions(session, ARN).versions) == listed


def attachment_map(account):
    out = {}
    for kind, table in (("user", account.users), ("group", account.groups), ("role", account.roles)):
        for name, ent in table.items():
            for arn in ent.attached_policies:
                out.setdefault(arn, {"user": [], "group": [], "role": []})[kind].append(name)
    return {a: {k: sorted(v) for k, v in d.items()} for a, d in out.items()}


def test_inverse_s6_recovers_attachments():
    account, backend = open_scenario(6)
    agents = [Agent(s, i) for i, s in enumerate(all_sessions(account, backend))]
    res = inverse_enumerate(agents)
    assert res.complete
    got = {a: {k: sorted(v) for k, v in d.items()} for a, d in res.entities.items()}
    assert got == attachment_map(account)


def test_inverse_s12_role_session():
    account, backend = open_scenario(12)
    sessions = [s for s in all_sessions(account, backend) if s.name == "S12_RoleA"]
    res = inverse_enumerate(Agent(sessions[0], 0))
    got = {a: {k: sorted(v) for k, v in d.items()} for a, d in res.entities.items()}
    assert got == attachment_map(account)
    ops = {r.operation for r in account.call_log if r.principal_arn.endswith("role/S12_RoleA")}
    assert "ListEntitiesForPolicy" in ops


def test_inverse_no_attachments():
    account, backend = tiny_account({"u": {"inline": {"g": allow_doc("iam:ListPolicies",
                                                                      "iam:ListEntitiesForPolicy")}}})
    res = inverse_enumerate(Agent(backend.session_for(account.credential_for("u")), 0))
    assert res.entities == {} and res.universe == []


def test_inverse_fallback_uses_known_arns():
    policy = {"arn": ARN, "name": "P", "default_version_id": "v1", "versions": {"v1": allow_doc("s3:X")}}
    account, backend = tiny_account({"u": {"inline": {"g": allow_doc("iam:ListEntitiesForPolicy")},
                                           "attached": [ARN]}}, policies=[policy])
    res = inverse_enumerate(Agent(backend.session_for(account.credential_for("u")), 0), known_arns=[ARN],
                            vendor_arns=[])
    assert res.universe is None and res.entities[ARN]["user"] == ["u"]


def P(effect, action, resource="*"):
    return Privilege(effect, action, resource)


def test_diff_new_privilege():
    d = diff_versions(allow_doc("s3:GetObject"), allow_doc("s3:GetObject", "s3:PutObject"))
    assert d.new == {P("Allow", "s3:PutObject")}
    assert d.kept == {P("Allow", "s3:GetObject")}
    assert d.removed == set()


def test_diff_identity():
    doc = allow_doc("s3:GetObject", "ec2:DescribeInstances")
    d = diff_versions(doc, doc)
    assert d.new == set() and d.removed == set() and d.kept == set(expand(doc))


def test_diff_dropped_deny_is_removed():
    base = {"Version": "2012-10-17", "Statement": [
        {"Effect": "Allow", "Action": "s3:*", "Resource": "*"},
        {"Effect": "Deny", "Action": "s3:DeleteBucket", "Resource": "*"}]}
    d = diff_versions(base, allow_doc("s3:*"))
    assert P("Deny", "s3:DeleteBucket") in d.removed and d.new == set()


def test_diff_not_action_is_symbolic():
    doc = {"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "NotAction": ["iam:*"], "Resource": "*"}]}
    (priv,) = expand(doc)
    assert str(priv.action) == "NOT(iam:*)"
    assert diff_versions(doc, allow_doc("s3:GetObject")).removed == {priv}


def test_diff_condition_change_is_flagged():
    cond = {"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "Action": "s3:GetObject", "Resource": "*",
                                                     "Condition": {"Bool": {"aws:SecureTransport": "true"}}}]}
    d = diff_versions(allow_doc("s3:GetObject"), cond)
    assert d.condition_changed == {P("Allow", "s3:GetObject")}
    assert set(d.to_dict()) == {"new", "kept", "removed", "condition_changed"}


def test_sweep_simulation_s21():
    account, backend, session = session_of(21, "S21_UserA")
    role = account.roles["S21_RoleA"].arn
    out = sweep_simulation(session, [account.users["S21_UserA"].arn, role], ActionCatalog.load())
    assert {"iam:ListRoles", "s3:CreateBucket", "iam:SimulatePrincipalPolicy"} <= out[account.users["S21_UserA"].arn].allowed
    assert {"s3:ListBucket", "ec2:DescribeInstances", "ssm:CancelCommand"} <= out[role].allowed


def test_sweep_simulation_empty_catalog():
    account, _, session = session_of(21, "S21_UserA")
    arn = account.users["S21_UserA"].arn
    assert sweep_simulation(session, [arn], ActionCatalog([]))[arn].allowed == set()


def test_simulation_matches_evaluator():
    # the backend simulates with the evaluator, so this checks batching and merging
    catalog = ActionCatalog.load()
    checked = 0
    for n in range(1, 23):
        account, backend = open_scenario(n)
        for session in all_sessions(account, backend):
            try:
                out = sweep_simulation(session, [session.principal_arn], catalog, batch_size=37)
            except AccessDenied:
                continue
            truth = allowed_actions(effective_statements(account, session.principal_arn), catalog.actions)
            assert out[session.principal_arn].allowed == truth
            checked += 1
    assert checked >= 1

    doc = allow_doc("iam:SimulatePrincipalPolicy", "s3:*", "ec2:Describe*")
    doc["Statement"].append({"Effect": "Deny", "Action": "s3:Delete*", "Resource": "*"})
    account, backend = tiny_account({"u": {"inline": {"g": doc}}})
    session = backend.session_for(account.credential_for("u"))
    out = sweep_simulation(session, [session.principal_arn], catalog, batch_size=7)
    truth = allowed_actions(effective_statements(account, session.principal_arn), catalog.actions)
    assert out[session.principal_arn].allowed == truth and not any(a.startswith("s3:Delete") for a in truth)


def test_fuzz_s22_scenario_catalog():
    account, backend, session = session_of(22, "S22_UserA")
    catalog = scenario_catalog(account, ["S22_UserA"])
    found = sweep_readonly_fuzz(session, catalog)
    assert len(catalog.read_only_no_args()) == 11 and len(found) == 11
    assert "iam:ListRoles" not in sweep_readonly_fuzz(session, ActionCatalog.load())


def test_fuzz_no_grants():
    account, backend = tiny_account({"u": {}})
    assert sweep_readonly_fuzz(backend.session_for(account.credential_for("u")), ActionCatalog.load()) == set()


def test_fuzz_subset_of_simulation():
    account, backend, session = session_of(21, "S21_UserA")
    catalog = ActionCatalog.load()
    fuzzed = sweep_readonly_fuzz(session, catalog, workers=4)
    simulated = sweep_simulation(session, [session.principal_arn], catalog)[session.principal_arn].allowed
    read_only = {e.action for e in catalog if e.read_only}
    assert fuzzed <= simulated & read_only


def test_catalog_load_and_errors(tmp_path):
    catalog = ActionCatalog.load()
    assert len(catalog) >= 500 and catalog.read_only_no_args()
    path = tmp_path / "c.jsonl"
    path.write_text('{"action": "s3:ListBuckets", "read_only": true, "invocation": "no-args"}\n')
    assert ActionCatalog.load(path).read_only_no_args() == ["s3:ListBuckets"]
    with pytest.raises(SchemaViolation):
        ActionCatalog.from_jsonl("{not json")
    with pytest.raises(SchemaViolation):
        ActionCatalog.from_jsonl('{"action": "s3:X"}')


def test_catalog_for_documents_prefers_reference():
    ref = ActionCatalog([CatalogEntry("s3:ListBucket", True, {"Bucket": "{bucket}"})])
    docs = [allow_doc("s3:ListBucket", "ec2:DescribeInstances", "s3:*")]
    assert ActionCatalog.for_documents(docs).read_only_no_args() == ["ec2:DescribeInstances", "s3:ListBucket"]
    assert ActionCatalog.for_documents(docs, ref).read_only_no_args() == ["ec2:DescribeInstances"]
    assert NO_ARGS == "no-args"
