from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import ALPHABET, RESOURCES, oracle_decision, statements

from iamvision.core.evaluate import Decision, evaluate, pattern_match, trust_admits
from iamvision.core.model import effective_statements, sourced_statements
from iamvision.core.policy import PolicyDocument, PolicyStatement

from conftest import open_scenario


def allow(*actions, resource="*"):
    return PolicyStatement("Allow", actions=actions, resources=(resource,))


def deny(*actions, resource="*"):
    return PolicyStatement("Deny", actions=actions, resources=(resource,))


def test_pattern_examples():
    assert pattern_match("iam:List*", "iam:ListRoles", ignore_case=True)
    assert pattern_match("iam:GetUserPolicy", "iam:getuserpolicy", ignore_case=True)
    assert not pattern_match("s3:*", "iam:ListRoles", ignore_case=True)
    assert not pattern_match("arn:aws:s3:::Bucket", "arn:aws:s3:::bucket")


def test_explicit_deny_wins():
    assert evaluate([allow("iam:*"), deny("iam:GetPolicy")], "iam:GetPolicy") is Decision.EXPLICIT_DENY


def test_implicit_deny_and_allow():
    assert evaluate([], "iam:ListRoles") is Decision.IMPLICIT_DENY
    assert evaluate([allow("iam:ListRoles")], "iam:ListRoles") is Decision.ALLOW


def test_not_action():
    stmt = PolicyStatement("Allow", not_actions=("iam:*",), resources=("*",))
    assert evaluate([stmt], "s3:GetObject") is Decision.ALLOW
    assert evaluate([stmt], "iam:ListRoles") is Decision.IMPLICIT_DENY


def test_missing_resource_is_treated_as_wildcard():
    assert evaluate([PolicyStatement("Allow", actions=("s3:*",))], "s3:GetObject", "arn:aws:s3:::x") is Decision.ALLOW


def test_trust_principal_forms():
    def trust(principal):
        return PolicyDocument.from_json({"Version": "2012-10-17", "Statement": [
            {"Effect": "Allow", "Principal": principal, "Action": "sts:AssumeRole"}]})

    user = "arn:aws:iam::123456789012:user/U"
    assert trust_admits(trust({"AWS": user}), user)
    assert trust_admits(trust({"AWS": "123456789012"}), user)
    assert trust_admits(trust({"AWS": "arn:aws:iam::123456789012:root"}), user)
    assert trust_admits(trust("*"), user)
    assert not trust_admits(trust({"AWS": "arn:aws:iam::123456789012:user/Other"}), user)
    assert not trust_admits(trust({"AWS": []}), user)
    assert not trust_admits(None, user)


def test_effective_statements_s1_user():
    account, _ = open_scenario(1)
    sources = {s.policy_name for s in sourced_statements(account, account.users["S1_UserA"].arn)}
    assert sources == {"S1_IP_UserA", "S1_AMP_PolicyA", "S1_AMP_PolicyB", "S1_IP_GroupA", "S1_AMP_PolicyC"}


def test_effective_statements_s1_role():
    account, _ = open_scenario(1)
    sources = {s.policy_name for s in sourced_statements(account, account.roles["S1_RoleA"].arn)}
    assert sources == {"S1_IP_RoleA", "AmazonEKSServicePolicy"}


def test_effective_statements_empty_user():
    from iamvision.backend import load_fixture

    account = load_fixture({"account_id": "123456789012", "users": [{"name": "lonely"}], "groups": [], "roles": [],
                            "managed_policies": [], "credentials": []})
    assert effective_statements(account, account.users["lonely"].arn) == []


@settings(max_examples=200)
@given(st.lists(statements(), max_size=5), st.sampled_from(ALPHABET), st.sampled_from(RESOURCES))
def test_matches_brute_force_oracle(stmts, action, resource):
    assert evaluate(stmts, action, resource).value == oracle_decision(stmts, action, resource)
