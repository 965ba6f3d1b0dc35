"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

import fnmatch

from hypothesis import strategies as st

from iamvision.core.policy import PolicyStatement

SERVICES = ("iam", "s3", "ec2", "sts")
VERBS = ("GetPolicy", "ListRoles", "PutObject", "GetObject", "DescribeInstances")
# 20 concrete actions
ALPHABET = tuple(f"{s}:{v}" for s in SERVICES for v in VERBS)
RESOURCES = ("*", "arn:aws:s3:::bucket/a", "arn:aws:s3:::bucket/b", "arn:aws:iam::123456789012:role/R")

action_patterns = st.one_of(
    st.sampled_from(ALPHABET),
    st.sampled_from([f"{s}:*" for s in SERVICES]),
    st.sampled_from([f"{s}:Get*" for s in SERVICES] + [f"{s}:List*" for s in SERVICES] + ["*", "*:Get?olicy"]),
    st.sampled_from(ALPHABET).map(str.lower),
)
resource_patterns = st.sampled_from(RESOURCES + ("arn:aws:s3:::bucket/*", "arn:aws:s3:::bucket/?"))


@st.composite
def statements(draw, effects=("Allow", "Deny")) -> PolicyStatement:
    effect = draw(st.sampled_from(effects))
    acts = tuple(draw(st.lists(action_patterns, min_size=1, max_size=3)))
    res = tuple(draw(st.lists(resource_patterns, min_size=1, max_size=2)))
    negate_action = draw(st.booleans())
    negate_resource = draw(st.integers(0, 3)) == 0
    return PolicyStatement(
        effect=effect,
        actions=() if negate_action else acts,
        not_actions=acts if negate_action else (),
        resources=() if negate_resource else res,
        not_resources=res if negate_resource else (),
    )


def oracle_match(pattern: str, value: str, ignore_case: bool) -> bool:
    if ignore_case:
        pattern, value = pattern.lower(), value.lower()
    return fnmatch.fnmatchcase(value, pattern)


def oracle_applies(stmt: PolicyStatement, action: str, resource: str) -> bool:
    if stmt.actions:
        act = any(oracle_match(p, action, True) for p in stmt.actions)
    else:
        act = not any(oracle_match(p, action, True) for p in stmt.not_actions)
    if stmt.resources:
        res = any(oracle_match(p, resource, False) for p in stmt.resources)
    elif stmt.not_resources:
        res = not any(oracle_match(p, resource, False) for p in stmt.not_resources)
    else:
        res = True
    return act and res


def oracle_decision(stmts, action: str, resource: str) -> str:
    applying = [s for s in stmts if oracle_applies(s, action, resource)]
    if any(s.effect == "Deny" for s in applying):
        return "ExplicitDeny"
    if applying:
        return "Allow"
    return "ImplicitDeny"


@st.composite
def documents(draw, max_statements: int = 4) -> dict:
    """Random identity-policy documents in raw JSON form, including NotAction/NotResource and conditions."""
    stmts = []
    for stmt in draw(st.lists(statements(), min_size=0, max_size=max_statements)):
        raw = stmt.to_dict()
        if draw(st.integers(0, 4)) == 0:
            raw["Condition"] = {"Bool": {"aws:SecureTransport": draw(st.sampled_from(["true", "false"]))}}
        stmts.append(raw)
    return {"Version": "2012-10-17", "Statement": stmts}
