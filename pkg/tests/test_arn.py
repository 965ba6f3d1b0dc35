from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iamvision.core.arn import account_root, iam_arn, parse_arn
from iamvision.errors import MalformedArn


def test_parse_user_arn():
    arn = parse_arn("arn:aws:iam::123456789012:user/S1_UserA")
    assert (arn.service, arn.account_id, arn.resource_type, arn.name) == ("iam", "123456789012", "user", "S1_UserA")


def test_parse_vendor_policy_arn():
    arn = parse_arn("arn:aws:iam::aws:policy/AmazonEKSServicePolicy")
    assert arn.account_id == "aws"
    assert arn.resource_type == "policy"
    assert arn.name == "AmazonEKSServicePolicy"
    assert arn.is_aws_managed


def test_assumed_role_name():
    arn = parse_arn("arn:aws:sts::123456789012:assumed-role/RoleA/session-1")
    assert arn.resource_type == "assumed-role"
    assert arn.name == "RoleA"


@pytest.mark.parametrize("text", ["not-an-arn", "arn:aws:iam::12345:user/x", "arn:aws:iam::123456789012"])
def test_malformed(text):
    with pytest.raises(MalformedArn):
        parse_arn(text)


def test_helpers():
    assert iam_arn("123456789012", "role", "R") == "arn:aws:iam::123456789012:role/R"
    assert iam_arn("123456789012", "user", "U", "/ops/") == "arn:aws:iam::123456789012:user/ops/U"
    assert account_root("123456789012") == "arn:aws:iam::123456789012:root"


names = st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+=,.@-", min_size=1,
                max_size=20)


@given(st.from_regex(r"\d{12}", fullmatch=True), st.sampled_from(["user", "group", "role", "policy"]), names)
def test_round_trip(account, kind, name):
    text = f"arn:aws:iam::{account}:{kind}/{name}"
    assert str(parse_arn(text)) == text
