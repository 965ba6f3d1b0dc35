from __future__ import annotations

import json

import pytest

from iamvision.core.policy import PolicyDocument, PolicyStatement, canonical_document, documents_equal
from iamvision.errors import PolicyError


def test_single_and_list_forms_are_equal():
    a = {"Version": "2012-10-17", "Statement": {"Effect": "Allow", "Action": "s3:GetObject", "Resource": "*"}}
    b = {"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "Action": ["s3:GetObject"], "Resource": ["*"]}]}
    assert documents_equal(a, b)
    assert PolicyDocument.from_json(a) == PolicyDocument.from_json(json.dumps(b))


def test_statement_order_does_not_matter():
    s1 = {"Effect": "Allow", "Action": ["b:B", "a:A"], "Resource": "*"}
    s2 = {"Effect": "Deny", "Action": "c:C", "Resource": "*"}
    a = {"Version": "2012-10-17", "Statement": [s1, s2]}
    b = {"Version": "2012-10-17", "Statement": [s2, s1]}
    assert canonical_document(a) == canonical_document(b)


def test_to_dict_keeps_source_text():
    raw = {"Version": "2012-10-17", "Statement": [{"Sid": "x", "Effect": "Allow", "Action": "a:B", "Resource": "*"}]}
    assert PolicyDocument.from_json(raw).to_dict() == raw


@pytest.mark.parametrize("raw", [
    {"Effect": "Allow", "Resource": "*"},
    {"Effect": "Allow", "Action": "a:B", "NotAction": "a:C", "Resource": "*"},
    {"Effect": "Maybe", "Action": "a:B", "Resource": "*"},
    {"Effect": "Allow", "Action": "a:B", "Resource": "*", "NotResource": "x"},
])
def test_grammar_violations(raw):
    with pytest.raises(PolicyError):
        PolicyStatement.from_dict(raw)


def test_lint_flags_missing_resource():
    doc = PolicyDocument.from_json({"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "Action": "a:B"}]})
    assert doc.lint()


def test_invalid_json_is_a_policy_error():
    with pytest.raises(PolicyError):
        PolicyDocument.from_json("{not json")
