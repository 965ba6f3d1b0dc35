from __future__ import annotations

import json
from urllib.parse import parse_qs, quote

import pytest

from iamvision.backend import Credential, LiveBackend
from iamvision.backend.live import flatten_params, parse_response
from iamvision.errors import AccessDenied, BatchTooLarge, UnsupportedOperation

NS = 'xmlns="https://iam.amazonaws.com/doc/2010-05-08/"'
TRUST = {"Version": "2012-10-17", "Statement": [{"Effect": "Allow", "Principal": {"AWS": "arn:aws:iam::123456789012:user/u"},
                                                  "Action": "sts:AssumeRole"}]}

RESPONSES = {
    "GetCallerIdentity": """<GetCallerIdentityResponse xmlns="https://sts.amazonaws.com/doc/2011-06-15/">
  <GetCallerIdentityResult><Arn>arn:aws:iam::123456789012:user/u</Arn><UserId>AIDA1</UserId>
  <Account>123456789012</Account></GetCallerIdentityResult></GetCallerIdentityResponse>""",
    "ListRoles": f"""<ListRolesResponse {NS}><ListRolesResult><IsTruncated>false</IsTruncated><Roles>
  <member><RoleName>r</RoleName><Arn>arn:aws:iam::123456789012:role/r</Arn>
  <AssumeRolePolicyDocument>{quote(json.dumps(TRUST))}</AssumeRolePolicyDocument></member>
  </Roles></ListRolesResult></ListRolesResponse>""",
    "ListUserPolicies": f"""<ErrorResponse {NS}><Error><Type>Sender</Type><Code>AccessDenied</Code>
  <Message>nope</Message></Error><RequestId>x</RequestId></ErrorResponse>""",
}


class FakeTransport:
    def __init__(self):
        self.requests = []

    def __call__(self, method, url, headers, body):
        form = {k: v[0] for k, v in parse_qs(body.decode()).items()}
        self.requests.append((method, url, dict(headers), form))
        return 200, RESPONSES[form["Action"]].encode()


@pytest.fixture
def live():
    transport = FakeTransport()
    return LiveBackend(transport=transport), transport


def test_session_and_list_roles(live):
    backend, transport = live
    session = backend.session_for(Credential("AKIA1", "secret"))
    assert session.principal_arn == "arn:aws:iam::123456789012:user/u"
    assert session.account_id == "123456789012"
    roles = session.list_all("ListRoles", "Roles")
    assert roles[0]["RoleName"] == "r"
    assert roles[0]["AssumeRolePolicyDocument"] == TRUST
    method, url, headers, form = transport.requests[-1]
    assert (method, url) == ("POST", "https://iam.amazonaws.com/")
    assert form["Action"] == "ListRoles" and form["Version"] == "2010-05-08"
    assert headers["Authorization"].startswith("AWS4-HMAC-SHA256 Credential=AKIA1/")
    assert transport.requests[0][1] == "https://sts.amazonaws.com/"


def test_error_response_maps_to_exception(live):
    backend, _ = live
    session = backend.session_for(Credential("AKIA1", "secret"))
    with pytest.raises(AccessDenied):
        session.call("ListUserPolicies", UserName="u")


def test_batch_limit_is_local(live):
    backend, transport = live
    session = backend.session_for(Credential("AKIA1", "secret"))
    sent = len(transport.requests)
    with pytest.raises(BatchTooLarge):
        backend.simulate_principal_policy(session, session.principal_arn, ["iam:ListRoles"] * 101)
    assert len(transport.requests) == sent


def test_unknown_operation_and_invoke(live):
    backend, _ = live
    session = backend.session_for(Credential("AKIA1", "secret"))
    with pytest.raises(UnsupportedOperation):
        session.call("DeleteEverything")
    with pytest.raises(UnsupportedOperation):
        backend.invoke_action(session, "s3:ListAllMyBuckets")


def test_flatten_params():
    assert flatten_params({"ActionNames": ["a", "b"], "OnlyAttached": True, "Marker": None}) == {
        "ActionNames.member.1": "a", "ActionNames.member.2": "b", "OnlyAttached": "true"}


def test_parse_versions_bool_and_document():
    doc = {"Version": "2012-10-17", "Statement": []}
    body = f"""<GetPolicyVersionResponse {NS}><GetPolicyVersionResult><PolicyVersion>
      <Document>{quote(json.dumps(doc))}</Document><VersionId>v2</VersionId>
      <IsDefaultVersion>true</IsDefaultVersion></PolicyVersion></GetPolicyVersionResult></GetPolicyVersionResponse>"""
    out = parse_response("GetPolicyVersion", body.encode())
    assert out == {"PolicyVersion": {"Document": doc, "VersionId": "v2", "IsDefaultVersion": True}}
