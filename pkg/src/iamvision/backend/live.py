"""Query-protocol transport for the real IAM and STS endpoints.

Requests are form-encoded, signed with :mod:`iamvision.backend.sigv4`, and
XML responses are folded into the same dict shapes the fixture backend
returns. The HTTP transport is injectable so the codec can be tested offline.
"""

from __future__ import annotations

import json
import logging
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from typing import Any, Callable, Mapping
from urllib.parse import unquote, urlencode

from iamvision.backend import sigv4
from iamvision.backend.base import OPERATIONS, SIMULATION_BATCH_LIMIT, ApiRequest, ApiResponse, Credential, Session
from iamvision.core.arn import parse_arn
from iamvision.errors import API_ERRORS, ApiError, BatchTooLarge, UnsupportedOperation

log = logging.getLogger(__name__)

Transport = Callable[[str, str, Mapping[str, str], bytes], tuple[int, bytes]]

IAM_ENDPOINT = "https://iam.amazonaws.com/"
STS_ENDPOINT = "https://sts.amazonaws.com/"
API_VERSIONS = {"iam": "2010-05-08", "sts": "2011-06-15"}

LIST_KEYS = frozenset({
    "Users", "Groups", "Roles", "PolicyNames", "AttachedPolicies", "Policies", "Versions", "PolicyUsers",
    "PolicyGroups", "PolicyRoles", "UserDetailList", "GroupDetailList", "RoleDetailList", "GroupList",
    "UserPolicyList", "GroupPolicyList", "RolePolicyList", "AttachedManagedPolicies", "PolicyVersionList",
    "EvaluationResults", "MatchedStatements", "ResourceSpecificResults",
})
BOOL_KEYS = frozenset({"IsTruncated", "IsDefaultVersion", "IsAttachable"})
DOCUMENT_KEYS = frozenset({"PolicyDocument", "Document", "AssumeRolePolicyDocument"})


def urllib_transport(method: str, url: str, headers: Mapping[str, str], body: bytes) -> tuple[int, bytes]:
    req = urllib.request.Request(url, data=body, headers=dict(headers), method=method)
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def flatten_params(params: Mapping[str, Any], prefix: str = "") -> dict[str, str]:
    """Query-protocol serialization: lists become ``Key.member.N``."""
    out: dict[str, str] = {}
    for key, value in params.items():
        name = f"{prefix}{key}"
        if isinstance(value, bool):
            out[name] = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            for i, item in enumerate(value, 1):
                out[f"{name}.member.{i}"] = str(item)
        elif isinstance(value, Mapping):
            out.update(flatten_params(value, f"{name}."))
        elif value is not None:
            out[name] = str(value)
    return out


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _convert(elem: ET.Element) -> Any:
    tag = _local(elem.tag)
    children = list(elem)
    if tag in LIST_KEYS:
        return [_convert(c) for c in children]
    if not children:
        text = (elem.text or "").strip()
        if tag in BOOL_KEYS:
            return text.lower() == "true"
        if tag in DOCUMENT_KEYS and text:
            return json.loads(unquote(text))
        return text
    return {_local(c.tag): _convert(c) for c in children}


def parse_response(operation: str, body: bytes) -> dict[str, Any]:
    root = ET.fromstring(body)
    if _local(root.tag) == "ErrorResponse":
        err = next(e for e in root.iter() if _local(e.tag) == "Error")
        fields = {_local(c.tag): (c.text or "") for c in err}
        raise API_ERRORS.get(fields.get("Code", ""), ApiError)(fields.get("Message", fields.get("Code", "")))
    for child in root:
        if _local(child.tag) == f"{operation}Result":
            return _convert(child)
    return {}


class LiveBackend:
    """Talks to AWS over HTTPS. Not exercised against the network by the test-suite."""

    def __init__(self, region: str = "us-east-1", transport: Transport | None = None,
                 iam_endpoint: str = IAM_ENDPOINT, sts_endpoint: str = STS_ENDPOINT) -> None:
        self.region = region
        self.transport = transport or urllib_transport
        self.endpoints = {"iam": iam_endpoint, "sts": sts_endpoint}

    def build_request(self, credential: Credential, request: ApiRequest) -> tuple[str, dict[str, str], bytes]:
        spec = OPERATIONS.get(request.operation)
        if spec is None:
            raise UnsupportedOperation(f"{request.operation} is not supported")
        form = {"Action": request.operation, "Version": API_VERSIONS[spec.service], **flatten_params(request.params)}
        body = urlencode(sorted(form.items())).encode()
        url = self.endpoints[spec.service]
        headers = {"Content-Type": "application/x-www-form-urlencoded; charset=utf-8"}
        signed = sigv4.sign("POST", url, headers, body, credential, self.region, spec.service)
        return url, signed.headers, body

    def call(self, session: Session, request: ApiRequest) -> ApiResponse:
        if request.operation == "SimulatePrincipalPolicy" and \
                len(request.params.get("ActionNames", [])) > SIMULATION_BATCH_LIMIT:
            raise BatchTooLarge(f"at most {SIMULATION_BATCH_LIMIT} actions per simulation request")
        url, headers, body = self.build_request(session.credential, request)
        status, raw = self.transport("POST", url, headers, body)
        log.debug("%s -> HTTP %s", request.operation, status)
        payload = parse_response(request.operation, raw)
        return ApiResponse(request.operation, payload, request.correlation_id or "")

    def session_for(self, credential: Credential) -> Session:
        probe = Session(credential, "", "", "", self)
        identity = probe.call("GetCallerIdentity")
        arn = parse_arn(identity["Arn"])
        principal = identity["Arn"]
        if arn.resource_type == "assumed-role":
            principal = f"arn:aws:iam::{arn.account_id}:role/{arn.name}"
        return Session(credential, principal, identity["Arn"], identity["Account"], self)

    def get_caller_identity(self, session: Session) -> dict[str, Any]:
        return session.call("GetCallerIdentity")

    def assume_role(self, session: Session, role_arn: str, session_name: str | None = None) -> Session:
        name = session_name or f"iamvision-{parse_arn(role_arn).name}"[:64]
        payload = session.call("AssumeRole", RoleArn=role_arn, RoleSessionName=name)
        creds = payload["Credentials"]
        credential = Credential(creds["AccessKeyId"], creds["SecretAccessKey"], creds["SessionToken"])
        return Session(credential, role_arn, payload["AssumedRoleUser"]["Arn"], session.account_id, self,
                       session.chain + (session.principal_arn,))

    def simulate_principal_policy(self, session: Session, target_arn: str, actions: list[str]) -> dict[str, Any]:
        return session.call("SimulatePrincipalPolicy", PolicySourceArn=target_arn, ActionNames=list(actions))

    def invoke_action(self, session: Session, action: str) -> dict[str, Any]:
        raise UnsupportedOperation("arbitrary service invocation is not implemented for the live transport")
