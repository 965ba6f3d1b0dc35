"""AWS Signature Version 4 request signing (header variant)."""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping
from urllib.parse import quote, urlsplit, parse_qsl

from iamvision.backend.base import Credential

ALGORITHM = "AWS4-HMAC-SHA256"


def _hmac(key: bytes, msg: str) -> bytes:
    return hmac.new(key, msg.encode("utf-8"), hashlib.sha256).digest()


def _sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def signing_key(secret: str, date: str, region: str, service: str) -> bytes:
    k = _hmac(f"AWS4{secret}".encode("utf-8"), date)
    k = _hmac(k, region)
    k = _hmac(k, service)
    return _hmac(k, "aws4_request")


def _uri_encode(text: str, safe: str = "-_.~") -> str:
    return quote(text, safe=safe)


def canonical_query(query: str) -> str:
    pairs = parse_qsl(query, keep_blank_values=True)
    encoded = sorted((_uri_encode(k), _uri_encode(v)) for k, v in pairs)
    return "&".join(f"{k}={v}" for k, v in encoded)


def canonical_uri(path: str) -> str:
    if not path:
        return "/"
    return _uri_encode(path, safe="/-_.~")


@dataclass(frozen=True)
class SignedRequest:
    headers: dict[str, str]
    canonical_request: str
    string_to_sign: str
    signature: str


def sign(
    method: str,
    url: str,
    headers: Mapping[str, str],
    body: bytes,
    credential: Credential,
    region: str,
    service: str,
    timestamp: datetime | None = None,
) -> SignedRequest:
    """Return ``headers`` extended with ``X-Amz-Date``, optional token and ``Authorization``."""
    now = (timestamp or datetime.now(timezone.utc)).astimezone(timezone.utc)
    amz_date = now.strftime("%Y%m%dT%H%M%SZ")
    date = amz_date[:8]
    parts = urlsplit(url)

    out = dict(headers)
    if not any(k.lower() == "host" for k in out):
        out["Host"] = parts.netloc
    out["X-Amz-Date"] = amz_date
    if credential.session_token:
        out["X-Amz-Security-Token"] = credential.session_token

    normalized: dict[str, str] = {}
    for k, v in out.items():
        normalized[k.lower().strip()] = " ".join(str(v).split())
    signed_headers = ";".join(sorted(normalized))
    canonical_headers = "".join(f"{k}:{normalized[k]}\n" for k in sorted(normalized))
    canonical = "\n".join([
        method.upper(),
        canonical_uri(parts.path),
        canonical_query(parts.query),
        canonical_headers,
        signed_headers,
        _sha256_hex(body),
    ])
    scope = f"{date}/{region}/{service}/aws4_request"
    to_sign = "\n".join([ALGORITHM, amz_date, scope, _sha256_hex(canonical.encode("utf-8"))])
    signature = hmac.new(signing_key(credential.secret_access_key, date, region, service),
                         to_sign.encode("utf-8"), hashlib.sha256).hexdigest()
    out["Authorization"] = (f"{ALGORITHM} Credential={credential.access_key_id}/{scope}, "
                            f"SignedHeaders={signed_headers}, Signature={signature}")
    return SignedRequest(out, canonical, to_sign, signature)
