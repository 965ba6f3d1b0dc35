"""Amazon Resource Name parsing and rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass

from iamvision.errors import MalformedArn

_ACCOUNT = re.compile(r"^(\d{12}|aws)$")


@dataclass(frozen=True)
class Arn:
    partition: str
    service: str
    region: str
    account_id: str
    resource_type: str
    resource_name: str = ""
    separator: str = "/"

    def __str__(self) -> str:
        resource = self.resource_type
        if self.resource_name:
            resource = f"{resource}{self.separator}{self.resource_name}"
        return f"arn:{self.partition}:{self.service}:{self.region}:{self.account_id}:{resource}"

    @property
    def name(self) -> str:
        """Last path segment of the resource, e.g. the user name for ``user/dev/alice``."""
        if self.resource_type == "assumed-role":
            return self.resource_name.split("/", 1)[0]
        return self.resource_name.rsplit("/", 1)[-1]

    @property
    def path(self) -> str:
        parts = self.resource_name.split("/")
        return "/" + "".join(p + "/" for p in parts[:-1])

    @property
    def is_aws_managed(self) -> bool:
        return self.account_id == "aws"


def parse_arn(text: str) -> Arn:
    if not isinstance(text, str):
        raise MalformedArn(f"ARN must be a string, got {type(text).__name__}")
    parts = text.split(":", 5)
    if len(parts) != 6 or parts[0] != "arn":
        raise MalformedArn(f"not an ARN: {text!r}")
    _, partition, service, region, account, resource = parts
    if not partition or not service:
        raise MalformedArn(f"missing partition or service: {text!r}")
    if not _ACCOUNT.match(account):
        raise MalformedArn(f"account id must be 12 digits or 'aws': {text!r}")
    if not resource:
        raise MalformedArn(f"missing resource: {text!r}")
    cut = [i for i in (resource.find("/"), resource.find(":")) if i >= 0]
    if not cut:
        return Arn(partition, service, region, account, resource)
    i = min(cut)
    return Arn(partition, service, region, account, resource[:i], resource[i + 1:], resource[i])


def iam_arn(account_id: str, kind: str, name: str, path: str = "/") -> str:
    """Render an IAM ARN for a user, group, role or customer policy."""
    return f"arn:aws:iam::{account_id}:{kind}{path}{name}"


def account_root(account_id: str) -> str:
    return f"arn:aws:iam::{account_id}:root"
