"""Policy grammar, evaluation and the IAM account model."""

from iamvision.core.arn import Arn, account_root, iam_arn, parse_arn
from iamvision.core.evaluate import (
    Decision,
    action_matches,
    allowed_actions,
    evaluate,
    pattern_match,
    principal_admits,
    resource_matches,
    trust_admits,
)
from iamvision.core.model import (
    Account,
    IamGroup,
    IamRole,
    IamUser,
    ManagedPolicy,
    SourcedStatement,
    effective_statements,
    sourced_statements,
)
from iamvision.core.policy import PolicyDocument, PolicyStatement, canonical_document, documents_equal

__all__ = [
    "Account", "Arn", "Decision", "IamGroup", "IamRole", "IamUser", "ManagedPolicy", "PolicyDocument",
    "PolicyStatement", "SourcedStatement", "account_root", "action_matches", "allowed_actions", "canonical_document",
    "documents_equal", "effective_statements", "evaluate", "iam_arn", "parse_arn", "pattern_match",
    "principal_admits", "resource_matches", "sourced_statements", "trust_admits",
]
