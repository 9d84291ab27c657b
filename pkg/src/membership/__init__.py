"""
Group membership over epidemic gossip.
"""

from membership.view import (
    MemberEntry,
    MembershipParams,
    MembershipView,
    gossip_view,
    join,
    on_view,
    pick_member,
    suspect_failures,
)

__all__ = [
    "MemberEntry",
    "MembershipParams",
    "MembershipView",
    "gossip_view",
    "join",
    "on_view",
    "pick_member",
    "suspect_failures",
]
