"""Users, groups, per-group roles, sessions, and the permission floors.

A user's role is scoped to a group: the same person can contribute in one
group and merely read in another.  Collections belong to exactly one group,
so every permission check reduces to "what is this user's role in the
collection's owning group, and does it meet the floor for the action".

Credentials are hashed with scrypt (memory-hard, per-user salt); the chosen
parameters travel with each hash so they can be raised later without
invalidating old accounts.  Sessions are held in memory only, which means a
node restart logs everyone out.  All durable state goes through the same
JSONL event log pattern as the term store.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass, field
from datetime import timedelta
from enum import Enum
from typing import Callable, Optional

from .errors import (
    DuplicateName,
    DuplicateUser,
    InvalidCredentials,
    Unauthenticated,
    Unauthorized,
    UnknownGroup,
    UnknownUser,
)
from .model import (
    Visibility,
    format_timestamp,
    new_id,
    now_timestamp,
    parse_timestamp,
)
from .storage import EventLog


class Role(Enum):
    READER = "reader"
    CONTRIBUTOR = "contributor"
    APPROVER = "approver"
    ADMIN = "admin"

    @property
    def rank(self) -> int:
        return _RANKS[self]

    def at_least(self, floor: "Role") -> bool:
        return self.rank >= floor.rank


_RANKS = {Role.READER: 0, Role.CONTRIBUTOR: 1, Role.APPROVER: 2, Role.ADMIN: 3}


class Action(Enum):
    """Everything a caller can ask the node to do on a collection."""

    READ = "read"
    SEARCH = "search"
    EXPORT = "export"
    COMMENT = "comment"
    CREATE_COLLECTION = "create_collection"
    UPSERT_ENTRY = "upsert_entry"
    DELETE_ENTRY = "delete_entry"
    IMPORT = "import"
    APPROVE_ENTRY = "approve_entry"
    SET_VISIBILITY = "set_visibility"


ACTION_FLOORS = {
    Action.READ: Role.READER,
    Action.SEARCH: Role.READER,
    Action.EXPORT: Role.READER,
    Action.COMMENT: Role.READER,
    Action.CREATE_COLLECTION: Role.CONTRIBUTOR,
    Action.UPSERT_ENTRY: Role.CONTRIBUTOR,
    Action.DELETE_ENTRY: Role.CONTRIBUTOR,
    Action.IMPORT: Role.CONTRIBUTOR,
    Action.APPROVE_ENTRY: Role.APPROVER,
    Action.SET_VISIBILITY: Role.ADMIN,
}

# Read-class actions need no membership on public collections.  COMMENT is
# here because anyone who can read an entry may join its discussion; the
# store still insists on a signed-in author for posting.
READ_ACTIONS = frozenset({Action.READ, Action.SEARCH, Action.EXPORT, Action.COMMENT})


@dataclass(frozen=True)
class Actor:
    """Resolved identity attached to a request."""

    user_id: Optional[str]
    username: str
    memberships: tuple = ()  # of (group, Role)
    is_system: bool = False

    def role_in(self, group: str) -> Optional[Role]:
        if self.is_system:
            return Role.ADMIN
        for name, role in self.memberships:
            if name == group:
                return role
        return None

    @property
    def is_anonymous(self) -> bool:
        return self.user_id is None and not self.is_system


#: Unauthenticated requests act as this principal; it can only ever touch
#: public material.
ANONYMOUS = Actor(user_id=None, username="anonymous")

#: The operator at the local console (CLI) bypasses role floors entirely.
SYSTEM = Actor(user_id=None, username="system", is_system=True)


@dataclass
class User:
    id: str
    username: str
    display_name: str
    credential: dict
    memberships: dict = field(default_factory=dict)  # group -> Role
    created_at: str = ""

    def to_actor(self) -> Actor:
        pairs = tuple(sorted(self.memberships.items()))
        return Actor(user_id=self.id, username=self.username, memberships=pairs)


@dataclass
class Group:
    name: str
    created_at: str = ""


@dataclass
class Session:
    token: str
    user_id: str
    username: str
    expires_at: str


@dataclass(frozen=True)
class ScryptParams:
    log2_n: int = 14
    r: int = 8
    p: int = 1
    salt_len: int = 16
    key_len: int = 32


def hash_credential(password: str, params: ScryptParams) -> dict:
    salt = secrets.token_bytes(params.salt_len)
    key = hashlib.scrypt(
        password.encode("utf-8"),
        salt=salt,
        n=1 << params.log2_n,
        r=params.r,
        p=params.p,
        dklen=params.key_len,
    )
    return {
        "algo": "scrypt",
        "log2_n": params.log2_n,
        "r": params.r,
        "p": params.p,
        "salt": salt.hex(),
        "key": key.hex(),
    }


def verify_credential(password: str, credential: dict) -> bool:
    if credential.get("algo") != "scrypt":
        return False
    expected = bytes.fromhex(credential["key"])
    key = hashlib.scrypt(
        password.encode("utf-8"),
        salt=bytes.fromhex(credential["salt"]),
        n=1 << credential["log2_n"],
        r=credential["r"],
        p=credential["p"],
        dklen=len(expected),
    )
    return hmac.compare_digest(key, expected)


class Directory:
    """Event-sourced registry of users and groups plus live sessions."""

    def __init__(
        self,
        log: EventLog,
        *,
        scrypt_params: ScryptParams = ScryptParams(),
        session_ttl_hours: float = 12.0,
        clock: Callable[[], str] = now_timestamp,
    ):
        self.log = log
        self.params = scrypt_params
        self.session_ttl_hours = session_ttl_hours
        self.clock = clock
        self.users: dict[str, User] = {}
        self.groups: dict[str, Group] = {}
        self.sessions: dict[str, Session] = {}
        for event in log.replay():
            self._apply(event)

    # -- event plumbing -------------------------------------------------

    def _record(self, event: dict) -> None:
        self.log.append(event)
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "user_added":
            self.users[event["username"]] = User(
                id=event["id"],
                username=event["username"],
                display_name=event.get("display_name", ""),
                credential=event["credential"],
                created_at=event["at"],
            )
        elif kind == "credential_set":
            self.users[event["username"]].credential = event["credential"]
        elif kind == "group_added":
            self.groups[event["name"]] = Group(name=event["name"], created_at=event["at"])
        elif kind == "membership_set":
            role = Role(event["role"])
            self.users[event["username"]].memberships[event["group"]] = role
        elif kind == "membership_removed":
            self.users[event["username"]].memberships.pop(event["group"], None)
        else:
            raise ValueError(f"unknown directory event kind: {kind}")

    # -- user and group management (operator surface) -------------------

    def add_user(self, username: str, password: str, display_name: str = "") -> User:
        username = username.strip()
        if not username:
            raise UnknownUser("username must not be empty")
        if username in self.users:
            raise DuplicateUser(f"user already exists: {username}")
        self._record(
            {
                "kind": "user_added",
                "id": new_id(),
                "username": username,
                "display_name": display_name,
                "credential": hash_credential(password, self.params),
                "at": self.clock(),
            }
        )
        return self.users[username]

    def set_password(self, username: str, password: str) -> None:
        if username not in self.users:
            raise UnknownUser(username)
        self._record(
            {
                "kind": "credential_set",
                "username": username,
                "credential": hash_credential(password, self.params),
            }
        )

    def add_group(self, name: str) -> Group:
        name = name.strip()
        if not name:
            raise UnknownGroup("group name must not be empty")
        if name in self.groups:
            raise DuplicateName(f"group already exists: {name}")
        self._record({"kind": "group_added", "name": name, "at": self.clock()})
        return self.groups[name]

    def set_membership(self, username: str, group: str, role: Role) -> None:
        if username not in self.users:
            raise UnknownUser(username)
        if group not in self.groups:
            raise UnknownGroup(group)
        self._record(
            {"kind": "membership_set", "username": username, "group": group, "role": role.value}
        )

    def remove_membership(self, username: str, group: str) -> None:
        if username not in self.users:
            raise UnknownUser(username)
        self._record({"kind": "membership_removed", "username": username, "group": group})

    # -- authentication -------------------------------------------------

    def authenticate(self, username: str, password: str) -> Session:
        user = self.users.get(username)
        if user is None:
            # Burn comparable work so unknown names are not distinguishable
            # from wrong passwords by response timing.
            verify_credential(password, _DECOY_CREDENTIAL)
            raise InvalidCredentials("invalid username or password")
        if not verify_credential(password, user.credential):
            raise InvalidCredentials("invalid username or password")
        issued = parse_timestamp(self.clock())
        expires = issued + timedelta(hours=self.session_ttl_hours)
        session = Session(
            token=secrets.token_urlsafe(32),
            user_id=user.id,
            username=user.username,
            expires_at=format_timestamp(expires),
        )
        self.sessions[session.token] = session
        return session

    def resolve(self, token: Optional[str]) -> Actor:
        """Map a bearer token to an actor; None means the anonymous public."""
        if token is None:
            return ANONYMOUS
        session = self.sessions.get(token)
        if session is None:
            raise Unauthenticated("unknown or revoked token")
        if self.clock() >= session.expires_at:
            del self.sessions[session.token]
            raise Unauthenticated("session expired")
        user = self.users.get(session.username)
        if user is None:
            raise Unauthenticated("user no longer exists")
        return user.to_actor()

    def revoke(self, token: str) -> None:
        self.sessions.pop(token, None)

    # -- authorization --------------------------------------------------

    def can_read(self, actor: Actor, owner_group: str, visibility: Visibility) -> bool:
        if actor.is_system:
            return True
        if visibility is Visibility.PUBLIC:
            return True
        return actor.role_in(owner_group) is not None

    def authorize(
        self, actor: Actor, action: Action, owner_group: str, visibility: Visibility
    ) -> None:
        """Raise Unauthorized unless the actor meets the floor for action.

        Callers are expected to have already confirmed read access; this
        only answers the role-floor question.
        """
        if actor.is_system:
            return
        floor = ACTION_FLOORS[action]
        if action in READ_ACTIONS and visibility is Visibility.PUBLIC:
            return
        role = actor.role_in(owner_group)
        if role is None or not role.at_least(floor):
            raise Unauthorized(f"{action.value} requires role {floor.value} in group {owner_group}")

    def close(self) -> None:
        self.log.close()


# Fixed-parameter decoy used to equalize authentication timing for unknown
# usernames.  The key is random garbage; it never verifies.
_DECOY_CREDENTIAL = {
    "algo": "scrypt",
    "log2_n": ScryptParams().log2_n,
    "r": ScryptParams().r,
    "p": ScryptParams().p,
    "salt": "00" * 16,
    "key": "11" * 32,
}
