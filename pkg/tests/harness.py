"""Shared builders for multi-module tests: a node in a box."""

from termnode.accounts import Directory, Role, ScryptParams
from termnode.model import CollectionMeta, Visibility
from termnode.storage import EventLog
from termnode.store import Store

FAST_SCRYPT = ScryptParams(log2_n=4)

ROLE_USERS = [
    ("ron", Role.READER),
    ("cora", Role.CONTRIBUTOR),
    ("abe", Role.APPROVER),
    ("ada", Role.ADMIN),
]


class NodeBox:
    """One directory + store pair with a standard cast of users."""

    def __init__(self, root, name="node", group="terminology", clock=None):
        self.root = root
        self.group = group
        kwargs = {"scrypt_params": FAST_SCRYPT}
        if clock is not None:
            kwargs["clock"] = clock
        self.directory = Directory(EventLog(str(root / f"{name}-accounts.jsonl")), **kwargs)
        self.directory.add_group(group)
        for username, role in ROLE_USERS:
            self.directory.add_user(username, "pw")
            self.directory.set_membership(username, group, role)
        store_kwargs = {}
        if clock is not None:
            store_kwargs["clock"] = clock
        self.store = Store(
            EventLog(str(root / f"{name}-store.jsonl")), self.directory, **store_kwargs
        )

    def actor(self, username):
        return self.directory.users[username].to_actor()

    def collection(self, name="Computing", public=False):
        cid = self.store.create_collection(CollectionMeta(name=name), self.group, self.actor("cora"))
        if public:
            self.store.set_visibility(cid, Visibility.PUBLIC, self.actor("ada"))
        return cid

    def close(self):
        self.store.close()
        self.directory.close()
