"""Power rails and data channels that exist only across a locked interface.

Two fixed rails cross the interface: the main 48 V rail rated 500 W and the
auxiliary 24 V rail rated 50 W. Two data channels cross it as well:
Ethernet for payload traffic and CAN for interface-to-interface interlock
coordination; the purpose split is enforced by channel kind. Contacts
repeat the base sequence three times around the ring, so mating at any
120-degree rotation slot lands every contact on a peer of the same role.

Power is ideal budget accounting: no voltage drop, no transients.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import (
    FramingError,
    NotConnectedError,
    ParameterError,
    UnreachableError,
)

RAIL_RATINGS_W = {48.0: 500.0, 24.0: 50.0}
RAIL_NAMES = {48.0: "main", 24.0: "auxiliary"}

CHANNEL_PURPOSES = {"ethernet": "payload", "can": "interlock"}
FRAME_LIMITS_B = {"can": 8, "ethernet": 1500}
DEFAULT_HOP_LATENCY_S = 0.001

BASE_CONTACTS = (
    "power_48v",
    "power_return",
    "power_24v",
    "can_high",
    "can_low",
    "ethernet_pair",
)


class PowerBus:
    """Allocation ledger for one rail; grants never exceed the rating."""

    def __init__(
        self,
        voltage_v: float = 48.0,
        actuator_only: bool = False,
        connected: bool = True,
    ):
        rating = RAIL_RATINGS_W.get(voltage_v)
        if rating is None:
            raise ParameterError(
                f"no {voltage_v} V rail; rails are {sorted(RAIL_RATINGS_W)} V"
            )
        self.name = RAIL_NAMES[voltage_v]
        self.voltage_v = voltage_v
        self.capacity_w = rating
        self.actuator_only = actuator_only
        self.connected = connected
        self._grants: dict[int, tuple[float, str]] = {}
        self._next_id = 1

    @property
    def allocated_w(self) -> float:
        return float(sum(w for w, _ in self._grants.values()))

    @property
    def available_w(self) -> float:
        return self.capacity_w - self.allocated_w

    def request_power(self, watts: float, purpose: str = "general") -> int | None:
        """Grant id when the connected rail can carry the load, else None."""
        if not self.connected:
            raise NotConnectedError(f"{self.name} bus is not connected")
        if not (math.isfinite(watts) and watts > 0.0):
            raise ParameterError("watts must be positive and finite")
        if self.actuator_only and purpose != "actuator":
            return None
        if self.allocated_w + watts > self.capacity_w:
            return None
        gid = self._next_id
        self._next_id += 1
        self._grants[gid] = (watts, purpose)
        return gid

    def release_power(self, grant_id: int) -> None:
        if not self.connected:
            raise NotConnectedError(f"{self.name} bus is not connected")
        if grant_id not in self._grants:
            raise ParameterError(f"unknown or already released grant {grant_id}")
        del self._grants[grant_id]

    def grants(self) -> dict[int, tuple[float, str]]:
        return dict(self._grants)


@dataclass
class DataChannel:
    """One crossing data link; its purpose is fixed by kind."""

    kind: str
    link_up: bool = True

    def __post_init__(self):
        if self.kind not in CHANNEL_PURPOSES:
            raise ParameterError(f"unknown channel kind {self.kind!r}")

    @property
    def purpose(self) -> str:
        return CHANNEL_PURPOSES[self.kind]


def contact_ring() -> tuple[str, ...]:
    """Full ring layout: the base sequence repeated for each 120-degree slot."""
    return BASE_CONTACTS * 3


def mated_contact_map(rotation_slot: int) -> tuple[tuple[str, str], ...]:
    """(local role, peer role) per contact when mated at a given slot.

    The layout's 3-fold repetition makes the mapping identical for every
    slot: rotating by whole slots is a symmetry of the ring.
    """
    if not isinstance(rotation_slot, int) or isinstance(rotation_slot, bool):
        raise ParameterError("rotation_slot must be an integer slot count")
    ring = contact_ring()
    n = len(ring)
    shift = (rotation_slot % 3) * len(BASE_CONTACTS)
    return tuple((ring[i], ring[(i + shift) % n]) for i in range(n))


class ChannelSet:
    """Everything that becomes usable across one locked interface."""

    def __init__(self, rotation_slot: int, aux_actuator_only: bool = False):
        self.rotation_slot = rotation_slot % 3
        self.buses: dict[float, PowerBus] = {
            48.0: PowerBus(48.0),
            24.0: PowerBus(24.0, actuator_only=aux_actuator_only),
        }
        self.channels: dict[str, DataChannel] = {
            "ethernet": DataChannel("ethernet"),
            "can": DataChannel("can"),
        }
        self.contact_map = mated_contact_map(rotation_slot)

    def disconnect(self) -> None:
        for bus in self.buses.values():
            bus.connected = False
        for ch in self.channels.values():
            ch.link_up = False


def connect(state, rotation_slot: int = 0, aux_actuator_only: bool = False) -> ChannelSet:
    """Bind buses and channels across an interface that has reached locked.

    state only needs a phase attribute (duck-typed to avoid a dependency on
    the FSM module). Any other phase refuses with NotConnectedError.
    """
    phase = getattr(state, "phase", None)
    if phase != "locked":
        raise NotConnectedError(f"channels require a locked interface, got {phase!r}")
    if not isinstance(rotation_slot, int) or isinstance(rotation_slot, bool):
        raise ParameterError("rotation_slot must be an integer slot count")
    return ChannelSet(rotation_slot, aux_actuator_only=aux_actuator_only)


def channel_available(state) -> bool:
    """Whether data may cross the interface in this FSM state."""
    return getattr(state, "phase", None) == "locked"


@dataclass(frozen=True)
class Frame:
    """One message on a crossing bus."""

    channel: str
    source: str
    dest: str
    payload: bytes
    timestamp_s: float = 0.0

    def validate(self) -> "Frame":
        limit = FRAME_LIMITS_B.get(self.channel)
        if limit is None:
            raise ParameterError(
                f"unknown channel {self.channel!r}; expected can or ethernet"
            )
        if not isinstance(self.payload, (bytes, bytearray)):
            raise ParameterError("payload must be bytes")
        if len(self.payload) > limit:
            raise FramingError(
                f"{self.channel} frame of {len(self.payload)} B exceeds {limit} B"
            )
        if not math.isfinite(self.timestamp_s) or self.timestamp_s < 0.0:
            raise ParameterError("timestamp_s must be finite and >= 0")
        return self

    @property
    def purpose(self) -> str:
        return CHANNEL_PURPOSES[self.channel]


@dataclass(frozen=True)
class Delivery:
    path: tuple[str, ...]
    hops: int
    latency_s: float


def send_frame(frame: Frame, topology, hop_latency_s: float = DEFAULT_HOP_LATENCY_S) -> Delivery:
    """Deliver a frame along the unique locked path between its endpoints.

    topology only needs a neighbors(node) method (and optionally has_node)
    whose adjacency already reflects link-up interfaces. Unknown endpoints
    raise NotConnectedError; a missing path raises UnreachableError.
    """
    frame.validate()
    if hop_latency_s < 0.0:
        raise ParameterError("hop_latency_s must be >= 0")
    src, dst = frame.source, frame.dest

    def known(node) -> bool:
        has = getattr(topology, "has_node", None)
        if has is not None:
            return bool(has(node))
        try:
            topology.neighbors(node)
            return True
        except KeyError:
            return False

    for node in (src, dst):
        if not known(node):
            raise NotConnectedError(f"node {node!r} is not on the network")
    if src == dst:
        return Delivery(path=(src,), hops=0, latency_s=0.0)

    parent = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nxt in topology.neighbors(cur):
            if nxt not in parent:
                parent[nxt] = cur
                if nxt == dst:
                    queue.clear()
                    break
                queue.append(nxt)
    if dst not in parent:
        raise UnreachableError(f"no linked path from {src!r} to {dst!r}")
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    hops = len(path) - 1
    return Delivery(path=tuple(path), hops=hops, latency_s=hops * hop_latency_s)
