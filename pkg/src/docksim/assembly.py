"""Docked-module assemblies: kinematics, interface loads, power routing.

Modules expose ports; docking two ports runs the capture-feasibility check
and, when it passes, drives a fresh coupling FSM through approach, capture
and locking, leaving the new interface Locked with its power rails and data
channels bound. Port frames point +z outward along the approach axis, so a
mate relates world poses by T_wb = T_wa * P_a * RotX(pi) * P_b^-1.

Structure, power and data all flow over Locked interfaces only: a docked
but unlocked edge occupies its ports and nothing else.

Interface loads come from rigid quasi-static free-body analysis. That is
well-posed only when the locked subgraph carrying load is a tree with
exactly one anchor: loaded cycles and multi-anchored loaded components are
statically indeterminate in rigid theory and are rejected rather than
approximated. Each interface load is reported both in world frame and in
the interface frame (the parent-side port frame), where it is screened
against the interface load envelope with that edge's dual-lock state.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bus import ChannelSet, connect
from .coupling import CouplingConfig, Event, InterfaceState, step
from .errors import (
    IndeterminateError,
    NotConnectedError,
    ParameterError,
    PortInUseError,
    UnreachableError,
    UnsupportedError,
)
from .face import REFERENCE_PROFILE, FaceProfile, Misalignment
from .loads import LoadEnvelope, LoadReport, Wrench, check_load

MODULE_KINDS = ("joint", "link", "end_effector", "facility_module", "truss_node")

GRAVITY_M_S2 = (0.0, 0.0, -9.81)

# exact half-turn about x: no trig roundoff in the mate relation
_ROTX_PI = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

PortRef = tuple[str, str]  # (module_id, port_name)
EdgeKey = tuple[PortRef, PortRef]


class Pose:
    """Immutable rigid transform (4x4 homogeneous)."""

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ParameterError("pose matrix must be 4x4")
        if not np.all(np.isfinite(m)) or not np.allclose(m[3], (0.0, 0.0, 0.0, 1.0)):
            raise ParameterError("pose matrix is not a homogeneous transform")
        r = m[:3, :3]
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
            raise ParameterError("pose rotation block is not orthonormal")
        m.flags.writeable = False
        self._m = m

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(4))

    @classmethod
    def from_xyz_rpy(cls, x=0.0, y=0.0, z=0.0, roll=0.0, pitch=0.0, yaw=0.0) -> "Pose":
        """Translation plus ZYX yaw-pitch-roll angles in radians."""
        cr, sr = math.cos(roll), math.sin(roll)
        cp, sp = math.cos(pitch), math.sin(pitch)
        cy, sy = math.cos(yaw), math.sin(yaw)
        rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
        ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
        rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
        m = np.eye(4)
        m[:3, :3] = rz @ ry @ rx
        m[:3, 3] = (x, y, z)
        return cls(m)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def translation(self) -> np.ndarray:
        return self._m[:3, 3]

    def inverse(self) -> "Pose":
        r = self._m[:3, :3]
        m = np.eye(4)
        m[:3, :3] = r.T
        m[:3, 3] = -r.T @ self._m[:3, 3]
        return Pose(m)

    def __matmul__(self, other: "Pose") -> "Pose":
        return Pose(self._m @ other._m)

    def almost_equal(self, other: "Pose", tol: float = 1e-9) -> bool:
        return bool(np.allclose(self._m, other._m, atol=tol))

    def __repr__(self) -> str:
        t = self.translation
        return f"Pose(t=({t[0]:.4g}, {t[1]:.4g}, {t[2]:.4g}))"


@dataclass(frozen=True)
class Port:
    """Docking port in the module frame; +z points outward."""

    name: str
    pose: Pose


@dataclass(frozen=True)
class Module:
    module_id: str
    kind: str
    ports: tuple[Port, ...]
    mass_kg: float = 1.0
    grounded: bool = False
    world_pose: Pose | None = None  # anchor pose; required iff grounded

    def validate(self) -> "Module":
        if not self.module_id:
            raise ParameterError("module_id must be non-empty")
        if self.kind not in MODULE_KINDS:
            raise ParameterError(f"kind must be one of {MODULE_KINDS}, got {self.kind!r}")
        if self.mass_kg < 0.0 or not math.isfinite(self.mass_kg):
            raise ParameterError("mass_kg must be finite and >= 0")
        names = [p.name for p in self.ports]
        if len(set(names)) != len(names):
            raise ParameterError("port names must be unique per module")
        if self.grounded != (self.world_pose is not None):
            raise ParameterError("world_pose must be given exactly for grounded modules")
        return self

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise ParameterError(f"module {self.module_id!r} has no port {name!r}")


def mate_world_pose(t_wa: Pose, port_a: Port, port_b: Port) -> Pose:
    """World pose of module b docked to module a: T_wa * P_a * RotX(pi) * P_b^-1."""
    return Pose(t_wa.matrix @ port_a.pose.matrix @ _ROTX_PI @ port_b.pose.inverse().matrix)


def _wrench_from_vecs(f, m) -> Wrench:
    return Wrench(
        fx_n=float(f[0]), fy_n=float(f[1]), fz_n=float(f[2]),
        mx_nm=float(m[0]), my_nm=float(m[1]), mz_nm=float(m[2]),
    )


class EdgeInfo:
    """Per-interface state: coupling FSM, face profile pair, channels."""

    def __init__(self, state: InterfaceState, config: CouplingConfig, profile: FaceProfile):
        self.state = state
        self.config = config
        self.profile = profile
        self.channels: ChannelSet | None = None

    @property
    def locked(self) -> bool:
        return self.state.phase == "locked"

    @property
    def dual_lock(self) -> bool:
        return self.state.lock_capacity_factor > 1.0


@dataclass(frozen=True)
class DockReport:
    """Outcome of a dock attempt.

    Rejections come from the capture-feasibility check: the graph is left
    unchanged and reason says why.
    """

    accepted: bool
    edge: EdgeKey | None = None
    state: InterfaceState | None = None
    reason: str = ""


@dataclass(frozen=True)
class StepOutcome:
    index: int
    op: tuple
    applied: bool
    detail: str = ""
    stranded: tuple[str, ...] = ()


@dataclass(frozen=True)
class ReconfigureReport:
    """Per-step outcomes of a reconfiguration plan.

    Plans are not atomic: an aborted plan leaves every step before the
    violation applied (aborted_index is that step's position).
    """

    steps: tuple[StepOutcome, ...]
    completed: bool
    aborted_index: int | None = None


@dataclass(frozen=True)
class WrenchResult:
    """Interface loads keyed (parent end, child end), parent nearer ground.

    interface_loads are world-frame wrenches about the interface point:
    the load the child-side subtree hangs on the interface. local_loads
    express the same wrench in the parent-side port frame, and load_checks
    screens each one against the load envelope with that edge's dual-lock
    state. ground_reactions hold each anchor's world-frame reaction about
    its module origin.
    """

    interface_loads: dict[EdgeKey, Wrench]
    local_loads: dict[EdgeKey, Wrench]
    load_checks: dict[EdgeKey, LoadReport]
    ground_reactions: dict[str, Wrench]


@dataclass(frozen=True)
class PowerRoute:
    rail_v: float
    watts: float
    path: tuple[str, ...]
    grants: tuple[tuple[EdgeKey, int], ...]


class ModuleGraph:
    """Mutable assembly of docked modules."""

    def __init__(self):
        self._modules: dict[str, Module] = {}
        self._peers: dict[PortRef, PortRef] = {}
        self._edges: dict[frozenset, EdgeInfo] = {}

    # --- construction -----------------------------------------------------

    def add_module(self, module: Module) -> None:
        module.validate()
        if module.module_id in self._modules:
            raise ParameterError(f"duplicate module id {module.module_id!r}")
        self._modules[module.module_id] = module

    def module(self, module_id: str) -> Module:
        mod = self._modules.get(module_id)
        if mod is None:
            raise ParameterError(f"no module {module_id!r}")
        return mod

    def modules(self) -> tuple[str, ...]:
        return tuple(self._modules)

    def dock(
        self,
        id_a: str,
        port_a: str,
        id_b: str,
        port_b: str,
        misalignment: Misalignment | None = None,
        profile: FaceProfile | None = None,
        config: CouplingConfig | None = None,
    ) -> DockReport:
        """Attempt a mate; on success the new interface ends up Locked.

        Precondition violations (unknown module or port, port already in
        use, self-dock) raise. An infeasible approach misalignment is a
        rejection, not an error: the graph is unchanged and the report
        carries the reason.
        """
        a, b = self.module(id_a), self.module(id_b)
        a.port(port_a), b.port(port_b)
        if id_a == id_b:
            raise ParameterError("a module cannot dock to itself")
        ref_a, ref_b = (id_a, port_a), (id_b, port_b)
        for ref in (ref_a, ref_b):
            if ref in self._peers:
                raise PortInUseError(f"port {ref} is already docked to {self._peers[ref]}")

        mis = misalignment if misalignment is not None else Misalignment()
        prof = profile if profile is not None else REFERENCE_PROFILE
        cfg = config if config is not None else CouplingConfig()

        # fresh FSM; approach performs the capture-feasibility check
        state = step(InterfaceState(), Event("approach", misalignment=mis), 0.0, cfg, prof)
        if state.phase != "capturing":
            return DockReport(
                accepted=False,
                reason="approach misalignment is outside the capture envelope",
            )
        state = step(state, Event("tick", dt_s=1.0), 1.0, cfg, prof)  # -> aligned
        state = step(state, Event("start_lock"), 0.0, cfg, prof)
        while state.phase == "locking":
            state = step(state, Event("tick", dt_s=1.0), 1.0, cfg, prof)

        info = EdgeInfo(state, cfg, prof)
        info.channels = connect(state, rotation_slot=0)
        self._peers[ref_a] = ref_b
        self._peers[ref_b] = ref_a
        self._edges[frozenset((ref_a, ref_b))] = info
        edge = (ref_a, ref_b) if ref_a < ref_b else (ref_b, ref_a)
        return DockReport(accepted=True, edge=edge, state=state)

    def undock(self, module_id: str, port_name: str) -> None:
        """Remove an interface; its channels drop and its grants vanish."""
        ref = (module_id, port_name)
        peer = self._peers.get(ref)
        if peer is None:
            raise NotConnectedError(f"port {ref} is not docked")
        info = self._edges[frozenset((ref, peer))]
        if info.channels is not None:
            info.channels.disconnect()
        del self._peers[ref]
        del self._peers[peer]
        del self._edges[frozenset((ref, peer))]

    def unlock(self, module_id: str, port_name: str) -> InterfaceState:
        """Drive a locked interface back to aligned; channels drop."""
        ref = (module_id, port_name)
        peer = self._peers.get(ref)
        if peer is None:
            raise NotConnectedError(f"port {ref} is not docked")
        info = self._edges[frozenset((ref, peer))]
        state = step(info.state, Event("start_unlock"), 0.0, info.config, info.profile)
        while state.phase == "unlocking":
            state = step(state, Event("tick", dt_s=1.0), 1.0, info.config, info.profile)
        info.state = state
        if info.channels is not None:
            info.channels.disconnect()
            info.channels = None
        return state

    def edges(self) -> tuple[EdgeKey, ...]:
        out = []
        for ref, peer in self._peers.items():
            if ref < peer:
                out.append((ref, peer))
        return tuple(sorted(out))

    def locked_edges(self) -> tuple[EdgeKey, ...]:
        return tuple(e for e in self.edges() if self._edges[frozenset(e)].locked)

    def edge_info(self, edge: EdgeKey) -> EdgeInfo:
        info = self._edges.get(frozenset(edge))
        if info is None:
            raise NotConnectedError(f"interface {edge} is not docked")
        return info

    def interface_state(self, module_id: str, port_name: str) -> InterfaceState:
        ref = (module_id, port_name)
        peer = self._peers.get(ref)
        if peer is None:
            raise NotConnectedError(f"port {ref} is not docked")
        return self._edges[frozenset((ref, peer))].state

    # --- topology (duck-typed for frame transport) -------------------------

    def has_node(self, module_id: str) -> bool:
        return module_id in self._modules

    def neighbors(self, module_id: str) -> tuple[str, ...]:
        """Modules reachable over Locked interfaces only."""
        if module_id not in self._modules:
            raise KeyError(module_id)
        out = []
        for (mid, pname), (pid, _) in self._peers.items():
            if mid != module_id:
                continue
            ref = (mid, pname)
            if self._edges[frozenset((ref, self._peers[ref]))].locked:
                out.append(pid)
        return tuple(sorted(set(out)))

    def _components(self) -> list[set[str]]:
        seen: set[str] = set()
        comps = []
        for mid in self._modules:
            if mid in seen:
                continue
            comp = {mid}
            queue = deque([mid])
            while queue:
                for nxt in self.neighbors(queue.popleft()):
                    if nxt not in comp:
                        comp.add(nxt)
                        queue.append(nxt)
            seen |= comp
            comps.append(comp)
        return comps

    def _locked_peer_items(self) -> Iterable[tuple[PortRef, PortRef]]:
        for ref, peer in self._peers.items():
            if self._edges[frozenset((ref, peer))].locked:
                yield ref, peer

    # --- kinematics ---------------------------------------------------------

    def world_poses(self) -> dict[str, Pose]:
        """Propagate poses from anchors; loop closures must agree to 1e-6."""
        poses: dict[str, Pose] = {}
        for comp in self._components():
            anchors = [m for m in comp if self._modules[m].grounded]
            if not anchors:
                continue
            root = min(anchors)
            poses[root] = self._modules[root].world_pose
            queue = deque([root])
            visited = {root}
            while queue:
                cur = queue.popleft()
                for (mid, pname), (pid, ppname) in list(self._locked_peer_items()):
                    if mid != cur:
                        continue
                    t = mate_world_pose(
                        poses[cur],
                        self._modules[cur].port(pname),
                        self._modules[pid].port(ppname),
                    )
                    if pid in visited:
                        if not poses[pid].almost_equal(t, tol=1e-6):
                            raise IndeterminateError(
                                f"loop through {pid!r} closes with inconsistent geometry"
                            )
                        continue
                    declared = self._modules[pid]
                    if declared.grounded and not declared.world_pose.almost_equal(t, 1e-6):
                        raise IndeterminateError(
                            f"anchored module {pid!r} disagrees with the docked chain"
                        )
                    poses[pid] = t
                    visited.add(pid)
                    queue.append(pid)
        return poses

    # --- statics -------------------------------------------------------------

    def propagate_wrench(
        self,
        external: dict[str, Wrench] | None = None,
        gravity: tuple[float, float, float] | None = None,
        envelope: LoadEnvelope | None = None,
    ) -> WrenchResult:
        """Interface loads under external wrenches (applied at module origins).

        Every loaded component must be a Locked tree with exactly one
        anchor: loaded cycles and multi-anchored loaded components raise
        IndeterminateError, a loaded component with no anchor raises
        UnsupportedError. Unloaded components carry zero at every edge.
        Each edge wrench is re-expressed in the interface frame and checked
        against the load envelope with that edge's dual-lock state.
        """
        external = dict(external or {})
        for mid in external:
            self.module(mid)
            external[mid].validate()

        poses = self.world_poses() if any(
            self._modules[m].grounded for m in self._modules
        ) else {}

        loads: dict[EdgeKey, Wrench] = {}
        local: dict[EdgeKey, Wrench] = {}
        reactions: dict[str, Wrench] = {}

        for comp in self._components():
            comp_edges = [e for e in self.locked_edges() if e[0][0] in comp]
            anchors = [m for m in comp if self._modules[m].grounded]
            loaded = any(
                mid in external and any(
                    v != 0.0 for v in (
                        external[mid].fx_n, external[mid].fy_n, external[mid].fz_n,
                        external[mid].mx_nm, external[mid].my_nm, external[mid].mz_nm,
                    )
                )
                for mid in comp
            ) or (
                gravity is not None and any(self._modules[m].mass_kg > 0.0 for m in comp)
            )
            if not loaded:
                for edge in comp_edges:
                    loads[edge] = Wrench()
                    local[edge] = Wrench()
                continue
            if len(comp_edges) > len(comp) - 1:
                raise IndeterminateError(
                    f"loaded component {sorted(comp)} contains a locked cycle"
                )
            if not anchors:
                raise UnsupportedError(
                    f"loaded component {sorted(comp)} has no anchored module"
                )
            if len(anchors) > 1:
                raise IndeterminateError(
                    f"loaded component {sorted(comp)} is anchored {len(anchors)} times"
                )
            self._propagate_component(
                comp, anchors[0], external, gravity, poses, loads, local, reactions
            )

        checks = {
            edge: check_load(
                local[edge],
                envelope=envelope,
                dual_lock=self._edges[frozenset(edge)].dual_lock,
            )
            for edge in loads
        }
        return WrenchResult(
            interface_loads=loads,
            local_loads=local,
            load_checks=checks,
            ground_reactions=reactions,
        )

    def _module_load(self, mid: str, external, gravity, poses) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(force, moment, application point) for one module, world frame."""
        w = external.get(mid, Wrench())
        f = np.array([w.fx_n, w.fy_n, w.fz_n])
        m = np.array([w.mx_nm, w.my_nm, w.mz_nm])
        if gravity is not None:
            f = f + self._modules[mid].mass_kg * np.array(gravity)
        return f, m, poses[mid].translation

    def _propagate_component(self, comp, root, external, gravity, poses, loads, local, reactions):
        # rooted tree structure over locked interfaces
        parent: dict[str, tuple[str, PortRef, PortRef] | None] = {root: None}
        order = [root]
        queue = deque([root])
        while queue:
            cur = queue.popleft()
            for (mid, pname), (pid, ppname) in self._locked_peer_items():
                if mid != cur or pid in parent:
                    continue
                parent[pid] = (cur, (cur, pname), (pid, ppname))
                order.append(pid)
                queue.append(pid)

        # bottom-up subtree sums: force, and moment about each edge point
        sub_f: dict[str, np.ndarray] = {}
        sub_m: dict[str, np.ndarray] = {}  # about the module's parent-edge point
        for mid in reversed(order):
            f, m, p = self._module_load(mid, external, gravity, poses)
            if parent[mid] is not None:
                _, (pmid, pport), _ = parent[mid]
                edge_pt = (poses[pmid] @ self._modules[pmid].port(pport).pose).translation
            else:
                edge_pt = poses[mid].translation
            total_f = f.copy()
            total_m = m + np.cross(p - edge_pt, f)
            for cid, link in parent.items():
                if link is None or link[0] != mid:
                    continue
                _, (_, cpname), _ = link
                child_pt = (poses[mid] @ self._modules[mid].port(cpname).pose).translation
                total_f += sub_f[cid]
                total_m += sub_m[cid] + np.cross(child_pt - edge_pt, sub_f[cid])
            sub_f[mid] = total_f
            sub_m[mid] = total_m
            if parent[mid] is not None:
                _, pref, cref = parent[mid]
                loads[(pref, cref)] = _wrench_from_vecs(total_f, total_m)
                # same wrench seen in the interface frame (parent-side port)
                pmid, pport = pref
                rot = (poses[pmid] @ self._modules[pmid].port(pport).pose).matrix[:3, :3]
                local[(pref, cref)] = _wrench_from_vecs(rot.T @ total_f, rot.T @ total_m)
        reactions[root] = _wrench_from_vecs(-sub_f[root], -sub_m[root])

    # --- power routing --------------------------------------------------------

    def route_power(
        self, src: str, dst: str, watts: float, rail_v: float = 48.0, purpose: str = "general"
    ) -> PowerRoute | None:
        """Reserve watts on every interface from src to dst, atomically.

        The path runs over Locked interfaces. Returns None (and leaves no
        partial reservation) when any interface on the path lacks headroom.
        No locked path raises UnreachableError.
        """
        self.module(src)
        self.module(dst)
        if rail_v not in (48.0, 24.0):
            raise ParameterError("rail_v must be 48.0 or 24.0")
        path = self._shortest_path(src, dst)
        if path is None:
            raise UnreachableError(f"no locked path from {src!r} to {dst!r}")
        edge_keys = []
        for a, b in zip(path, path[1:]):
            edge_keys.append(self._edge_between(a, b))
        grants: list[tuple[EdgeKey, int]] = []
        for ek in edge_keys:
            bus = self._edges[frozenset(ek)].channels.buses[rail_v]
            gid = bus.request_power(watts, purpose)
            if gid is None:
                for gek, ggid in grants:
                    self._edges[frozenset(gek)].channels.buses[rail_v].release_power(ggid)
                return None
            grants.append((ek, gid))
        return PowerRoute(rail_v=rail_v, watts=watts, path=tuple(path), grants=tuple(grants))

    def release_route(self, route: PowerRoute) -> None:
        for ek, gid in route.grants:
            info = self._edges.get(frozenset(ek))
            if info is None or info.channels is None:
                raise NotConnectedError(f"interface {ek} is no longer connected")
            info.channels.buses[route.rail_v].release_power(gid)

    def interface_allocation_w(self, edge: EdgeKey, rail_v: float = 48.0) -> float:
        info = self._edges.get(frozenset(edge))
        if info is None:
            raise NotConnectedError(f"interface {edge} is not docked")
        if info.channels is None:
            return 0.0
        return info.channels.buses[rail_v].allocated_w

    def power_allocations(self) -> tuple[tuple[EdgeKey, float, float], ...]:
        """(edge, rail_v, allocated_W) rows for every connected interface."""
        rows = []
        for edge in self.edges():
            info = self._edges[frozenset(edge)]
            if info.channels is None:
                continue
            for rail_v in sorted(info.channels.buses, reverse=True):
                rows.append((edge, rail_v, info.channels.buses[rail_v].allocated_w))
        return tuple(rows)

    def _shortest_path(self, src: str, dst: str) -> list[str] | None:
        if src == dst:
            return [src]
        parent = {src: None}
        queue = deque([src])
        while queue:
            cur = queue.popleft()
            for nxt in self.neighbors(cur):
                if nxt not in parent:
                    parent[nxt] = cur
                    if nxt == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(parent[path[-1]])
                        path.reverse()
                        return path
                    queue.append(nxt)
        return None

    def _edge_between(self, id_a: str, id_b: str) -> EdgeKey:
        for (mid, pname), (pid, ppname) in self._peers.items():
            if mid == id_a and pid == id_b:
                ref_a, ref_b = (mid, pname), (pid, ppname)
                return (ref_a, ref_b) if ref_a < ref_b else (ref_b, ref_a)
        raise NotConnectedError(f"{id_a!r} and {id_b!r} share no interface")

    # --- reconfiguration --------------------------------------------------------

    def reconfigure(self, ops: list[tuple] | tuple[tuple, ...]) -> ReconfigureReport:
        """Execute dock/undock steps sequentially with per-step safety checks.

        Each op is ("dock", id_a, port_a, id_b, port_b[, misalignment]) or
        ("undock", id, port). Op shapes are validated up front (raises
        ParameterError before anything is applied). During execution a step
        that violates dock/undock preconditions, is rejected by capture, or
        whose undock would strand modules from their anchor aborts the plan
        at that step; earlier steps stay applied. A relocation must
        therefore dock its new interface before undocking the old one, the
        way a walking robot moves.
        """
        ops = list(ops)
        for i, op in enumerate(ops):
            if not op or op[0] not in ("dock", "undock"):
                raise ParameterError(f"op {i}: expected ('dock', ...) or ('undock', ...)")
            if op[0] == "dock" and len(op) not in (5, 6):
                raise ParameterError(
                    f"op {i}: dock takes (id_a, port_a, id_b, port_b[, misalignment])"
                )
            if op[0] == "undock" and len(op) != 3:
                raise ParameterError(f"op {i}: undock takes (id, port)")

        outcomes: list[StepOutcome] = []
        for i, op in enumerate(ops):
            if op[0] == "dock":
                mis = op[5] if len(op) == 6 else None
                try:
                    report = self.dock(op[1], op[2], op[3], op[4], misalignment=mis)
                except (ParameterError, PortInUseError) as err:
                    outcomes.append(StepOutcome(i, op, applied=False, detail=str(err)))
                    return ReconfigureReport(tuple(outcomes), completed=False, aborted_index=i)
                if not report.accepted:
                    outcomes.append(StepOutcome(i, op, applied=False, detail=report.reason))
                    return ReconfigureReport(tuple(outcomes), completed=False, aborted_index=i)
                outcomes.append(StepOutcome(i, op, applied=True, detail="locked"))
            else:
                ref = (op[1], op[2])
                if ref not in self._peers:
                    outcomes.append(
                        StepOutcome(i, op, applied=False, detail=f"port {ref} is not docked")
                    )
                    return ReconfigureReport(tuple(outcomes), completed=False, aborted_index=i)
                stranded = self._would_strand(ref)
                if stranded:
                    outcomes.append(
                        StepOutcome(
                            i, op, applied=False,
                            detail="undock would strand modules from their anchor",
                            stranded=tuple(sorted(stranded)),
                        )
                    )
                    return ReconfigureReport(tuple(outcomes), completed=False, aborted_index=i)
                self.undock(op[1], op[2])
                outcomes.append(StepOutcome(i, op, applied=True, detail="undocked"))
        return ReconfigureReport(tuple(outcomes), completed=True)

    def _would_strand(self, ref: PortRef) -> set[str]:
        """Modules that lose anchor connectivity if this edge goes away."""
        peer = self._peers[ref]
        drop = frozenset((ref, peer))
        adj: dict[str, set[str]] = {mid: set() for mid in self._modules}
        for a, b in self._locked_peer_items():
            if frozenset((a, b)) == drop:
                continue
            adj[a[0]].add(b[0])
        before = self._stranded_modules()
        after: set[str] = set()
        seen: set[str] = set()
        for mid in self._modules:
            if mid in seen:
                continue
            comp = {mid}
            queue = deque([mid])
            while queue:
                for nxt in adj[queue.popleft()]:
                    if nxt not in comp:
                        comp.add(nxt)
                        queue.append(nxt)
            seen |= comp
            if not any(self._modules[m].grounded for m in comp):
                after |= comp
        return after - before

    def _stranded_modules(self) -> set[str]:
        out: set[str] = set()
        for comp in self._components():
            if not any(self._modules[m].grounded for m in comp):
                out |= comp
        return out
