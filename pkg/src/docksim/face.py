"""Parametric 120-degree-symmetric connection face and capture envelope.

The face is a height field h(r, phi) = H * w(phi) * u(r): w is an odd
120-periodic petal wave with smoothstep ramps, u a radial window from the
hub land out to the rim chamfer. Two identical faces mate flipped; capture
is modeled as a frictionless compliant descent of the floating side's five
misalignment DOFs over the settle-height potential.

Conventions: the fixed face sits at z=0 looking up, the moving face is
flipped (diag(1,-1,-1)), rotated, tilted, and offset; settle height is the
smallest axial separation with no surface interpenetration. (tilt_x, tilt_y)
is an axis-angle pair: tilt about the in-plane axis (tx, ty) by |(tx, ty)|
degrees, pivoting at the face-plane center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationError, DegenerateProfileError, ParameterError

# Model constants (not profile fields): hub land radius, the engagement
# gate factor, descent budget and convergence thresholds.
HUB_RADIUS_MM = 16.0
ENGAGE_FACTOR = 1.5
DESCENT_BUDGET = 10000
CONV_LAT_MM = 0.01
CONV_ANG_DEG = 0.01
ROTATION_CEILING_DEG = 60.0
DEFLECTION_CEILING_DEG = 60.0


@dataclass(frozen=True)
class FaceProfile:
    """Geometry of one connection face (both mating sides are identical)."""

    petal_height_mm: float
    petal_flank_angle_deg: float
    groove_radius_mm: float
    chamfer_depth_mm: float
    outer_diameter_mm: float = 80.0
    petal_count: int = 3
    groove_positions_deg: tuple[float, float, float] = (90.0, 210.0, 330.0)

    def validate(self) -> "FaceProfile":
        if self.petal_count != 3:
            raise ParameterError("petal_count is fixed at 3")
        if self.outer_diameter_mm <= 0.0:
            raise ParameterError("outer_diameter_mm must be positive")
        if self.petal_height_mm <= 0.0 or self.groove_radius_mm <= 0.0:
            raise ParameterError("petal height and groove radius must be positive")
        if self.chamfer_depth_mm < 0.0:
            raise ParameterError("chamfer depth must be >= 0")
        if not 0.0 < self.petal_flank_angle_deg < 90.0:
            raise ParameterError("flank angle must be in (0, 90)")
        if not HUB_RADIUS_MM < self.groove_radius_mm < self.outer_diameter_mm / 2.0:
            raise ParameterError("groove radius must lie between hub and rim")
        g0, g1, g2 = self.groove_positions_deg
        if abs((g1 - g0) - 120.0) > 1e-9 or abs((g2 - g1) - 120.0) > 1e-9:
            raise ParameterError("groove positions must be spaced 120 degrees")
        return self

    @property
    def rim_radius_mm(self) -> float:
        return self.outer_diameter_mm / 2.0

    @property
    def ramp_width_deg(self) -> float:
        """Angular width of a petal flank ramp; capped at 30 (triangle wave)."""
        w = math.degrees(
            self.petal_height_mm
            / (self.groove_radius_mm * math.tan(math.radians(self.petal_flank_angle_deg)))
        )
        return min(w, 30.0)


@dataclass(frozen=True)
class Misalignment:
    """Relative pose error of the approaching face."""

    dx_mm: float = 0.0
    dy_mm: float = 0.0
    rot_deg: float = 0.0
    tilt_x_deg: float = 0.0
    tilt_y_deg: float = 0.0

    def validate(self) -> "Misalignment":
        vals = (self.dx_mm, self.dy_mm, self.rot_deg, self.tilt_x_deg, self.tilt_y_deg)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("misalignment components must be finite")
        return self


@dataclass(frozen=True)
class Envelope:
    """Capture limits: quoted value per axis class plus the direction table."""

    translation_limit_mm: float
    rotation_limit_deg: float
    deflection_limit_deg: float
    per_direction: tuple[tuple[str, float, float], ...]  # (axis, direction_deg, limit)


# --- exact 120-degree symmetry machinery -------------------------------

_C120 = -0.5
_S120 = math.sqrt(3.0) / 2.0


def _rot120(x: float, y: float) -> tuple[float, float]:
    return (_C120 * x - _S120 * y, _S120 * x + _C120 * y)


def rotate_misalignment_120(mis: Misalignment, turns: int = 1) -> Misalignment:
    """Rotate a misalignment by turns*120 degrees about the face axis.

    rot_deg is 120-periodic by definition and therefore unchanged; lateral
    offset and tilt axis rotate. Using this helper (rather than trig on
    summed angles) keeps symmetry exact to the bit.
    """
    dx, dy = mis.dx_mm, mis.dy_mm
    tx, ty = mis.tilt_x_deg, mis.tilt_y_deg
    for _ in range(turns % 3):
        dx, dy = _rot120(dx, dy)
        tx, ty = _rot120(tx, ty)
    return replace(mis, dx_mm=dx, dy_mm=dy, tilt_x_deg=tx, tilt_y_deg=ty)


def canonicalize(mis: Misalignment) -> Misalignment:
    """Map a misalignment into the fundamental domain of the 3-fold symmetry.

    The reference vector (lateral offset if nonzero, else tilt axis) is
    rotated into angle [0, 120); rot wraps to [-60, 60]. Feasibility is
    solved on canonical states only, which makes the symmetry invariant
    exact by construction.
    """
    rot = math.remainder(mis.rot_deg, 120.0) if mis.rot_deg else mis.rot_deg
    out = replace(mis, rot_deg=rot)
    rx, ry = out.dx_mm, out.dy_mm
    if rx == 0.0 and ry == 0.0:
        rx, ry = out.tilt_x_deg, out.tilt_y_deg
        if rx == 0.0 and ry == 0.0:
            return out
    for _ in range(3):
        ang = math.degrees(math.atan2(ry, rx)) % 360.0
        if ang < 120.0:
            return out
        out = rotate_misalignment_120(out)
        rx, ry = (out.dx_mm, out.dy_mm) if (out.dx_mm, out.dy_mm) != (0.0, 0.0) \
            else (out.tilt_x_deg, out.tilt_y_deg)
    return out


# --- height field and sampling ------------------------------------------


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def height_field(profile: FaceProfile, x, y):
    """Surface height at cartesian face coordinates (vectorized)."""
    h = profile.petal_height_mm
    rg = profile.groove_radius_mm
    rim = profile.rim_radius_mm
    delta = profile.ramp_width_deg
    phase = profile.groove_positions_deg[0] - 90.0

    r = np.hypot(x, y)
    phi = np.degrees(np.arctan2(y, x)) - phase
    pm = np.mod(phi, 120.0)
    up = pm <= 60.0
    xx = np.where(up, pm, 120.0 - pm)
    hump = _smoothstep(np.minimum(xx, 60.0 - xx) / delta)
    wave = np.where(up, hump, -hump)

    inner = _smoothstep((r - HUB_RADIUS_MM) / (rg - HUB_RADIUS_MM))
    crun = max(profile.chamfer_depth_mm, 1e-9)
    cfrac = min(1.0, profile.chamfer_depth_mm / h)
    window = inner * (1.0 - cfrac * _smoothstep((r - (rim - crun)) / crun))
    return h * wave * window


_CLOUD_CACHE: dict[FaceProfile, np.ndarray] = {}


def _sample_cloud(profile: FaceProfile) -> np.ndarray:
    """Fixed contact-sample cloud on the face surface (hub rings + annulus)."""
    cloud = _CLOUD_CACHE.get(profile)
    if cloud is not None:
        return cloud
    rim = profile.rim_radius_mm
    rs = np.concatenate([[4.0, 9.0], np.linspace(HUB_RADIUS_MM, rim, 12)])
    ps = np.linspace(0.0, 360.0, 72, endpoint=False)
    rr, pp = np.meshgrid(rs, ps)
    rr, pp = rr.ravel(), pp.ravel()
    x = rr * np.cos(np.radians(pp))
    y = rr * np.sin(np.radians(pp))
    z = height_field(profile, x, y)
    cloud = np.stack([x, y, z], axis=1)
    if len(_CLOUD_CACHE) > 16:
        _CLOUD_CACHE.clear()
    _CLOUD_CACHE[profile] = cloud
    return cloud


_FLIP = np.diag([1.0, -1.0, -1.0])


def _rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _tilt_matrix(tx_deg: float, ty_deg: float) -> np.ndarray:
    ang = math.hypot(tx_deg, ty_deg)
    if ang < 1e-15:
        return np.eye(3)
    ux, uy = tx_deg / ang, ty_deg / ang
    a = math.radians(ang)
    c, s = math.cos(a), math.sin(a)
    k = np.array([[0.0, 0.0, uy], [0.0, 0.0, -ux], [-uy, ux, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def settle_height(profile: FaceProfile, state) -> float:
    """Axial separation at first contact for pose state (dx, dy, rot, tx, ty).

    Two-sided rigid contact: moving-face samples against the fixed analytic
    surface, and fixed-face samples against the moving body (fixed-point
    solve along the approach axis). Returns +inf when face overlap is lost.
    """
    dx, dy, rot, tx, ty = state
    rim = profile.rim_radius_mm
    m = _tilt_matrix(tx, ty) @ _rot_z(rot) @ _FLIP
    cloud = _sample_cloud(profile)

    w = cloud @ m.T
    wx = w[:, 0] + dx
    wy = w[:, 1] + dy
    inside = np.hypot(wx, wy) <= rim
    if inside.sum() < 0.25 * len(cloud):
        return math.inf
    d_move = np.max(height_field(profile, wx[inside], wy[inside]) - w[inside, 2])

    cos_t = abs(m[2, 2])
    if cos_t < 0.2:
        return math.inf
    q0 = (cloud - np.array([dx, dy, 0.0])) @ m
    m3 = m[2, :2]
    dz = (height_field(profile, q0[:, 0], q0[:, 1]) - q0[:, 2]) / cos_t
    for _ in range(3):
        lat = q0[:, :2] - dz[:, None] * m3
        dz = (height_field(profile, lat[:, 0], lat[:, 1]) - q0[:, 2]) / cos_t
    lat = q0[:, :2] - dz[:, None] * m3
    keep = np.hypot(lat[:, 0], lat[:, 1]) <= rim
    d_fixed = np.max(dz[keep]) if keep.any() else -math.inf

    return float(max(d_move, d_fixed))


# --- capture descent -----------------------------------------------------


def _rot2d(x: float, y: float, deg: float) -> tuple[float, float]:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return c * x - s * y, s * x + c * y


def _candidate_moves(state, s_lat, s_rot, s_tilt):
    dx, dy, rot, tx, ty = state
    out = []
    lat = math.hypot(dx, dy)
    ux, uy = (dx / lat, dy / lat) if lat > 1e-12 else (1.0, 0.0)
    out.append((dx - s_lat * ux, dy - s_lat * uy, rot, tx, ty))
    out.append((dx + s_lat * ux, dy + s_lat * uy, rot, tx, ty))
    if lat > 1e-12:
        arc = math.degrees(s_lat / max(lat, s_lat))
        for sgn in (1.0, -1.0):
            nx, ny = _rot2d(dx, dy, sgn * arc)
            out.append((nx, ny, rot, tx, ty))
    else:
        out.append((0.0, s_lat, rot, tx, ty))

    out.append((dx, dy, rot - s_rot, tx, ty))
    out.append((dx, dy, rot + s_rot, tx, ty))

    tmag = math.hypot(tx, ty)
    vx, vy = (tx / tmag, ty / tmag) if tmag > 1e-12 else (1.0, 0.0)
    out.append((dx, dy, rot, tx - s_tilt * vx, ty - s_tilt * vy))
    out.append((dx, dy, rot, tx + s_tilt * vx, ty + s_tilt * vy))
    if tmag > 1e-12:
        arc = math.degrees(s_tilt / max(tmag, s_tilt))
        for sgn in (1.0, -1.0):
            nx, ny = _rot2d(tx, ty, sgn * arc)
            out.append((dx, dy, rot, nx, ny))
        # rolling contact: untilt while translating along the dip direction
        ntx, nty = tx - s_tilt * vx, ty - s_tilt * vy
        gx, gy = -vy, vx
        for arm in (20.0, 40.0):
            shift = arm * math.radians(s_tilt)
            out.append((dx + shift * gx, dy + shift * gy, rot, ntx, nty))
            out.append((dx - shift * gx, dy - shift * gy, rot, ntx, nty))
    else:
        out.append((dx, dy, rot, 0.0, s_tilt))
    return out


def _converged(state) -> bool:
    return (
        math.hypot(state[0], state[1]) < CONV_LAT_MM
        and abs(state[2]) < CONV_ANG_DEG
        and math.hypot(state[3], state[4]) < CONV_ANG_DEG
    )


def _descend(profile: FaceProfile, state) -> bool:
    """Strict best-improvement pattern descent of the settle potential.

    Steps start small and only shrink, so the search cannot hop over
    physical feature barriers; a stall at the finest step is a jam.
    """
    d = settle_height(profile, state)
    if not math.isfinite(d) or d > ENGAGE_FACTOR * profile.petal_height_mm:
        # Faces land on top of the features instead of interleaving:
        # the funnel never catches.
        return False
    s_lat, s_rot, s_tilt = 0.5, 1.5, 0.5
    evals = 1
    while evals < DESCENT_BUDGET:
        if _converged(state):
            return True
        best, best_d = None, d
        for cand in _candidate_moves(state, s_lat, s_rot, s_tilt):
            dc = settle_height(profile, cand)
            evals += 1
            if math.isfinite(dc) and dc < best_d - 1e-10:
                best, best_d = cand, dc
        if best is None:
            if s_lat <= 0.004 and s_rot <= 0.004 and s_tilt <= 0.004:
                return _converged(state)
            s_lat = max(s_lat * 0.5, 0.002)
            s_rot = max(s_rot * 0.5, 0.002)
            s_tilt = max(s_tilt * 0.5, 0.002)
        else:
            state, d = best, best_d
    return _converged(state)


_FEAS_CACHE: dict[tuple, bool] = {}


def mate_feasible(profile: FaceProfile, mis: Misalignment) -> bool:
    """True iff compliant descent from the misalignment converges to mated."""
    profile.validate()
    mis.validate()
    c = canonicalize(mis)
    key = (profile, c.dx_mm, c.dy_mm, c.rot_deg, c.tilt_x_deg, c.tilt_y_deg)
    hit = _FEAS_CACHE.get(key)
    if hit is not None:
        return hit
    ok = _descend(profile, (c.dx_mm, c.dy_mm, c.rot_deg, c.tilt_x_deg, c.tilt_y_deg))
    if len(_FEAS_CACHE) > 500000:
        _FEAS_CACHE.clear()
    _FEAS_CACHE[key] = ok
    return ok


# --- envelope search ------------------------------------------------------

_AXES = ("translation", "rotation", "deflection")


def _axis_state(axis: str, direction_deg: float, magnitude: float) -> Misalignment:
    if axis == "translation":
        ux, uy = math.cos(math.radians(direction_deg)), math.sin(math.radians(direction_deg))
        return Misalignment(dx_mm=magnitude * ux, dy_mm=magnitude * uy)
    if axis == "rotation":
        sign = -1.0 if direction_deg < 0.0 else 1.0
        return Misalignment(rot_deg=sign * magnitude)
    if axis == "deflection":
        ux, uy = math.cos(math.radians(direction_deg)), math.sin(math.radians(direction_deg))
        return Misalignment(tilt_x_deg=magnitude * ux, tilt_y_deg=magnitude * uy)
    raise ParameterError(f"unknown axis {axis!r}; expected one of {_AXES}")


def _axis_cap(profile: FaceProfile, axis: str) -> float:
    if axis == "translation":
        return profile.outer_diameter_mm
    if axis == "rotation":
        return ROTATION_CEILING_DEG
    return DEFLECTION_CEILING_DEG


def envelope_axis_limit(
    profile: FaceProfile,
    axis: str,
    tol: float,
    direction_deg: float = 0.0,
) -> float:
    """Largest feasible magnitude along one axis, on the k*tol lattice.

    Exponential search then bisection place the bracket; a memoized prefix
    verification then walks the lattice from 1, so the returned boundary
    always equals the brute-force linear-scan boundary exactly. A ray that
    turns out non-monotone is thereby resolved to its first crossing.
    """
    profile.validate()
    if tol <= 0.0:
        raise ParameterError("tol must be positive")
    if not mate_feasible(profile, Misalignment()):
        raise DegenerateProfileError("profile cannot mate at zero misalignment")

    kmax = max(1, int(math.floor(_axis_cap(profile, axis) / tol)))
    probes: dict[int, bool] = {}

    def feasible(k: int) -> bool:
        got = probes.get(k)
        if got is None:
            got = mate_feasible(profile, _axis_state(axis, direction_deg, k * tol))
            probes[k] = got
        return got

    # exponential bracket
    k = 1
    while k < kmax and feasible(k):
        k *= 2
    hi = min(k, kmax)
    if feasible(hi):
        return hi * tol  # feasible through the geometric cap
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    # prefix verification: guarantees agreement with a linear scan
    for j in range(1, lo + 1):
        if not feasible(j):
            return (j - 1) * tol
    return lo * tol


def axis_limit_linear_scan(
    profile: FaceProfile,
    axis: str,
    tol: float,
    direction_deg: float = 0.0,
) -> float:
    """Brute-force oracle: walk the lattice until the first infeasible point."""
    profile.validate()
    if not mate_feasible(profile, Misalignment()):
        raise DegenerateProfileError("profile cannot mate at zero misalignment")
    kmax = max(1, int(math.floor(_axis_cap(profile, axis) / tol)))
    for k in range(1, kmax + 1):
        if not mate_feasible(profile, _axis_state(axis, direction_deg, k * tol)):
            return (k - 1) * tol
    return kmax * tol


def full_envelope(
    profile: FaceProfile,
    angular_resolution_deg: float = 30.0,
    tol_translation_mm: float = 1.0,
    tol_rotation_deg: float = 1.0,
    tol_deflection_deg: float = 1.0,
) -> Envelope:
    """Sweep per-direction limits; the quoted limit per axis is the minimum.

    Only the fundamental domain psi in [0, 120) is evaluated; rows for
    psi+120 and psi+240 carry the same limit because feasibility is exact
    under 120-degree rotation by construction.
    """
    profile.validate()
    if angular_resolution_deg <= 0.0:
        raise ParameterError("angular resolution must be positive")
    rows: list[tuple[str, float, float]] = []
    base = []
    psi = 0.0
    while psi < 120.0 - 1e-9:
        base.append(psi)
        psi += angular_resolution_deg

    for axis, tol in (("translation", tol_translation_mm), ("deflection", tol_deflection_deg)):
        for d in base:
            lim = envelope_axis_limit(profile, axis, tol, d)
            for turn in range(3):
                if d + 120.0 * turn < 360.0 - 1e-9:
                    rows.append((axis, d + 120.0 * turn, lim))
    for sign in (1.0, -1.0):
        rows.append(
            ("rotation", sign, envelope_axis_limit(profile, "rotation", tol_rotation_deg, sign))
        )

    t_lim = min(v for a, _, v in rows if a == "translation")
    r_lim = min(v for a, _, v in rows if a == "rotation")
    d_lim = min(v for a, _, v in rows if a == "deflection")
    return Envelope(
        translation_limit_mm=t_lim,
        rotation_limit_deg=r_lim,
        deflection_limit_deg=d_lim,
        per_direction=tuple(rows),
    )


# --- calibration ----------------------------------------------------------

REFERENCE_PROFILE = FaceProfile(
    petal_height_mm=6.5,
    petal_flank_angle_deg=24.7,
    groove_radius_mm=27.0,
    chamfer_depth_mm=1.0,
)

_CAL_DIRECTIONS = (0.0, 30.0, 60.0, 90.0)


def _measured_limits(profile: FaceProfile) -> tuple[float, float, float]:
    """Quoted (translation, rotation, deflection) limits on the worst directions."""
    t = min(envelope_axis_limit(profile, "translation", 1.0, d) for d in _CAL_DIRECTIONS)
    r = min(
        envelope_axis_limit(profile, "rotation", 1.0, 1.0),
        envelope_axis_limit(profile, "rotation", 1.0, -1.0),
    )
    f = min(envelope_axis_limit(profile, "deflection", 1.0, d) for d in _CAL_DIRECTIONS)
    return t, r, f


def calibrate_profile(
    targets: tuple[float, float, float],
    tolerance: float = 0.10,
    max_rounds: int = 3,
) -> FaceProfile:
    """Fit a profile whose envelope matches (translation, rotation, deflection).

    Deterministic coordinate search over petal height, flank angle, groove
    radius and chamfer, warm-started at the reference profile. Raises
    CalibrationError for unreachable targets, reporting the best residual.
    """
    t_t, t_r, t_d = targets
    if not (t_t > 0.0 and t_r > 0.0 and t_d > 0.0):
        raise CalibrationError("targets must be positive")
    base = REFERENCE_PROFILE
    if t_t >= base.outer_diameter_mm:
        raise CalibrationError(f"translation target {t_t} mm exceeds the face diameter")
    if t_r > ROTATION_CEILING_DEG:
        raise CalibrationError(f"rotation target {t_r} deg exceeds the 60 deg ceiling")
    if t_d >= 90.0:
        raise CalibrationError(f"deflection target {t_d} deg is not a mateable pose")

    def residual(p: FaceProfile) -> float:
        mt, mr, md = _measured_limits(p)
        return max(abs(mt - t_t) / t_t, abs(mr - t_r) / t_r, abs(md - t_d) / t_d)

    best, best_res = base, residual(base)
    if best_res <= tolerance:
        return best

    steps = {
        "petal_height_mm": 0.5,
        "petal_flank_angle_deg": 2.0,
        "groove_radius_mm": 1.5,
        "chamfer_depth_mm": 0.5,
    }
    for _ in range(max_rounds):
        improved = False
        for name, step in steps.items():
            for sgn in (1.0, -1.0):
                cand = replace(best, **{name: getattr(best, name) + sgn * step})
                try:
                    cand.validate()
                except ParameterError:
                    continue
                res = residual(cand)
                if res < best_res - 1e-12:
                    best, best_res = cand, res
                    improved = True
                    if best_res <= tolerance:
                        return best
        if not improved:
            steps = {k: v * 0.5 for k, v in steps.items()}
    if best_res <= tolerance:
        return best
    raise CalibrationError(
        f"calibration did not reach targets {targets} (best residual {best_res:.4f})",
        best_residual=best_res,
    )
