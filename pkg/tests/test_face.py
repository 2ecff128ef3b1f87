"""Face geometry, capture descent, and envelope search tests.

Wall positions asserted here were measured on the reference face with the
shipped solver settings and act as regression pins; the acceptance suite
separately checks them against the published tolerance targets.
"""
import math

import numpy as np
import pytest

from docksim.errors import CalibrationError, DegenerateProfileError, ParameterError
import docksim.face as face
from docksim.face import (
    REFERENCE_PROFILE,
    Envelope,
    FaceProfile,
    Misalignment,
    axis_limit_linear_scan,
    calibrate_profile,
    canonicalize,
    envelope_axis_limit,
    full_envelope,
    height_field,
    mate_feasible,
    rotate_misalignment_120,
    settle_height,
)


class TestProfileValidation:
    def test_reference_is_valid(self):
        REFERENCE_PROFILE.validate()

    def test_petal_count_fixed(self):
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 24.7, 27.0, 1.0, petal_count=4).validate()

    def test_flank_range(self):
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 0.0, 27.0, 1.0).validate()
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 90.0, 27.0, 1.0).validate()

    def test_groove_radius_between_hub_and_rim(self):
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 24.7, 10.0, 1.0).validate()
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 24.7, 45.0, 1.0).validate()

    def test_groove_spacing(self):
        with pytest.raises(ParameterError):
            FaceProfile(6.5, 24.7, 27.0, 1.0, groove_positions_deg=(90.0, 200.0, 330.0)).validate()

    def test_ramp_width_cap(self):
        steep = FaceProfile(6.5, 5.0, 27.0, 1.0)
        assert steep.ramp_width_deg == 30.0
        assert REFERENCE_PROFILE.ramp_width_deg < 30.0


class TestHeightField:
    def test_hub_is_flat(self):
        p = REFERENCE_PROFILE
        r = np.linspace(0.0, face.HUB_RADIUS_MM, 20)
        phi = np.linspace(0.0, 2 * np.pi, 40)
        rr, pp = np.meshgrid(r, phi)
        z = height_field(p, rr * np.cos(pp), rr * np.sin(pp))
        assert np.all(z == 0.0)

    def test_peak_equals_petal_height(self):
        p = REFERENCE_PROFILE
        r = np.linspace(0.0, p.rim_radius_mm, 200)
        phi = np.radians(np.linspace(0.0, 360.0, 720, endpoint=False))
        rr, pp = np.meshgrid(r, phi)
        z = height_field(p, rr * np.cos(pp), rr * np.sin(pp))
        assert np.max(z) == pytest.approx(p.petal_height_mm, abs=1e-12)
        assert np.min(z) == pytest.approx(-p.petal_height_mm, abs=1e-12)

    def test_three_fold_periodicity(self):
        p = REFERENCE_PROFILE
        rng = np.random.default_rng(3)
        r = rng.uniform(0.0, 40.0, 500)
        a = rng.uniform(0.0, 2 * np.pi, 500)
        z0 = height_field(p, r * np.cos(a), r * np.sin(a))
        z1 = height_field(p, r * np.cos(a + 2 * np.pi / 3), r * np.sin(a + 2 * np.pi / 3))
        assert np.allclose(z0, z1, atol=1e-9)

    def test_odd_petal_wave(self):
        # petals and grooves mirror each other across the groove center line
        p = REFERENCE_PROFILE
        r = np.full(50, 30.0)
        x = np.linspace(1.0, 59.0, 50)
        phase = p.groove_positions_deg[0] - 90.0
        up = np.radians(phase + x)
        dn = np.radians(phase - x)
        z_up = height_field(p, r * np.cos(up), r * np.sin(up))
        z_dn = height_field(p, r * np.cos(dn), r * np.sin(dn))
        assert np.allclose(z_up, -z_dn, atol=1e-9)


class TestCanonicalization:
    def test_rotation_chain_is_involution_mod_3(self):
        m = Misalignment(3.0, -4.0, 17.0, 2.0, 1.0)
        back = rotate_misalignment_120(m, 3)
        assert back.dx_mm == pytest.approx(m.dx_mm, abs=1e-12)
        assert back.tilt_y_deg == pytest.approx(m.tilt_y_deg, abs=1e-12)
        assert back.rot_deg == m.rot_deg

    def test_rot_field_unchanged_by_symmetry_rotation(self):
        m = Misalignment(1.0, 2.0, 33.0, 0.5, -0.5)
        assert rotate_misalignment_120(m).rot_deg == 33.0

    def test_canonical_domain(self):
        import random

        rng = random.Random(11)
        for _ in range(200):
            m = Misalignment(
                rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-300, 300),
                rng.uniform(-15, 15), rng.uniform(-15, 15),
            )
            c = canonicalize(m)
            assert -60.0 <= c.rot_deg <= 60.0
            if (c.dx_mm, c.dy_mm) != (0.0, 0.0):
                ang = math.degrees(math.atan2(c.dy_mm, c.dx_mm)) % 360.0
                assert ang < 120.0

    def test_canonical_agrees_across_symmetry_copies(self):
        # Chained float rotations are not exactly periodic, so canonical
        # representatives of symmetry copies agree to rounding, not bitwise.
        import random

        rng = random.Random(5)
        for _ in range(100):
            m = Misalignment(
                rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-60, 60),
                rng.uniform(-15, 15), rng.uniform(-15, 15),
            )
            c0 = canonicalize(m)
            for k in (1, 2):
                ck = canonicalize(rotate_misalignment_120(m, k))
                assert ck.dx_mm == pytest.approx(c0.dx_mm, abs=1e-9)
                assert ck.dy_mm == pytest.approx(c0.dy_mm, abs=1e-9)
                assert ck.rot_deg == pytest.approx(c0.rot_deg, abs=1e-9)
                assert ck.tilt_x_deg == pytest.approx(c0.tilt_x_deg, abs=1e-9)
                assert ck.tilt_y_deg == pytest.approx(c0.tilt_y_deg, abs=1e-9)


class TestSettleHeight:
    def test_aligned_faces_mesh_flush(self):
        # conjugate surfaces: at zero misalignment the faces close to zero
        # separation with full-face contact
        d0 = settle_height(REFERENCE_PROFILE, (0.0, 0.0, 0.0, 0.0, 0.0))
        assert abs(d0) < 1e-9

    def test_far_lateral_overlap_lost(self):
        assert settle_height(REFERENCE_PROFILE, (70.0, 0.0, 0.0, 0.0, 0.0)) == math.inf

    def test_extreme_tilt_rejected(self):
        assert settle_height(REFERENCE_PROFILE, (0.0, 0.0, 0.0, 80.0, 0.0)) == math.inf

    def test_small_offset_costs_height(self):
        d0 = settle_height(REFERENCE_PROFILE, (0.0, 0.0, 0.0, 0.0, 0.0))
        d1 = settle_height(REFERENCE_PROFILE, (5.0, 0.0, 0.0, 0.0, 0.0))
        assert d1 > d0


class TestMateFeasible:
    def test_zero_misalignment_always_feasible(self):
        assert mate_feasible(REFERENCE_PROFILE, Misalignment())

    def test_small_offsets_feasible(self):
        p = REFERENCE_PROFILE
        assert mate_feasible(p, Misalignment(dx_mm=3.0))
        assert mate_feasible(p, Misalignment(rot_deg=10.0))
        assert mate_feasible(p, Misalignment(tilt_x_deg=4.0))

    def test_gross_offsets_infeasible(self):
        p = REFERENCE_PROFILE
        assert not mate_feasible(p, Misalignment(dx_mm=p.outer_diameter_mm))
        assert not mate_feasible(p, Misalignment(rot_deg=58.0))
        assert not mate_feasible(p, Misalignment(tilt_x_deg=25.0))

    def test_symmetry_copies_agree(self):
        p = REFERENCE_PROFILE
        m = Misalignment(6.0, 2.0, 15.0, 3.0, -1.0)
        f0 = mate_feasible(p, m)
        assert mate_feasible(p, rotate_misalignment_120(m)) == f0
        assert mate_feasible(p, rotate_misalignment_120(m, 2)) == f0

    def test_equivalent_rotations_agree(self):
        p = REFERENCE_PROFILE
        assert mate_feasible(p, Misalignment(rot_deg=70.0)) == mate_feasible(
            p, Misalignment(rot_deg=-50.0)
        )

    def test_nonfinite_rejected(self):
        with pytest.raises(ParameterError):
            mate_feasible(REFERENCE_PROFILE, Misalignment(dx_mm=math.nan))


class TestEnvelopeSearch:
    def test_matches_linear_scan_translation(self, reference_envelope):
        p = REFERENCE_PROFILE
        for d in (0.0, 30.0):
            assert envelope_axis_limit(p, "translation", 1.0, d) == axis_limit_linear_scan(
                p, "translation", 1.0, d
            )

    def test_matches_linear_scan_rotation(self, reference_envelope):
        p = REFERENCE_PROFILE
        assert envelope_axis_limit(p, "rotation", 1.0, 1.0) == axis_limit_linear_scan(
            p, "rotation", 1.0, 1.0
        )

    def test_matches_linear_scan_deflection(self, reference_envelope):
        p = REFERENCE_PROFILE
        assert envelope_axis_limit(p, "deflection", 1.0, 60.0) == axis_limit_linear_scan(
            p, "deflection", 1.0, 60.0
        )

    def test_wall_edges(self, reference_envelope):
        # boundary semantics: the limit is feasible, limit + tol is not
        p = REFERENCE_PROFILE
        lim = envelope_axis_limit(p, "translation", 1.0, 30.0)
        assert mate_feasible(p, Misalignment(dx_mm=lim * math.cos(math.radians(30.0)),
                                             dy_mm=lim * math.sin(math.radians(30.0))))
        nxt = lim + 1.0
        assert not mate_feasible(p, Misalignment(dx_mm=nxt * math.cos(math.radians(30.0)),
                                                 dy_mm=nxt * math.sin(math.radians(30.0))))

    def test_bad_tol(self):
        with pytest.raises(ParameterError):
            envelope_axis_limit(REFERENCE_PROFILE, "translation", 0.0)

    def test_bad_axis(self):
        with pytest.raises(ParameterError):
            envelope_axis_limit(REFERENCE_PROFILE, "yaw", 1.0)

    def test_degenerate_guard(self, monkeypatch):
        monkeypatch.setattr(face, "mate_feasible", lambda p, m: False)
        with pytest.raises(DegenerateProfileError):
            envelope_axis_limit(REFERENCE_PROFILE, "translation", 1.0)


class TestFullEnvelope:
    def test_quoted_are_minima(self, reference_envelope):
        env = reference_envelope
        for axis, quoted in (
            ("translation", env.translation_limit_mm),
            ("rotation", env.rotation_limit_deg),
            ("deflection", env.deflection_limit_deg),
        ):
            vals = [v for a, _, v in env.per_direction if a == axis]
            assert quoted == min(vals)

    def test_row_counts(self, reference_envelope):
        rows = reference_envelope.per_direction
        assert sum(1 for a, _, _ in rows if a == "translation") == 12
        assert sum(1 for a, _, _ in rows if a == "deflection") == 12
        assert sum(1 for a, _, _ in rows if a == "rotation") == 2

    def test_symmetry_replication(self, reference_envelope):
        rows = {(a, d): v for a, d, v in reference_envelope.per_direction}
        for axis in ("translation", "deflection"):
            for d in (0.0, 30.0, 60.0, 90.0):
                assert rows[(axis, d)] == rows[(axis, d + 120.0)] == rows[(axis, d + 240.0)]

    def test_reference_walls_regression(self, reference_envelope):
        env = reference_envelope
        assert env.translation_limit_mm == 11.0
        assert env.rotation_limit_deg == 40.0
        assert env.deflection_limit_deg == 13.0

    def test_bad_resolution(self):
        with pytest.raises(ParameterError):
            full_envelope(REFERENCE_PROFILE, angular_resolution_deg=0.0)

    def test_envelope_type(self, reference_envelope):
        assert isinstance(reference_envelope, Envelope)


class TestCalibration:
    def test_rotation_ceiling_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate_profile((12.0, 75.0, 14.0))

    def test_translation_ceiling_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate_profile((90.0, 41.0, 14.0))

    def test_deflection_ceiling_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate_profile((12.0, 41.0, 95.0))

    def test_nonpositive_targets_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate_profile((0.0, 41.0, 14.0))

    def test_published_targets_reachable(self, reference_envelope):
        prof = calibrate_profile((12.0, 41.0, 14.0))
        t, r, d = face._measured_limits(prof)
        assert abs(t - 12.0) / 12.0 <= 0.10
        assert abs(r - 41.0) / 41.0 <= 0.10
        assert abs(d - 14.0) / 14.0 <= 0.10
