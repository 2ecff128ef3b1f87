import pytest

from docksim.face import REFERENCE_PROFILE, full_envelope


@pytest.fixture(scope="session")
def reference_profile():
    return REFERENCE_PROFILE


@pytest.fixture(scope="session")
def reference_envelope():
    """Full envelope of the reference face at the default 30 deg sweep.

    Session-scoped: this is the most expensive fixture in the suite and is
    shared by the face tests and the acceptance gate.
    """
    return full_envelope(REFERENCE_PROFILE)
