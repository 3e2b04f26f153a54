import os

import pytest

# Tests always read the profiles shipped with the repo and use a fixed seed
os.environ.setdefault("NEWFORM_PROFILE_DIR", os.path.join(os.path.dirname(__file__), "..", "profiles"))
os.environ.setdefault("NEWFORM_SEED", "20240611")
os.environ.setdefault("NEWFORM_WORKERS", "2")


def pytest_collection_modifyitems(config, items):
    if os.getenv("NEWFORM_SLOW", "").lower() in ("1", "true", "yes"):
        return
    skip_slow = pytest.mark.skip(reason="slow quadrature check; set NEWFORM_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
