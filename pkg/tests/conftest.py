import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_put_tree(root, subjects=3, sessions=1, shots=4, size=32, hands=("left", "right")):
    """Synthetic images saved as 24-bit BMPs in the PUT layout ``<hand>/<subject>/<session>_<shot>.bmp``.

    Each hand draws from its own synthetic seed, so the two hands are
    different palms of the same subjects.
    """
    from palmvein.dataset import SynthSpec, synth_generate
    from palmvein.imaging import encode_bmp

    for h, hand in enumerate(hands):
        synth = synth_generate(SynthSpec(classes=subjects, images_per_class=sessions * shots, size=size, seed=100 + h))
        for img, label, k in zip(synth.images, synth.labels, range(len(synth.labels))):
            session, shot = divmod(k % (sessions * shots), shots)
            path = root / hand / f"{label + 1:03d}" / f"{session + 1}_{shot + 1}.bmp"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(encode_bmp(img.pixels))
    return root


@pytest.fixture
def put_tree(tmp_path):
    return write_put_tree(tmp_path / "put")


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, title, ok, seconds, limit, detail):
        within = limit is None or seconds < limit
        budget = f"{seconds:.1f}s" + (f" < {limit}s" if limit is not None else "")
        line = f"{'PASS' if ok and within else 'FAIL'} criterion {number}: {title} | {detail} | {budget}"
        lines.append(line)
        print(line)
        assert ok, line
        assert within, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
