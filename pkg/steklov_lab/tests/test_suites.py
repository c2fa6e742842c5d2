# tests/test_suites.py

import pytest

from steklov_lab.cli import EXIT_CHECK_FAILED, EXIT_OK, main
from steklov_lab.config import Config
from steklov_lab.verify import SuiteContext, run_suite

SUITE_CONFIG = Config(domain="disk", n=256, grid=151)


@pytest.fixture(scope="module")
def suite_context():
    """One operator cache for every suite in this module."""
    return SuiteContext(SUITE_CONFIG)


def _failures(report):
    return [(c.id, c.measured, c.expected) for c in report.checks if not c.passed]


def _ids(report, prefix):
    return [c.id for c in report.checks if c.id.startswith(prefix)]


def test_layers_suite(suite_context):
    report = run_suite("layers", SUITE_CONFIG, suite_context)
    assert report.passed, _failures(report)
    for domain in ("disk", "ellipse:2,1", "kite", "star:0.05,4"):
        assert f"layers.asymmetry.{domain}.Lambda" in _ids(report, "layers.asymmetry")
        prefix = f"layers.jump.{domain}."
        points = {cid[len(prefix):].split(".")[0] for cid in _ids(report, prefix)}
        assert len(points) == 8


def test_disk_suite(suite_context):
    report = run_suite("disk", SUITE_CONFIG, suite_context)
    assert report.passed, _failures(report)
    assert len(_ids(report, "disk.field.")) == 3 * 8 * 2


def test_identities_suite(suite_context):
    report = run_suite("identities", SUITE_CONFIG, suite_context)
    assert report.passed, _failures(report)
    for kind in ("theta", "xi", "pi"):
        assert len(_ids(report, f"identities.reciprocity.{kind}.")) == 10
        assert len(_ids(report, f"identities.interior_energy.{kind}.")) == 9
        assert len(_ids(report, f"identities.interior_ibp.{kind}.")) == 8
    assert "identities.asymmetry.kite.Xi" in _ids(report, "identities.asymmetry")


def test_scaling_suite(suite_context):
    report = run_suite("scaling", SUITE_CONFIG, suite_context)
    assert report.passed, _failures(report)
    for domain in ("ellipse:2,1", "kite"):
        for kind in ("theta", "xi", "pi"):
            assert f"scaling.{domain}.{kind}" in _ids(report, "scaling.")


def test_deterministic_verify_is_byte_identical(tmp_path):
    outputs, codes = [], []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        argv = ["verify", "--suite", "layers", "--n", "64", "--deterministic", "--out", str(path)]
        codes.append(main(argv))
        outputs.append(path.read_bytes())
    assert codes[0] == codes[1]
    assert codes[0] in (EXIT_OK, EXIT_CHECK_FAILED)
    assert outputs[0] == outputs[1]
    assert b'"metadata"' not in outputs[0]
