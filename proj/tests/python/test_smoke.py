import json
import math
import os

import pytest

import gbmc

DISK = """
experiment = estimate-chi
model = ball
model.dimension = 2
t = 0.05
base_points = 200
bridges = 1
seed = 11
"""


@pytest.fixture(scope="module")
def validator():
    jsonschema = pytest.importorskip("jsonschema")
    path = os.environ.get("GBMC_SCHEMA_PATH", os.path.join(os.path.dirname(__file__), "../../docs/report.schema.json"))
    with open(path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def test_module_surface():
    assert gbmc.__version__
    assert "ball" in gbmc.models()
    assert "estimate-chi" in gbmc.experiments()
    assert "McKean-Singer" in gbmc.spectral_note()


def test_model_info_disk():
    info = gbmc.model_info("ball", {"dimension": 2})
    assert info["dimension"] == 2
    assert info["volume"] == pytest.approx(math.pi)
    assert info["boundary_volume"] == pytest.approx(2 * math.pi)
    assert info["euler_characteristic"] == 1


def test_heat_kernel_is_symmetric_and_positive():
    x, y = [0.1, 0.2], [-0.3, 0.4]
    a = gbmc.neumann_heat_kernel("ball", {"dimension": 2}, 0.1, x, y)
    b = gbmc.neumann_heat_kernel("ball", {"dimension": 2}, 0.1, y, x)
    assert a > 0
    assert a == pytest.approx(b, rel=1e-10)


def test_cancellation_suite():
    suite = gbmc.cancellation_suite(seed=3, instances=10)
    assert suite["summary"] == "0 failures"
    assert suite["max_abs"] < 1e-10


def test_calibration_ratio():
    table = gbmc.calibrate([2, 3])
    assert table["ratio"]["e_3"] == pytest.approx(0.5, abs=1e-2)
    assert table["bulk"]["b_2"] * 4 * math.pi == pytest.approx(-1.0, rel=2e-2)


def test_run_config_report_validates(validator):
    report = gbmc.run_config(DISK)
    validator.validate(report)
    assert report["result"]["reference"] == 1.0
    assert report["config"]["seed"] == "11"
    again = gbmc.run_config(DISK)
    assert again == report


def test_overrides_change_the_hash(validator):
    a = gbmc.run_config(DISK)
    b = gbmc.run_config(DISK, {"seed": 12})
    validator.validate(b)
    assert a["config_hash"] != b["config_hash"]


def test_estimate_chi_direct():
    r = gbmc.estimate_chi("hemisphere", 0.05, 200, 1, seed=5, params={"dimension": 2})
    assert abs(r["estimate"] - 1.0) <= max(1.96 * r["standard_error"], 0.05)


def test_validation_errors_surface_as_value_error():
    with pytest.raises(ValueError, match="seed"):
        gbmc.run_config(DISK.replace("seed = 11", ""))
    with pytest.raises(gbmc.ValidationError):
        gbmc.model_info("torus")
