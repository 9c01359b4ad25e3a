import pytest
from fastapi.testclient import TestClient

from app.catalog import identities
from app.errors import UnverifiedEntryError
from app.main import app

REGULAR = {name: "1" for name in ("rho12", "rho13", "rho14", "rho23", "rho24", "rho34")}


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["catalog_entries"] == 13
    assert "all" in body["suites"]


def test_catalog_listing(client):
    entries = client.get("/catalog").json()
    assert entries[0]["identifier"] == "delta-radial-rho"
    assert entries[0]["variables"] == list(REGULAR)


def test_catalog_entry(client):
    body = client.get("/catalog/delta-g").json()
    assert body["variables"] == ["V", "S", "P"]
    assert body["certificate_constant"] == "8/9"
    assert "diffop.gauge_volume" in body["verified_by"]


def test_unknown_catalog_entry(client):
    response = client.get("/catalog/delta-nothing")
    assert response.status_code == 404
    detail = response.json()["detail"]
    assert detail["error"] == "UnknownEntryError"
    assert "delta-radial-rho" in detail["witness"]


def test_unverified_entry_is_withheld(client, monkeypatch):
    def failing(identifier):
        raise UnverifiedEntryError(f"{identifier} failed 1 attached identities", witness={"catalog.xi_word": "word differs"})

    monkeypatch.setattr(identities, "verified_entry", failing)
    response = client.get("/catalog/delta-xi-d1")
    assert response.status_code == 500
    assert response.json()["detail"]["error"] == "UnverifiedEntryError"


def test_spectrum(client):
    response = client.post("/spectrum", json={"gamma": "0", "omega": "1", "A": "0", "N": 1})
    assert response.status_code == 200
    body = response.json()
    assert body["ground_energy"] == "36"
    assert [level["multiplicity"] for level in body["levels"]] == [1, 6]


def test_spectrum_rejects_bad_config(client):
    response = client.post("/spectrum", json={"omega": "0", "A": "0"})
    assert response.status_code == 422


def test_potentials(client):
    response = client.post("/potentials", json={"d": 3, "point": REGULAR})
    assert response.status_code == 200
    assert response.json()["values"]["V_harmonic"] == "48"


def test_geometry(client):
    response = client.post("/geometry", json={"point": REGULAR})
    assert response.status_code == 200
    body = response.json()
    assert body["volume_sq"] == "1/72"
    assert body["u"] == ["2", "2", "2"]


def test_geometry_rejects_negative_distance(client):
    response = client.post("/geometry", json={"point": {**REGULAR, "rho12": "-1"}})
    assert response.status_code == 422


def test_verify_suite(client):
    response = client.post("/verify/exact", json={"seed": 3})
    assert response.status_code == 200
    body = response.json()
    assert body["passed"] is True
    assert body["seed"] == 3


@pytest.mark.parametrize("suite", ["bogus", "all"])
def test_verify_unknown_suite(client, suite):
    assert client.post(f"/verify/{suite}").status_code == 404


def test_preflight(client):
    response = client.options("/spectrum")
    assert response.status_code == 200
    assert response.headers["access-control-allow-origin"] == "http://localhost:3000"
