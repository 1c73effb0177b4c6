import pytest
from fastapi.testclient import TestClient

from napspmv import params_to_dict, default_params
from napspmv.app import app

MM_TEXT = (
    "%%MatrixMarket matrix coordinate real general\n"
    "4 4 8\n"
    "1 1 1.0\n1 2 2.0\n2 2 3.0\n2 3 4.0\n"
    "3 3 5.0\n3 4 6.0\n4 4 7.0\n4 1 8.0\n"
)


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestHealthAndFixtures:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}

    def test_fixtures_listed(self, client):
        resp = client.get("/fixtures")
        assert resp.status_code == 200
        assert "example1" in resp.json()["fixtures"]


class TestVerifyEndpoint:
    def test_fixture_brings_its_own_layout(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "fixture", "name": "example1"},
                # deliberately different topology: the fixture's wins
                "topology": {"nodes": 1, "ppn": 1},
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["verified"] is True
        assert body["report"]["topology"] == {"nodes": 3, "ppn": 2, "num_procs": 6}
        assert body["report"]["matrix"]["nnz"] == 17

    def test_random_matrix(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "random", "rows": 40, "nnz_per_row": 5},
                "topology": {"nodes": 2, "ppn": 2},
                "seed": 3,
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["verified"] is True
        assert body["report"]["matrix"]["rows"] == 40
        assert body["report"]["seed"] == 3

    def test_inline_mtx_with_strided_partition(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "mtx", "text": MM_TEXT},
                "topology": {"nodes": 2, "ppn": 2},
                "partition": {"kind": "strided"},
            },
        )
        assert resp.status_code == 200
        assert resp.json()["report"]["partition"] == "strided"

    def test_explicit_partition_text(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "mtx", "text": MM_TEXT},
                "topology": {"nodes": 2, "ppn": 1},
                "partition": {"kind": "file", "text": "0\n0\n1\n1\n"},
            },
        )
        assert resp.status_code == 200
        assert resp.json()["verified"] is True

    def test_custom_model_params_accepted(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "fixture", "name": "example1"},
                "model_params": params_to_dict(default_params()),
            },
        )
        assert resp.status_code == 200

    def test_bad_mtx_is_400(self, client):
        resp = client.post(
            "/verify",
            json={"matrix": {"kind": "mtx", "text": "garbage\n1 1 1\n"}},
        )
        assert resp.status_code == 400
        assert "line 1" in resp.json()["detail"]

    def test_random_missing_fields_is_400(self, client):
        resp = client.post("/verify", json={"matrix": {"kind": "random", "rows": 10}})
        assert resp.status_code == 400

    def test_unknown_fixture_is_400(self, client):
        resp = client.post(
            "/verify", json={"matrix": {"kind": "fixture", "name": "example9"}}
        )
        assert resp.status_code == 400

    def test_too_many_procs_is_400(self, client):
        resp = client.post(
            "/verify",
            json={
                "matrix": {"kind": "random", "rows": 4, "nnz_per_row": 2},
                "topology": {"nodes": 8, "ppn": 1},
            },
        )
        assert resp.status_code == 400

    def test_malformed_body_is_422(self, client):
        resp = client.post("/verify", json={"matrix": {"kind": "nonsense"}})
        assert resp.status_code == 422


class TestPatternEndpoint:
    def test_standard_dump(self, client):
        resp = client.post(
            "/pattern",
            json={
                "matrix": {"kind": "fixture", "name": "example1"},
                "algorithm": "standard",
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["algorithm"] == "standard"
        assert body["pattern"]["0"] == [
            {"dest": 3, "indices": [0]},
            {"dest": 4, "indices": [0]},
            {"dest": 5, "indices": [0]},
        ]

    def test_node_aware_dump(self, client):
        resp = client.post(
            "/pattern",
            json={
                "matrix": {"kind": "fixture", "name": "example1"},
                "algorithm": "node_aware",
            },
        )
        assert resp.status_code == 200
        pattern = resp.json()["pattern"]
        assert pattern["node_sends"] == {"0": [1, 2], "1": [0, 2], "2": [0]}
        assert pattern["send_map"]["0"] == [1]
        assert pattern["recv_map"]["5"] == [0]


class TestSweepEndpoint:
    def test_tiny_sweep(self, client):
        resp = client.post(
            "/sweep",
            json={
                "kind": "weak",
                "base_rows": 8,
                "nnz_per_row": [2],
                "topologies": [{"nodes": 1, "ppn": 2}],
                "seeds": [0],
            },
        )
        assert resp.status_code == 200
        lines = resp.json()["csv"].strip().split("\n")
        assert len(lines) == 3
        assert lines[0].startswith("n_procs,")

    def test_bad_kind_is_422(self, client):
        resp = client.post("/sweep", json={"kind": "diagonal"})
        assert resp.status_code == 422
