"""HTTP service contract tests over an untrained (but fully wired) model."""
from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from schemex.service import create_app

PRODUCT_DOC = {
    "version": 1,
    "structures": [{"name": "product", "fields": ["name::str", "price::str"]}],
}


@pytest.fixture(scope="module")
def client(fresh_model):
    app = create_app(fresh_model, model_id="testmodel")
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health_ok(self, client):
        res = client.get("/health")
        assert res.status_code == 200
        body = res.json()
        assert body["status"] == "ok"
        assert body["model_id"] == "testmodel"
        assert body["config"]["hidden_dim"] == 64


class TestExtract:
    def test_extract_succeeds(self, client):
        res = client.post(
            "/extract",
            json={"schema": PRODUCT_DOC, "text": "iPhone costs $999. Galaxy is $899."},
        )
        assert res.status_code == 200
        body = res.json()
        assert body["format_version"] == 1
        assert "structures" in body
        assert "entities" not in body

    def test_deterministic_responses(self, client):
        payload = {"schema": PRODUCT_DOC, "text": "Pixel costs $499."}
        a = client.post("/extract", json=payload)
        b = client.post("/extract", json=payload)
        assert a.json() == b.json()

    def test_malformed_body(self, client):
        res = client.post(
            "/extract", content="{not json", headers={"content-type": "application/json"}
        )
        assert res.status_code == 400
        assert res.json()["error"] == "ParseError"

    def test_schema_missing_version(self, client):
        res = client.post("/extract", json={"schema": {"entities": {"p": None}}, "text": "x"})
        assert res.status_code == 400
        assert res.json()["error"] == "ParseError"

    def test_invalid_schema_reports_violations(self, client):
        doc = {
            "version": 1,
            "classifications": [
                {"task": "s", "labels": {"a": None, "b": None}, "multi_label": False},
                {"task": "s", "labels": {"a": None, "b": None}, "multi_label": False},
            ],
        }
        res = client.post("/extract", json={"schema": doc, "text": "x"})
        assert res.status_code == 400
        body = res.json()
        assert body["error"] == "SchemaInvalid"
        assert body["violations"]

    def test_text_too_large(self, client):
        res = client.post(
            "/extract", json={"schema": PRODUCT_DOC, "text": "x" * (64 * 1024 + 1)}
        )
        assert res.status_code == 413
        assert res.json()["error"] == "TextTooLarge"

    def test_context_overflow(self, client):
        res = client.post(
            "/extract", json={"schema": PRODUCT_DOC, "text": "word " * 600}
        )
        assert res.status_code == 422
        body = res.json()
        assert body["error"] == "ContextOverflow"
        assert body["needed"] > body["max_len"]

    def test_threshold_option_respected(self, client):
        # threshold 1.0 cannot be exceeded by any sigmoid score
        res = client.post(
            "/extract",
            json={
                "schema": PRODUCT_DOC,
                "text": "iPhone costs $999.",
                "options": {"threshold": 1.0},
            },
        )
        assert res.status_code == 200
        assert res.json()["structures"]["product"] == []

    def test_missing_schema_key(self, client):
        res = client.post("/extract", json={"text": "x"})
        assert res.status_code == 400

    def test_text_must_be_string(self, client):
        res = client.post("/extract", json={"schema": PRODUCT_DOC, "text": 5})
        assert res.status_code == 400
