import math

import pytest
from fastapi.testclient import TestClient

from newscap_sidecar.app import create_app
from newscap_sidecar.models import HashModelBundle


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(HashModelBundle(seed=4), batch_limit=32))


BATCH_SIZES = [1, 7, 32]


class TestSentenceEndpoint:
    @pytest.mark.parametrize("n", BATCH_SIZES)
    def test_shape_and_alignment(self, client, n):
        texts = [f"text {i}" for i in range(n)]
        res = client.post("/v1/embed/sentence", json={"texts": texts})
        assert res.status_code == 200
        body = res.json()
        assert body["dim"] == 384
        assert len(body["vectors"]) == n
        assert all(len(v) == 384 for v in body["vectors"])

    def test_deterministic(self, client):
        a = client.post("/v1/embed/sentence", json={"texts": ["same"]}).json()
        b = client.post("/v1/embed/sentence", json={"texts": ["same"]}).json()
        assert a == b

    def test_order_follows_request(self, client):
        fwd = client.post("/v1/embed/sentence", json={"texts": ["a", "b"]}).json()
        rev = client.post("/v1/embed/sentence", json={"texts": ["b", "a"]}).json()
        assert fwd["vectors"][0] == rev["vectors"][1]
        assert fwd["vectors"][1] == rev["vectors"][0]

    def test_unit_norm(self, client):
        body = client.post("/v1/embed/sentence", json={"texts": ["x"]}).json()
        norm = math.sqrt(sum(c * c for c in body["vectors"][0]))
        assert norm == pytest.approx(1.0, abs=1e-9)


class TestTokenEndpoint:
    @pytest.mark.parametrize("n", BATCH_SIZES)
    def test_alignment(self, client, n):
        texts = [f"one two three{i}" for i in range(n)]
        body = client.post("/v1/embed/tokens", json={"texts": texts}).json()
        assert len(body["vectors"]) == n
        assert all(len(seq) == 3 for seq in body["vectors"])
        assert all(len(tok) == 384 for seq in body["vectors"] for tok in seq)


class TestVisualTextEndpoint:
    @pytest.mark.parametrize("n", BATCH_SIZES)
    def test_shape(self, client, n):
        texts = [f"caption {i}" for i in range(n)]
        body = client.post("/v1/embed/visual-text", json={"texts": texts}).json()
        assert body["dim"] == 512
        assert len(body["vectors"]) == n
        assert all(len(v) == 512 for v in body["vectors"])


class TestNliEndpoint:
    @pytest.mark.parametrize("n", BATCH_SIZES)
    def test_range_and_alignment(self, client, n):
        pairs = [{"premise": f"p{i}", "hypothesis": f"h{i}"} for i in range(n)]
        body = client.post("/v1/nli", json={"pairs": pairs}).json()
        assert len(body["entailment"]) == n
        assert all(0.0 <= s <= 1.0 for s in body["entailment"])


class TestNerEndpoint:
    @pytest.mark.parametrize("n", BATCH_SIZES)
    def test_alignment(self, client, n):
        texts = ["Gabriel Boric visited Santiago"] * n
        body = client.post("/v1/ner", json={"texts": texts}).json()
        assert len(body["entities"]) == n
        for ents in body["entities"]:
            types = {e["type"] for e in ents}
            assert "PERSON" in types and "GPE" in types
            assert all(set(e) == {"surface", "type"} for e in ents)

    def test_no_entities(self, client):
        body = client.post("/v1/ner", json={"texts": ["nothing notable here"]}).json()
        assert body["entities"] == [[]]


class TestInfoEndpoint:
    def test_contents(self, client):
        body = client.get("/v1/info").json()
        assert set(body["kinds"]) == {
            "sentence-embedder", "token-embedder", "visual-text-embedder",
            "nli-scorer", "entity-extractor",
        }
        assert body["identity"]
        assert body["nli_derivation"]

    def test_advertised_dims_match_output(self, client):
        info = client.get("/v1/info").json()
        sent = client.post("/v1/embed/sentence", json={"texts": ["t"]}).json()
        vis = client.post("/v1/embed/visual-text", json={"texts": ["t"]}).json()
        assert info["dim"]["sentence"] == len(sent["vectors"][0])
        assert info["dim"]["visual-text"] == len(vis["vectors"][0])


class TestErrors:
    def test_schema_violation_is_400(self, client):
        res = client.post("/v1/embed/sentence", json={"texts": "not a list"})
        assert res.status_code == 400

    def test_missing_field_is_400(self, client):
        res = client.post("/v1/nli", json={"pairs": [{"premise": "p"}]})
        assert res.status_code == 400

    def test_over_limit_batch_is_400(self, client):
        texts = [f"t{i}" for i in range(33)]
        res = client.post("/v1/embed/sentence", json={"texts": texts})
        assert res.status_code == 400
