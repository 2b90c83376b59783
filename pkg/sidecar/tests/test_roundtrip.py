"""Live-service vs exported-fixture equivalence, checked through the
evaluation harness's public interfaces (HTTP client and fixture files)."""

import socket
import threading
import time

import pytest

uvicorn = pytest.importorskip("uvicorn")
newscap = pytest.importorskip("newscap")

from newscap import backends as be
from newscap.corpus import CaptionRecord, ClipRecord
from newscap.fidelity import ThemeClassifierConfig, theme_labels
from newscap.harness import RunConfig, evaluate

from newscap_sidecar.app import create_app
from newscap_sidecar.fixtures import export_fixtures
from newscap_sidecar.models import HashModelBundle

BUNDLE = HashModelBundle(seed=21)

CLIPS = [
    ClipRecord(
        clip_id=f"clip-{i}",
        duration_s=45,
        title=f"clip {i}",
        reference_description=f"Gabriel Boric spoke in Santiago about item {i}",
    )
    for i in range(3)
]
CAPTIONS = [
    CaptionRecord(
        clip_id=c.clip_id,
        model_id=m,
        caption_text=f"{m} covers Boric and item {i}",
    )
    for i, c in enumerate(CLIPS)
    for m in ("model-a", "model-b")
]
METRICS = ("textsim", "bertscore", "tfs", "efs")


@pytest.fixture(scope="module")
def base_url():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(
        create_app(BUNDLE), host="127.0.0.1", port=port, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("sidecar did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def run_evaluation(backends):
    config = RunConfig(metrics=METRICS, backends=backends)
    return evaluate(CLIPS, CAPTIONS, config)


def request_corpus():
    texts = sorted(
        {c.reference_description for c in CLIPS} | {c.caption_text for c in CAPTIONS}
    )
    template = ThemeClassifierConfig().hypothesis_template
    nli_pairs = [
        {"premise": text, "hypothesis": template.format(label)}
        for text in texts
        for label in theme_labels()
    ]
    return {"sentence": texts, "tokens": texts, "ner": texts, "nli": nli_pairs}


def test_live_equals_fixture_within_1e9(base_url, tmp_path):
    client = be.RemoteClient(base_url)
    live = run_evaluation({
        "sentence": be.RemoteSentenceEmbedder(client, identity="live"),
        "tokens": be.RemoteTokenEmbedder(client, identity="live"),
        "nli": be.RemoteNliScorer(client, identity="live"),
        "ner": be.RemoteEntityExtractor(client, identity="live"),
    })

    fixture_path = tmp_path / "exported.jsonl"
    export_fixtures(BUNDLE, request_corpus(), fixture_path)
    store = be.FixtureStore.load(fixture_path)
    replay = run_evaluation({
        "sentence": be.FixtureSentenceEmbedder(store),
        "tokens": be.FixtureTokenEmbedder(store),
        "nli": be.FixtureNliScorer(store),
        "ner": be.FixtureEntityExtractor(store),
    })

    assert set(live.cells) == set(replay.cells)
    for key, live_cell in live.cells.items():
        replay_cell = replay.cells[key]
        assert live_cell.error is None, (key, live_cell.error)
        assert replay_cell.error is None, (key, replay_cell.error)
        assert live_cell.excluded == replay_cell.excluded, key
        if live_cell.value is not None:
            assert live_cell.value == pytest.approx(replay_cell.value, abs=1e-9), key


def test_info_served_live(base_url):
    client = be.RemoteClient(base_url)
    info = client.info()
    assert info["dim"]["sentence"] == 384
    assert info["identity"] == BUNDLE.identity
