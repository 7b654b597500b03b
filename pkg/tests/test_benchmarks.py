"""Tests for benchmark fetching; the network is replaced by a fake session."""
import pytest
import requests

from moeda.benchmarks import bench_path, fetch_benchmark
from moeda.core.errors import BenchmarkFetchError, BenchParseError

from conftest import BENCH_DIR

C17_TEXT = (BENCH_DIR / "c17.bench").read_text()


class FakeResponse:
    def __init__(self, text, status=200):
        self.text = text
        self.status = status

    def raise_for_status(self):
        if self.status >= 400:
            raise requests.exceptions.HTTPError(f"{self.status}")


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.urls = []

    def get(self, url, timeout=None):
        self.urls.append(url)
        outcome = self.responses.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


class TestFetchBenchmark:
    def test_download(self, tmp_path):
        session = FakeSession([FakeResponse(C17_TEXT)])
        path = fetch_benchmark("c17", tmp_path, mirror="https://mirror.test/iscas/",
                               session=session)
        assert path == bench_path("c17", tmp_path)
        assert path.read_text() == C17_TEXT
        assert session.urls == ["https://mirror.test/iscas/c17.bench"]

    def test_existing_file_not_refetched(self, tmp_path):
        bench_path("c17", tmp_path).write_text(C17_TEXT)
        session = FakeSession([])
        fetch_benchmark("c17", tmp_path, mirror="https://mirror.test", session=session)
        assert session.urls == []

    def test_timeout_then_success(self, tmp_path):
        session = FakeSession([requests.exceptions.ReadTimeout(), FakeResponse(C17_TEXT)])
        path = fetch_benchmark("c17", tmp_path, mirror="https://mirror.test", session=session)
        assert path.exists()
        assert len(session.urls) == 2

    def test_http_error(self, tmp_path):
        session = FakeSession([FakeResponse("", status=404)])
        with pytest.raises(BenchmarkFetchError):
            fetch_benchmark("c432", tmp_path, mirror="https://mirror.test", session=session)
        assert not bench_path("c432", tmp_path).exists()

    def test_garbage_is_not_written(self, tmp_path):
        session = FakeSession([FakeResponse("<html>moved</html>")])
        with pytest.raises(BenchParseError):
            fetch_benchmark("c17", tmp_path, mirror="https://mirror.test", session=session)
        assert not bench_path("c17", tmp_path).exists()
