"""
ISCAS-85 benchmark fetching.

Downloads .bench files that are not already under the data directory from
a configurable mirror; every download is parsed before it is written.
"""
from pathlib import Path

import requests

from moeda.config import BENCH_DIR, BENCH_MIRROR, MAX_RETRIES, TIMEOUT_SECONDS, logger
from moeda.core.errors import BenchmarkFetchError
from moeda.core.netlist import parse_bench


def _get_session():
    """Create requests session with retry"""
    from requests.adapters import HTTPAdapter
    from urllib3.util.retry import Retry

    session = requests.Session()
    session.headers.update({"User-Agent": "moeda-benchmark-fetch"})

    retry = Retry(total=MAX_RETRIES, backoff_factor=2,
                  status_forcelist=[429, 500, 502, 503, 504])
    adapter = HTTPAdapter(max_retries=retry)
    session.mount("https://", adapter)
    session.mount("http://", adapter)

    return session


def _fetch_text(session, url, timeout=TIMEOUT_SECONDS):
    """Fetch a document, one longer retry on timeout; None on failure"""
    for t in [timeout, timeout + 15]:
        try:
            logger.debug(f"Fetching {url} (timeout={t}s)")
            response = session.get(url, timeout=t)
            response.raise_for_status()
            return response.text
        except (requests.exceptions.ConnectTimeout,
                requests.exceptions.ReadTimeout):
            logger.warning(f"Timeout {url} ({t}s), retrying...")
            continue
        except requests.exceptions.RequestException as e:
            logger.warning(f"Error fetching {url}: {e}")
            break

    logger.error(f"All attempts failed for {url}")
    return None


def bench_path(name, dest=BENCH_DIR):
    return Path(dest) / f"{name}.bench"


def fetch_benchmark(name, dest=BENCH_DIR, mirror=BENCH_MIRROR, session=None):
    """Path of <name>.bench under dest, downloading it when missing"""
    path = bench_path(name, dest)
    if path.exists():
        logger.debug(f"{name} already present at {path}")
        return path

    url = f"{mirror.rstrip('/')}/{name}.bench"
    text = _fetch_text(session or _get_session(), url)
    if text is None:
        raise BenchmarkFetchError(name, url)
    parse_bench(text, name=name)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Downloaded {name} -> {path}")
    return path


def fetch_benchmarks(names, dest=BENCH_DIR, mirror=BENCH_MIRROR):
    session = _get_session()
    return [fetch_benchmark(name, dest, mirror, session) for name in names]
