"""Question corpus acquisition: filtering, deduplication, sampling, ingest.

Questions come either from a live forum source (behind the ``ForumClient``
protocol) or from a JSON-lines fixture, so the whole pipeline runs offline.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .errors import FormatError, TransportError
from .text import normalize_key

log = logging.getLogger(__name__)

FIXTURE_ORIGIN = "fixture"

#: Name of the environment variable holding forum API credentials. The value
#: is read at request time and never persisted to any output file.
CREDENTIALS_ENV_VAR = "CULTEX_FORUM_TOKEN"

#: Community list used when the caller does not supply one (13 entries).
DEFAULT_SUBREDDITS = (
    "AskLatinAmerica",
    "LatinAmerica",
    "Mexico",
    "Brazil",
    "Ecuador",
    "Colombia",
    "Peru",
    "Venezuela",
    "Chile",
    "Argentina",
    "Uruguay",
    "Bolivia",
    "Paraguay",
)

#: Title prefixes that mark a post as a question, per language.
DEFAULT_INTERROGATIVE_KEYWORDS: dict[str, tuple[str, ...]] = {
    "en": ("Why", "How", "What", "When", "Where"),
    "es": ("¿", "Por qué", "Cómo", "Qué", "Dónde", "Cual"),
    "pt": ("Quem",),
}

QUESTIONS_CSV_HEADER = ["Question", "URL", "Subreddit", "Language"]


@dataclass(frozen=True)
class QuestionRecord:
    """One curated forum question with its source metadata."""

    text: str
    source_url: str = FIXTURE_ORIGIN
    subreddit: str = FIXTURE_ORIGIN
    language_hint: str = "unknown"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("question text must be non-empty")


@dataclass(frozen=True)
class FilterConfig:
    """Keyword lists used to recognize question titles, keyed by language."""

    interrogative_keywords: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_INTERROGATIVE_KEYWORDS)
    )

    def __post_init__(self) -> None:
        for lang, keywords in self.interrogative_keywords.items():
            if not keywords:
                raise ValueError(f"keyword list for {lang!r} is empty")


def is_question_title(title: str, config: FilterConfig | None = None) -> bool:
    """True iff the trimmed title starts with any configured keyword.

    Comparison is casefolded, so accented keywords match regardless of the
    title's casing; the inverted question mark counts as a prefix.
    Total: never raises, for arbitrary input.
    """
    return match_language(title, config) is not None


def match_language(title: str, config: FilterConfig | None = None) -> str | None:
    """Language whose keyword list matches ``title``, or None.

    Ties across languages are broken by the config's insertion order
    (en, es, pt for the default).
    """
    config = config or FilterConfig()
    folded = title.strip().casefold()
    for lang, keywords in config.interrogative_keywords.items():
        for keyword in keywords:
            if folded.startswith(keyword.casefold()):
                return lang
    return None


def dedupe(records: Sequence[QuestionRecord]) -> list[QuestionRecord]:
    """Drop records whose normalized text was already seen, keeping first occurrences."""
    seen: set[str] = set()
    out: list[QuestionRecord] = []
    for record in records:
        key = normalize_key(record.text)
        if key not in seen:
            seen.add(key)
            out.append(record)
    return out


def sample_subset(
    records: Sequence[QuestionRecord], n: int, seed: int
) -> tuple[list[QuestionRecord], list[QuestionRecord]]:
    """Seeded draw of ``n`` records without replacement.

    Returns (subset, remainder), both in input order. The same seed always
    produces the same split.
    """
    if n < 0 or n > len(records):
        raise ValueError(f"cannot sample {n} records from {len(records)}")
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(records)), n))
    chosen_set = set(chosen)
    subset = [records[i] for i in chosen]
    remainder = [records[i] for i in range(len(records)) if i not in chosen_set]
    return subset, remainder


def curate_subset(
    records: Sequence[QuestionRecord],
    n: int,
    seed: int,
    include_texts: Iterable[str] = (),
) -> tuple[list[QuestionRecord], list[QuestionRecord]]:
    """Like :func:`sample_subset`, but pins records whose normalized text is listed.

    The include list stands in for manual topic curation; the rest of the
    subset is filled by the seeded draw.
    """
    wanted = {normalize_key(t) for t in include_texts if t.strip()}
    pinned_idx = [i for i, r in enumerate(records) if normalize_key(r.text) in wanted]
    if len(pinned_idx) > n:
        raise ValueError(f"include list pins {len(pinned_idx)} records but subset size is {n}")
    pool = [i for i in range(len(records)) if i not in set(pinned_idx)]
    rng = random.Random(seed)
    drawn = rng.sample(pool, n - len(pinned_idx))
    chosen = sorted(pinned_idx + drawn)
    chosen_set = set(chosen)
    subset = [records[i] for i in chosen]
    remainder = [records[i] for i in range(len(records)) if i not in chosen_set]
    return subset, remainder


# ── forum sources ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ForumPost:
    title: str
    url: str
    subreddit: str


class ForumClient(Protocol):
    def fetch_posts(self, subreddit: str) -> list[ForumPost]: ...


class JsonLinesFixtureClient:
    """Offline source: one JSON object per line with title/url/subreddit fields.

    Lines that fail to parse or lack a title are reported back to
    :func:`ingest_source` as malformed rather than raising.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.malformed: dict[str, int] = {}

    def fetch_posts(self, subreddit: str) -> list[ForumPost]:
        if not self.path.exists():
            raise TransportError(f"fixture file not found: {self.path}", target=subreddit)
        posts: list[ForumPost] = []
        bad = 0
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    title = obj["title"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    bad += 1
                    continue
                if obj.get("subreddit", FIXTURE_ORIGIN) != subreddit:
                    continue
                posts.append(
                    ForumPost(
                        title=str(title),
                        url=str(obj.get("url", FIXTURE_ORIGIN)),
                        subreddit=subreddit,
                    )
                )
        self.malformed[subreddit] = bad
        return posts


class HttpForumClient:
    """Minimal JSON-over-HTTP source with bounded retry/backoff.

    Expects ``GET {base_url}/{subreddit}`` to return a JSON list of objects
    with ``title`` and ``url`` fields. Credentials, when required, come from
    the environment variable named by ``token_env`` and are sent as a bearer
    header only.
    """

    def __init__(
        self,
        base_url: str,
        token_env: str = CREDENTIALS_ENV_VAR,
        retries: int = 2,
        backoff_s: float = 0.5,
        session=None,
    ):
        import requests

        self.base_url = base_url.rstrip("/")
        self.token_env = token_env
        self.retries = retries
        self.backoff_s = backoff_s
        self._session = session if session is not None else requests.Session()

    def fetch_posts(self, subreddit: str) -> list[ForumPost]:
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        url = f"{self.base_url}/{subreddit}"
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._session.get(url, headers=headers, timeout=30)
                resp.raise_for_status()
                payload = resp.json()
                break
            except Exception as exc:  # noqa: BLE001 - any transport failure retries
                last_exc = exc
                if attempt < self.retries:
                    time.sleep(self.backoff_s * (2**attempt))
        else:
            raise TransportError(
                f"could not fetch r/{subreddit} from {self.base_url}: {last_exc}",
                target=subreddit,
            )
        posts = []
        for obj in payload:
            if not isinstance(obj, dict) or "title" not in obj:
                continue
            posts.append(
                ForumPost(
                    title=str(obj["title"]),
                    url=str(obj.get("url", url)),
                    subreddit=subreddit,
                )
            )
        return posts


@dataclass
class IngestReport:
    """Outcome of one ingest pass: kept records plus per-subreddit accounting."""

    records: list[QuestionRecord]
    fetched: dict[str, int]
    kept: dict[str, int]
    malformed: dict[str, int]

    def summary(self) -> dict:
        return {
            "total_fetched": sum(self.fetched.values()),
            "total_kept": sum(self.kept.values()),
            "total_malformed": sum(self.malformed.values()),
            "per_subreddit": {
                sub: {
                    "fetched": self.fetched.get(sub, 0),
                    "kept": self.kept.get(sub, 0),
                    "malformed": self.malformed.get(sub, 0),
                }
                for sub in self.fetched
            },
        }


def ingest_source(
    client: ForumClient,
    subreddits: Sequence[str] = DEFAULT_SUBREDDITS,
    config: FilterConfig | None = None,
    parallelism: int = 4,
) -> IngestReport:
    """Fetch posts from every subreddit and keep those with question titles.

    Subreddits may be fetched in bounded parallel; the merged output is
    always ordered by (position in ``subreddits``, position in fetch result),
    so results do not depend on scheduling. Duplicate titles are retained
    (dedup is a separate step).
    """
    config = config or FilterConfig()

    def fetch(sub: str) -> list[ForumPost]:
        return client.fetch_posts(sub)

    if parallelism > 1 and len(subreddits) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            per_sub = list(pool.map(fetch, subreddits))
    else:
        per_sub = [fetch(sub) for sub in subreddits]

    records: list[QuestionRecord] = []
    fetched: dict[str, int] = {}
    kept: dict[str, int] = {}
    for sub, posts in zip(subreddits, per_sub):
        fetched[sub] = len(posts)
        n_kept = 0
        for post in posts:
            lang = match_language(post.title, config)
            if lang is None or not post.title.strip():
                continue
            records.append(
                QuestionRecord(
                    text=post.title.strip(),
                    source_url=post.url,
                    subreddit=post.subreddit,
                    language_hint=lang,
                )
            )
            n_kept += 1
        kept[sub] = n_kept

    malformed = dict(getattr(client, "malformed", {}))
    report = IngestReport(records=records, fetched=fetched, kept=kept, malformed=malformed)
    log.info(
        "ingested %d posts, kept %d question records (%d malformed lines skipped)",
        sum(fetched.values()),
        len(records),
        sum(malformed.values()),
    )
    return report


# ── CSV persistence ───────────────────────────────────────────────────────────


def save_questions(records: Sequence[QuestionRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(QUESTIONS_CSV_HEADER)
        for r in records:
            writer.writerow([r.text, r.source_url, r.subreddit, r.language_hint])


def load_questions(path: str | Path) -> list[QuestionRecord]:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty questions file", path=str(path)) from None
        if header != QUESTIONS_CSV_HEADER:
            raise FormatError(
                f"expected header {QUESTIONS_CSV_HEADER}, got {header}", path=str(path)
            )
        records = []
        for i, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise FormatError(f"expected 4 columns, got {len(row)}", path=str(path), line=i)
            records.append(
                QuestionRecord(
                    text=row[0], source_url=row[1], subreddit=row[2], language_hint=row[3]
                )
            )
    return records
