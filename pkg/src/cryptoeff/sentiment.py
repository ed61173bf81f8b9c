"""Lexicon sentiment scoring and the threshold trading bot, replayed offline.

The bot compares successive aggregate sentiment scores: it buys when a score
beats the previous one by more than 30 %, and after buying sells as soon as a
score drops more than 30 % below the score it bought on.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

NEGATORS = frozenset({"not", "no", "never"})
DEFAULT_KEYWORDS = ("BTC", "#BTC", "Bitcoin")
DEFAULT_NB = 500
BUY_MARGIN = 0.30
SELL_MARGIN = 0.30

_TOKEN = re.compile(r"[a-z0-9]+")


def load_lexicon(path=None) -> dict:
    """Read a ``word<TAB>score`` file; the bundled lexicon by default."""
    if path is None:
        text = resources.files("cryptoeff").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lex = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, score = line.split("\t")
        score = float(score)
        if not -1.0 <= score <= 1.0:
            raise ValueError(f"lexicon score for {word!r} outside [-1, 1]")
        lex[word.lower()] = score
    return lex


_DEFAULT_LEXICON = None


def default_lexicon() -> dict:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_lexicon()
    return _DEFAULT_LEXICON


def tokenize(text: str) -> list:
    return _TOKEN.findall(text.lower())


def polarity(text: str, lexicon: dict | None = None) -> float:
    """Mean lexicon score of matched tokens; a negator right before a match flips it."""
    lex = default_lexicon() if lexicon is None else lexicon
    tokens = tokenize(text)
    scores = []
    for i, tok in enumerate(tokens):
        if tok in lex:
            s = lex[tok]
            if i > 0 and tokens[i - 1] in NEGATORS:
                s = -s
            scores.append(s)
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


@dataclass
class TextBatch:
    keyword: str
    texts: list
    nb: int = DEFAULT_NB


@dataclass
class KeywordScore:
    keyword: str
    pos_pct: float
    neg_pct: float
    ratio: float


@dataclass
class SentimentScore:
    keywords: list = field(default_factory=list)

    @property
    def total_score(self) -> float:
        total = 0.0
        for k in self.keywords:
            total += k.ratio
        return total

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("keyword,pos_pct,neg_pct,ratio\n")
        for k in self.keywords:
            out.write(f"{k.keyword},{k.pos_pct!r},{k.neg_pct!r},{k.ratio!r}\n")
        out.write(f"TOTAL,,,{self.total_score!r}\n")
        return out.getvalue()


def _pct(a: int, b: int, precise: bool) -> float:
    value = 100 * float(a) / float(b)
    return value if precise else float(format(value, ".2f"))


def score_batches(batches: Sequence[TextBatch], lexicon: dict | None = None, precise: bool = False) -> SentimentScore:
    """Per-keyword positive/negative shares and their ratio, summed over keywords.

    Polarity in [0, 1] counts as positive (neutral included), [-1, 0) as
    negative. Shares are percentages of ``nb`` even when fewer texts exist,
    and are rounded to 2 decimals before dividing unless ``precise``.
    """
    out = SentimentScore()
    for batch in batches:
        pos = neg = 0
        for text in batch.texts:
            p = polarity(text, lexicon)
            if 0 <= p <= 1:
                pos += 1
            elif -1 <= p < 0:
                neg += 1
        pos_pct = _pct(pos, batch.nb, precise)
        neg_pct = _pct(neg, batch.nb, precise)
        ratio = pos_pct / neg_pct if neg_pct > 0 else pos_pct
        out.keywords.append(KeywordScore(batch.keyword, pos_pct, neg_pct, ratio))
    return out


def load_corpus(directory, keywords: Iterable[str] = DEFAULT_KEYWORDS, nb: int = DEFAULT_NB) -> list:
    """One batch per keyword from ``<dir>/<keyword>.txt`` (one document per line).

    A leading ``#`` in a keyword maps to a ``hash_`` file prefix.
    """
    directory = Path(directory)
    batches = []
    for kw in keywords:
        name = ("hash_" + kw[1:]) if kw.startswith("#") else kw
        path = directory / f"{name}.txt"
        texts = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()] if path.exists() else []
        batches.append(TextBatch(kw, texts[:nb], nb))
    return batches


class Phase(Enum):
    FLAT = "Flat"
    WAITING_BUY = "WaitingBuy"
    LONG = "Long"


@dataclass(frozen=True)
class SentimentState:
    phase: Phase = Phase.FLAT
    last_score: float | None = None
    entry_price: float | None = None

    def __post_init__(self):
        if (self.phase is Phase.LONG) != (self.entry_price is not None):
            raise ValueError("entry_price must be set exactly when the phase is Long")


@dataclass(frozen=True)
class TradeLogEntry:
    action: str  # "BUY" or "SELL"
    price: float
    profit_pct: float | None = None


def profit_pct(buy: float, sell: float) -> float:
    return round((sell - buy) / buy * 100, 3)


def bot_step(state: SentimentState, score: float, price: float):
    """Advance the bot by one sampled ``(score, price)``; returns ``(state, entry or None)``.

    In ``Long``, ``last_score`` holds the score the position was bought on,
    which stays the sell reference for the whole holding period.
    """
    if not price > 0:
        raise ValueError("price must be > 0")
    if state.phase is Phase.FLAT:
        return SentimentState(Phase.WAITING_BUY, score), None
    if state.phase is Phase.WAITING_BUY:
        if score > state.last_score + state.last_score * BUY_MARGIN:
            return SentimentState(Phase.LONG, score, price), TradeLogEntry("BUY", price)
        return SentimentState(Phase.WAITING_BUY, score), None
    if score < state.last_score - state.last_score * SELL_MARGIN:
        entry = TradeLogEntry("SELL", price, profit_pct(state.entry_price, price))
        return SentimentState(Phase.FLAT), entry
    return state, None


def replay(events: Iterable, state: SentimentState | None = None) -> list:
    """Fold :func:`bot_step` over ``(score, price)`` events; returns the trade entries."""
    state = SentimentState() if state is None else state
    ledger = []
    for score, price in events:
        state, entry = bot_step(state, float(score), float(price))
        if entry is not None:
            ledger.append(entry)
    return ledger


def render_ledger(entries: Sequence[TradeLogEntry]) -> str:
    """One line per round trip, ``BUY : p SELL : q | Profit = x %``; open buys stand alone."""
    lines = []
    for e in entries:
        if e.action == "BUY":
            lines.append(f"BUY : {e.price}")
        else:
            sell = f"SELL : {e.price} | Profit = {e.profit_pct} %"
            lines[-1] = f"{lines[-1]} {sell}" if lines and lines[-1].startswith("BUY") else sell
    return "".join(line + "\n" for line in lines)


def read_events(path) -> list:
    """``score,price`` CSV (header optional) -> list of float pairs."""
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                events.append((float(row[0]), float(row[1])))
            except ValueError:
                if events:
                    raise
    return events
