"""Tokens, seeds, states, and domain-name assembly/validation.

The token alphabet is fixed to the characters that may legally appear in a
DNS label: lowercase a-z, digits, and the hyphen.  An internal start marker
(index ``n``) exists only as an extra embedding slot and is never emitted.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError, ContractError, SeedRangeError

LABEL_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789-"
_LABEL_RE = re.compile(r"^(?!-)[a-z0-9-]{1,63}(?<!-)$")

EPOCH = _dt.date(1970, 1, 1)

MAX_LABEL = 63
MAX_NAME = 253


@dataclass(frozen=True)
class TokenDict:
    """Ordered emission alphabet plus the reserved start-marker slot."""

    tokens: str = LABEL_CHARS

    def __post_init__(self):
        seen = set(self.tokens)
        if len(seen) != len(self.tokens):
            raise ContractError("tokens must be unique")
        if not seen.issubset(set(LABEL_CHARS)):
            raise ContractError("tokens must be drawn from a-z, 0-9, '-'")
        if len(self.tokens) < 2:
            raise ContractError("need at least 2 tokens")

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def start_index(self) -> int:
        """Embedding slot of the internal start marker (not emittable)."""
        return len(self.tokens)

    @property
    def hyphen_index(self) -> int | None:
        i = self.tokens.find("-")
        return None if i < 0 else i

    def index(self, ch: str) -> int:
        i = self.tokens.find(ch)
        if i < 0:
            raise ContractError(f"character {ch!r} not in token dictionary")
        return i

    def tokenize(self, core: str) -> tuple[int, ...]:
        return tuple(self.index(c) for c in core)

    def detokenize(self, indices) -> str:
        out = []
        for i in indices:
            if not 0 <= int(i) < self.n:
                raise ContractError(f"token index {i} out of range")
            out.append(self.tokens[int(i)])
        return "".join(out)


DEFAULT_TOKENS = TokenDict()


@dataclass(frozen=True)
class SeedSpace:
    """Calendar range the date seeds are drawn from."""

    start_date: _dt.date = _dt.date(1970, 1, 1)
    end_date: _dt.date = _dt.date(2099, 12, 31)
    encoding_dim: int = DEFAULT_TOKENS.n

    def __post_init__(self):
        if self.start_date > self.end_date:
            raise ContractError("start_date must not exceed end_date")
        if self.start_date < EPOCH:
            raise ContractError("seed dates before 1970-01-01 are not supported")

    def __contains__(self, date: _dt.date) -> bool:
        return self.start_date <= date <= self.end_date

    @property
    def days(self) -> int:
        return (self.end_date - self.start_date).days + 1

    def date_at(self, offset: int) -> _dt.date:
        return self.start_date + _dt.timedelta(days=int(offset) % self.days)


def encode_seed(date: _dt.date, dct: TokenDict = DEFAULT_TOKENS,
                space: SeedSpace | None = None) -> tuple[np.ndarray, int]:
    """Encode a calendar date as (one-hot seed vector, derived RNG seed).

    The vector has the dictionary's dimension with a single 1.0 at index
    ``days_since_epoch mod n``; the RNG seed is the raw day count, so equal
    dates always produce identical encodings.
    """
    if space is not None and date not in space:
        raise SeedRangeError(f"{date} outside [{space.start_date}, {space.end_date}]")
    days = (date - EPOCH).days
    if days < 0:
        raise SeedRangeError(f"{date} precedes the 1970-01-01 epoch")
    vec = np.zeros(dct.n)
    vec[days % dct.n] = 1.0
    return vec, days


@dataclass(frozen=True)
class State:
    """Generator state: the emitted prefix plus the encoded seed."""

    prefix: tuple[int, ...]
    seed_vec: np.ndarray
    n: int = field(default=DEFAULT_TOKENS.n)

    def __post_init__(self):
        if any(not 0 <= int(i) < self.n for i in self.prefix):
            raise ContractError("prefix token index out of range")
        if len(self.seed_vec) != self.n:
            raise ContractError("seed vector dimension must equal n")

    @property
    def t(self) -> int:
        return len(self.prefix)

    def advanced(self, token: int) -> "State":
        return State(self.prefix + (int(token),), self.seed_vec, self.n)


@dataclass(frozen=True)
class DomainSequence:
    """A generated core label, optionally with its assembled full name."""

    core: str
    fqdn: str | None = None

    def __post_init__(self):
        if not 1 <= len(self.core) <= MAX_LABEL:
            raise ContractError(f"core length {len(self.core)} outside 1..{MAX_LABEL}")
        if self.core[0] == "-" or self.core[-1] == "-":
            raise ContractError("core may not start or end with '-'")
        if not set(self.core).issubset(set(LABEL_CHARS)):
            raise ContractError("core contains illegal characters")

    @property
    def length(self) -> int:
        return len(self.core)


def validate_domain(s: str) -> bool:
    """True iff ``s`` is a well-formed lowercase domain name.

    Total function: every label 1-63 chars of a-z/0-9/'-' with no hyphen at
    either edge, and at most 253 characters overall.
    """
    if not isinstance(s, str) or not s or len(s) > MAX_NAME:
        return False
    return all(_LABEL_RE.match(label) for label in s.split("."))


def assemble_fqdn(core: DomainSequence | str, tld: str = "com",
                  third_level: str | None = None) -> str:
    """Join core with a TLD (and optional benign 3LD) into a full name."""
    label = core.core if isinstance(core, DomainSequence) else core
    parts = [label, tld]
    if third_level is not None:
        parts.insert(0, third_level)
    name = ".".join(parts)
    if not validate_domain(name):
        raise AssemblyError(f"assembled name {name!r} violates RFC limits")
    return name
