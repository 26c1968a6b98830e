"""Truth-table representation of (partial) Boolean functions.

Inputs are integers: bit ``j`` (least significant first) of input ``i`` is the
variable ``x_{j+1}``.  Sets of inputs are Python ints used as bitmaps over the
``2**n`` points, so restriction, domain tests and value-class counts are plain
bitwise operations.  Strings render inputs most-significant variable first,
i.e. ``format(x, "0{n}b")``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

import numpy as np

MAX_ARITY = 24
MAX_ENUM_ARITY = 4


class CapError(ValueError):
    """Raised when an input exceeds the size a routine is willing to enumerate."""


class FormatError(ValueError):
    """Malformed .bf or JSON function file."""


def check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapError(f"{what}: n={n} exceeds cap {cap}")


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


def mask_to_array(mask: int, size: int) -> np.ndarray:
    """Boolean array of length ``size`` with the bits of ``mask``."""
    nbytes = max(1, (size + 7) // 8)
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def array_to_mask(arr: np.ndarray) -> int:
    packed = np.packbits(np.asarray(arr, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    if mask.bit_length() > 256:
        yield from (int(i) for i in np.flatnonzero(mask_to_array(mask, mask.bit_length())))
        return
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(x: int) -> int:
    return x.bit_count()


def index_set_to_mask(indices: Iterable[int]) -> int:
    """1-based variable indices to a bitmask over bit positions."""
    m = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"variable indices are 1-based, got {i}")
        m |= 1 << (i - 1)
    return m


def mask_to_index_set(mask: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in iter_bits(mask))


def fmt_input(x: int, n: int) -> str:
    return format(x, f"0{n}b") if n else ""


@dataclass(frozen=True)
class BooleanFunction:
    """A possibly partial function on ``n``-bit strings.

    ``domain`` and ``values`` are bitmaps over the ``2**n`` inputs; ``values``
    is zero outside the domain.
    """

    n: int
    domain: int
    values: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_ARITY:
            raise CapError(f"arity {self.n} outside [0, {MAX_ARITY}]")
        if self.domain <= 0 or self.domain > full_mask(self.n):
            raise ValueError("domain must be a nonempty subset of the cube")
        if self.values & ~self.domain:
            raise ValueError("values set outside the domain")

    @classmethod
    def total(cls, n: int, values: int) -> "BooleanFunction":
        return cls(n, full_mask(n), values)

    @classmethod
    def from_array(cls, arr) -> "BooleanFunction":
        """Build from a sequence over all inputs: 0, 1, or -1/None for undefined."""
        a = np.array([-1 if v is None else v for v in arr], dtype=np.int8)
        n = int(a.size).bit_length() - 1
        if a.size != 1 << n:
            raise ValueError("table length must be a power of two")
        return cls(n, array_to_mask(a >= 0), array_to_mask(a == 1))

    @classmethod
    def from_callable(cls, n: int, fn, domain: int | None = None) -> "BooleanFunction":
        dom = full_mask(n) if domain is None else domain
        vals = 0
        for x in iter_bits(dom):
            if fn(x):
                vals |= 1 << x
        return cls(n, dom, vals)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def is_total(self) -> bool:
        return self.domain == full_mask(self.n)

    @property
    def ones(self) -> int:
        return self.values

    @property
    def zeros(self) -> int:
        return self.domain & ~self.values

    def preimage(self, b: int) -> int:
        return self.values if b else self.zeros

    @property
    def is_constant(self) -> bool:
        return self.values == 0 or self.values == self.domain

    def in_domain(self, x: int) -> bool:
        return bool(self.domain >> x & 1)

    def __call__(self, x: int) -> int:
        if not self.domain >> x & 1:
            raise KeyError(f"input {fmt_input(x, self.n)} outside the domain")
        return self.values >> x & 1

    def points(self) -> list[int]:
        return list(iter_bits(self.domain))

    @cached_property
    def table(self) -> np.ndarray:
        """int8 array over all inputs: value, or -1 outside the domain."""
        dom = mask_to_array(self.domain, self.size)
        val = mask_to_array(self.values, self.size)
        out = np.where(dom, val.astype(np.int8), np.int8(-1))
        out.setflags(write=False)
        return out

    def opposite(self, x: int) -> int:
        """Bitmap of domain inputs whose value differs from f(x)."""
        return self.zeros if self(x) else self.values

    def negate(self) -> "BooleanFunction":
        return BooleanFunction(self.n, self.domain, self.domain & ~self.values)

    def to_string(self) -> str:
        t = self.table
        return "".join("*" if v < 0 else "01"[v] for v in t.tolist())

    def __repr__(self) -> str:
        if self.n <= 6:
            return f"BooleanFunction(n={self.n}, '{self.to_string()}')"
        return f"BooleanFunction(n={self.n}, |dom|={popcount(self.domain)})"


@dataclass(frozen=True)
class PartialAssignment:
    """A pattern in {0,1,*}^n: ``mask`` marks fixed variables, ``bits`` their values."""

    n: int
    mask: int
    bits: int

    def __post_init__(self):
        if self.bits & ~self.mask:
            raise ValueError("bits set outside mask")
        if self.mask >> self.n:
            raise ValueError("mask wider than arity")

    @classmethod
    def of(cls, x: int, mask: int, n: int) -> "PartialAssignment":
        """The partial assignment of ``x`` on the positions in ``mask``."""
        return cls(n, mask, x & mask)

    @classmethod
    def parse(cls, s: str) -> "PartialAssignment":
        n = len(s)
        mask = bits = 0
        for j, ch in enumerate(reversed(s)):
            if ch == "*":
                continue
            if ch not in "01":
                raise FormatError(f"bad pattern character {ch!r}")
            mask |= 1 << j
            if ch == "1":
                bits |= 1 << j
        return cls(n, mask, bits)

    @property
    def size(self) -> int:
        return popcount(self.mask)

    @property
    def indices(self) -> tuple[int, ...]:
        return mask_to_index_set(self.mask)

    def consistent_with(self, other: "PartialAssignment") -> bool:
        common = self.mask & other.mask
        return (self.bits ^ other.bits) & common == 0

    def subcube(self) -> int:
        """Bitmap of all inputs extending this assignment."""
        out = 0
        for x in range(1 << self.n):
            if x & self.mask == self.bits:
                out |= 1 << x
        return out

    def __str__(self) -> str:
        return "".join(
            ("1" if self.bits >> j & 1 else "0") if self.mask >> j & 1 else "*"
            for j in reversed(range(self.n))
        )


@dataclass(frozen=True)
class Promise:
    n: int
    members: int

    @classmethod
    def from_inputs(cls, n: int, xs: Iterable[int]) -> "Promise":
        m = 0
        for x in xs:
            m |= 1 << x
        return cls(n, m)

    @property
    def size(self) -> int:
        return popcount(self.members)

    def __contains__(self, x: int) -> bool:
        return bool(self.members >> x & 1)

    def __iter__(self):
        return iter_bits(self.members)

    def hex(self) -> str:
        return format(self.members, "x")


def extends(x: int, p: PartialAssignment) -> bool:
    return x & p.mask == p.bits


def flip_block(x: int, block: Iterable[int] | int) -> int:
    """``x`` with the variables of ``block`` flipped (1-based indices or a bitmask)."""
    m = block if isinstance(block, int) else index_set_to_mask(block)
    return x ^ m


def restrict(f: BooleanFunction, P: Promise) -> BooleanFunction:
    if P.n != f.n:
        raise ValueError(f"arity mismatch: function n={f.n}, promise n={P.n}")
    if P.members & ~f.domain:
        raise ValueError("promise is not a subset of the function's domain")
    return BooleanFunction(f.n, P.members, f.values & P.members)


def restrict_to(f: BooleanFunction, members: int) -> BooleanFunction:
    return restrict(f, Promise(f.n, members))


def _popcounts(n: int) -> np.ndarray:
    x = np.arange(1 << n, dtype=np.int64)
    c = np.zeros_like(x)
    for j in range(n):
        c += (x >> j) & 1
    return c


@lru_cache(maxsize=32)
def variable_masks(n: int) -> tuple[int, ...]:
    """For each bit position j, the bitmap of inputs with x_{j+1} = 1."""
    x = np.arange(1 << n, dtype=np.int64)
    return tuple(array_to_mask((x >> j) & 1) for j in range(n))


def named_function(name: str, n: int) -> BooleanFunction:
    check_cap(n, MAX_ARITY, "named_function")
    name = name.upper()
    w = _popcounts(n)
    if name == "OR":
        vals = w > 0
    elif name == "AND":
        vals = w == n
    elif name == "PARITY":
        vals = w % 2 == 1
    elif name == "MAJORITY":
        if n % 2 == 0:
            raise ValueError("MAJORITY requires odd n")
        vals = 2 * w > n
    else:
        raise ValueError(f"unknown function {name!r}")
    return BooleanFunction.total(n, array_to_mask(vals))


def all_total_functions(n: int, cap: int = MAX_ENUM_ARITY) -> Iterator[BooleanFunction]:
    """All ``2**(2**n)`` total functions, in increasing order of the value bitmap."""
    check_cap(n, cap, "all_total_functions")
    dom = full_mask(n)
    for v in range(1 << (1 << n)):
        yield BooleanFunction(n, dom, v)


def random_function(n: int, density: float = 1.0, seed: int | None = 0,
                    p_one: float = 0.5) -> BooleanFunction:
    """Random function; each input is in the domain with probability ``density``."""
    check_cap(n, MAX_ARITY, "random_function")
    rng = np.random.default_rng(seed)
    size = 1 << n
    dom = rng.random(size) < density if density < 1.0 else np.ones(size, dtype=bool)
    if not dom.any():
        dom[rng.integers(size)] = True
    vals = (rng.random(size) < p_one) & dom
    return BooleanFunction(n, array_to_mask(dom), array_to_mask(vals))


# -- file formats ---------------------------------------------------------

def _from_value_string(n: int, s: str) -> BooleanFunction:
    if len(s) != 1 << n:
        raise FormatError(f"expected {1 << n} characters, got {len(s)}")
    bad = set(s) - set("01*")
    if bad:
        raise FormatError(f"characters outside {{0,1,*}}: {sorted(bad)}")
    if set(s) == {"*"}:
        raise FormatError("empty domain")
    dom = int("".join("0" if c == "*" else "1" for c in reversed(s)), 2)
    val = int("".join("1" if c == "1" else "0" for c in reversed(s)), 2)
    return BooleanFunction(n, dom, val)


def parse_bf(text: str) -> BooleanFunction:
    if not text.endswith("\n"):
        raise FormatError("missing trailing newline")
    lines = text[:-1].split("\n")
    if len(lines) != 2:
        raise FormatError("expected exactly two lines")
    head, body = lines
    if not head.startswith("n="):
        raise FormatError(f"bad header {head!r}")
    try:
        n = int(head[2:])
    except ValueError as e:
        raise FormatError(f"bad header {head!r}") from e
    if str(n) != head[2:] or not 0 <= n <= MAX_ARITY:
        raise FormatError(f"bad header {head!r}")
    return _from_value_string(n, body)


def emit_bf(f: BooleanFunction) -> str:
    return f"n={f.n}\n{f.to_string()}\n"


def parse_json(text: str) -> BooleanFunction:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(str(e)) from e
    if not isinstance(obj, dict) or set(obj) != {"n", "values"}:
        raise FormatError('expected an object with exactly the keys "n" and "values"')
    n, s = obj["n"], obj["values"]
    if not isinstance(n, int) or isinstance(n, bool) or not 0 <= n <= MAX_ARITY:
        raise FormatError(f"bad arity {n!r}")
    if not isinstance(s, str):
        raise FormatError("values must be a string")
    return _from_value_string(n, s)


def emit_json(f: BooleanFunction) -> str:
    return json.dumps({"n": f.n, "values": f.to_string()}) + "\n"


def parse_function(text: str, fmt: str = "bf") -> BooleanFunction:
    if fmt == "bf":
        return parse_bf(text)
    if fmt == "json":
        return parse_json(text)
    raise ValueError(f"unknown format {fmt!r}")
