"""Finite typed carriers and their bit-level encodings.

A carrier is the type of one side of a relation: the unit type, a named
finite base set, a product, or a powerset.  Each carrier owns a fixed
encoding into consecutive BDD variables:

* ``Unit``       -> 0 bits.
* ``Base(m)``    -> ceil(log2 m) bits, value = element index, most
                    significant bit first; indices >= m are outside the
                    care space.
* ``Product``    -> left bits followed by right bits; element index is
                    left-major (``i = li * size(right) + ri``).
* ``Powerset``   -> one bit per inner element (bit j <=> element j in the
                    set); subset index is ``sum(2**j for j in S)``.

MSB-first base encoding makes the kernel's lexicographic model order agree
with the element index order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Unit:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class Base:
    name: str
    size: int

    def __post_init__(self) -> None:
        # size 0 is legal: inj of an empty vector yields an empty base.
        if self.size < 0:
            raise ValueError(f"base carrier {self.name!r} needs size >= 0")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Product:
    left: "Carrier"
    right: "Carrier"

    def __str__(self) -> str:
        return f"({self.left}*{self.right})"


@dataclass(frozen=True)
class Powerset:
    inner: "Carrier"

    def __str__(self) -> str:
        return f"(pow {self.inner})"


Carrier = Union[Unit, Base, Product, Powerset]

UNIT = Unit()


def size(c: Carrier) -> int:
    """Number of elements of the carrier."""
    if isinstance(c, Unit):
        return 1
    if isinstance(c, Base):
        return c.size
    if isinstance(c, Product):
        return size(c.left) * size(c.right)
    if isinstance(c, Powerset):
        return 1 << size(c.inner)
    raise TypeError(f"not a carrier: {c!r}")


def width(c: Carrier) -> int:
    """Number of encoding bits."""
    if isinstance(c, Unit):
        return 0
    if isinstance(c, Base):
        return max(c.size - 1, 0).bit_length()
    if isinstance(c, Product):
        return width(c.left) + width(c.right)
    if isinstance(c, Powerset):
        return size(c.inner)
    raise TypeError(f"not a carrier: {c!r}")


def bits_of_index(c: Carrier, index: int) -> tuple[int, ...]:
    """Encode an element index as a bit tuple over the carrier's width."""
    if index < 0 or index >= size(c):
        raise ValueError(f"index {index} out of range for {c}")
    if isinstance(c, Unit):
        return ()
    if isinstance(c, Base):
        w = width(c)
        return tuple((index >> (w - 1 - j)) & 1 for j in range(w))
    if isinstance(c, Product):
        rs = size(c.right)
        return bits_of_index(c.left, index // rs) + bits_of_index(c.right, index % rs)
    if isinstance(c, Powerset):
        return tuple((index >> j) & 1 for j in range(size(c.inner)))
    raise TypeError(f"not a carrier: {c!r}")


def index_of_bits(c: Carrier, bits: tuple[int, ...]) -> int:
    """Decode a bit tuple back to the element index."""
    if len(bits) != width(c):
        raise ValueError(f"expected {width(c)} bits for {c}, got {len(bits)}")
    if isinstance(c, Unit):
        return 0
    if isinstance(c, Base):
        value = 0
        for b in bits:
            value = (value << 1) | b
        if value >= c.size:
            raise ValueError(f"bit pattern {bits} outside care space of {c}")
        return value
    if isinstance(c, Product):
        wl = width(c.left)
        li = index_of_bits(c.left, bits[:wl])
        ri = index_of_bits(c.right, bits[wl:])
        return li * size(c.right) + ri
    if isinstance(c, Powerset):
        return sum(1 << j for j, b in enumerate(bits) if b)
    raise TypeError(f"not a carrier: {c!r}")
