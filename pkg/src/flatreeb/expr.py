"""Parser for closed-form lifts such as ``2*z - 0.3*cos(3*z + 0.5)``.

Grammar (whitespace ignored)::

    expr  := sign? term (('+' | '-') term)*
    term  := number
           | number '*'? 'z'
           | number '*'? ('sin' | 'cos') '(' int '*'? 'z' (('+' | '-') number)? ')'
           | 'z' | ('sin' | 'cos') '(' ... ')'

The z coefficients must sum to an integer, the degree of the lift.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .circle_map import CircleMap, lift_samples
from .errors import NonIntegerDegree, NonPeriodic, ParseError

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/()^]))")
_FUNCS = ("sin", "cos")


@dataclass(frozen=True)
class Harmonic:
    coef: float
    k: int
    phase: float = 0.0
    kind: str = "sin"

    def __call__(self, z):
        f = np.sin if self.kind == "sin" else np.cos
        return self.coef * f(self.k * z + self.phase)


@dataclass(frozen=True)
class ThetaExpr:
    m: int
    harmonics: tuple[Harmonic, ...] = ()
    offset: float = 0.0
    source: str = field(default="", compare=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = self.m * z + self.offset
        for h in self.harmonics:
            out = out + h(z)
        return out

    def sample(self, n: int) -> CircleMap:
        """Closed-form samples on the n-cell grid."""
        return CircleMap.from_function(self, n)

    def sample_wrapped(self, n: int) -> CircleMap:
        """Samples reduced mod 2*pi and unwrapped again, checking the degree."""
        raw = np.mod(self(spectral.grid(n)), spectral.TWO_PI)
        return lift_samples(raw, degree_hint=self.m)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks, pos = [], 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        mt = _TOKEN.match(src, pos)
        if not mt:
            start = len(src) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[start]!r}", start)
        kind = mt.lastgroup
        toks.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] == "op":
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> None:
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            raise NonPeriodic("powers are not circle-map terms", pos)
        if not self.accept(value):
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def number(self) -> float:
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError(f"expected a number, found {text or 'end of input'!r}", pos)
        return float(text)

    def parse(self) -> ThetaExpr:
        z_coef, offset, harmonics = 0.0, 0.0, []
        z_pos = None
        sign = 1.0
        if self.accept("-"):
            sign = -1.0
        else:
            self.accept("+")
        while True:
            pos = self.peek()[2]
            kind, value = self.term()
            if kind == "z":
                z_coef += sign * value
                z_pos = pos if z_pos is None else z_pos
            elif kind == "const":
                offset += sign * value
            else:
                harmonics.append(Harmonic(sign * value.coef, value.k, value.phase, value.kind))
            k, text, p = self.peek()
            if k == "end":
                break
            if text == "^":
                raise NonPeriodic("powers are not circle-map terms", p)
            if self.accept("+"):
                sign = 1.0
            elif self.accept("-"):
                sign = -1.0
            else:
                raise ParseError(f"expected '+' or '-', found {text!r}", p)
        m = round(z_coef)
        if abs(z_coef - m) > 1e-12:
            raise NonIntegerDegree(f"coefficient of z is {z_coef!r}, not an integer",
                                   z_pos if z_pos is not None else 0)
        return ThetaExpr(int(m), tuple(harmonics), offset, self.src)

    def term(self):
        kind, text, pos = self.peek()
        coef = 1.0
        if kind == "num":
            coef = self.number()
            if self.accept("*"):
                kind, text, pos = self.peek()
                if kind != "name":
                    raise ParseError(f"expected 'z', 'sin' or 'cos' after '*', found {text!r}", pos)
            else:
                kind, text, pos = self.peek()
                if kind != "name":
                    return "const", coef
        if kind != "name":
            raise ParseError(f"expected a term, found {text or 'end of input'!r}", pos)
        self.take()
        if text == "z":
            return "z", coef
        if text not in _FUNCS:
            raise NonPeriodic(f"unsupported function {text!r}", pos)
        return "harmonic", self.harmonic(coef, text)

    def harmonic(self, coef: float, fname: str) -> Harmonic:
        self.expect("(")
        kind, text, pos = self.peek()
        k = 1.0
        if kind == "num":
            k = self.number()
            self.accept("*")
        kind, text, zpos = self.take()
        if kind != "name" or text != "z":
            if kind == "name":
                raise NonPeriodic(f"unsupported argument {text!r}", zpos)
            raise ParseError(f"expected 'z' in {fname} argument", zpos)
        if k != int(k) or k <= 0:
            raise NonPeriodic(f"frequency {k!r} must be a positive integer", pos)
        phase = 0.0
        if self.accept("+"):
            phase = self.number()
        elif self.accept("-"):
            phase = -self.number()
        self.expect(")")
        return Harmonic(coef, int(k), phase, fname)


def parse_theta(src: str) -> ThetaExpr:
    """Parse a lift expression; errors carry the character position."""
    return _Parser(src).parse()
