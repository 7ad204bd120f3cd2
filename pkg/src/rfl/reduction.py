"""Word reduction in the Hecke case: linear ``Red`` and non-linear ``~Red``.

Words are ASCII strings over ``{R, L}``.  Reduction is a stack automaton:
append the next letter, then delete a terminal ``R L^(k-1)``.  In the linear
process the letter appended right after a deletion is flipped (``R <-> L``),
because ``R L^(k-1) = diag(1, -1) = D`` and ``D R = -L``, ``D L = -R``.

With ``sign`` and ``pending_flip`` as recorded here, the letter matrices
satisfy ``prod(word) = sign * prod(letters) * D**pending_flip``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import _kernels
from .errors import DomainError, ResourceError

MAX_EXCURSION_LEN = 30

WordLike = Union[str, np.ndarray]

_FLIP = {"R": "L", "L": "R"}


@dataclass(frozen=True)
class ReducedWord:
    letters: str
    sign: int = 1
    pending_flip: bool = False
    deletions: int = 0

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def r_count(self) -> int:
        return self.letters.count("R")


@dataclass(frozen=True)
class BlockSeq:
    """``L^leading_ls`` followed by blocks ``R L^j`` for ``j`` in ``blocks``.

    ``partial`` is set when the last block is still open: nothing after its
    L-run closes it, so a longer word could extend that run.
    """

    leading_ls: int
    blocks: tuple[int, ...]
    partial: bool = False

    def letters(self) -> str:
        return "L" * self.leading_ls + "".join("R" + "L" * j for j in self.blocks)


def _check_word(word: str) -> str:
    if not isinstance(word, str):
        raise DomainError("word must be a string over {R, L}")
    if word.strip("RL"):
        raise DomainError(f"word contains letters outside {{R, L}}: {word!r}")
    return word


def _check_k(k: int) -> None:
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")


def _reduce(word: str, k: int, flips: bool) -> ReducedWord:
    _check_word(word)
    _check_k(k)
    tail = "R" + "L" * (k - 1)
    stack: list[str] = []
    run = 0  # length of the terminal L-run of the stack
    flip = False
    deletions = 0
    for x in word:
        if flip:
            x = _FLIP[x]
            flip = False
        stack.append(x)
        run = run + 1 if x == "L" else 0
        if run == k - 1 and len(stack) >= k and stack[-k] == "R":
            del stack[-k:]
            deletions += 1
            flip = flips
            run = 0
            while run < len(stack) and stack[-1 - run] == "L":
                run += 1
    letters = "".join(stack)
    assert tail not in letters
    if not flips:
        return ReducedWord(letters, 1, False, deletions)
    sign = -1 if (deletions - int(flip)) % 2 else 1
    return ReducedWord(letters, sign, flip, deletions)


def reduce_linear(word: str, k: int) -> ReducedWord:
    """Linear reduction ``Red`` with letter flips and sign tracking.

    >>> reduce_linear("RLRLLLRLL", 4).letters
    'R'
    """
    return _reduce(word, k, flips=True)


def reduce_nonlinear(word: str, k: int) -> ReducedWord:
    """Non-linear reduction: delete ``R L^(k-1)`` with no flip and no sign.

    >>> reduce_nonlinear("RLRLLLRLL", 4).letters
    'RLRLL'
    """
    return _reduce(word, k, flips=False)


def block_decompose(rw: Union[ReducedWord, str], k: int) -> BlockSeq:
    """Split a reduced word into its leading L-run and blocks ``R L^j``, ``0 <= j <= k-2``."""
    letters = rw.letters if isinstance(rw, ReducedWord) else _check_word(rw)
    _check_k(k)
    s = len(letters) - len(letters.lstrip("L"))
    rest = letters[s:]
    blocks = tuple(len(chunk) for chunk in rest.split("R")[1:])
    if any(j > k - 2 for j in blocks):
        raise DomainError(f"word contains the factor R L^{k - 1}; reduce it first")
    return BlockSeq(s, blocks, partial=bool(blocks))


def iter_words(n: int) -> Iterator[str]:
    """All ``2**n`` words of length ``n`` in lexicographic order ``L < R``."""
    for i in range(1 << n):
        yield "".join("R" if (i >> (n - 1 - b)) & 1 else "L" for b in range(n))


def enumerate_excursions(k: int, max_len: int) -> list[str]:
    """All nonempty words of length ``<= max_len`` whose linear reduction is empty.

    Depth-first over reduction states; a prefix is abandoned once its stack
    is too long to be cleared by the remaining letters (each letter removes
    at most ``k - 1`` net stack entries).
    """
    _check_k(k)
    if max_len > MAX_EXCURSION_LEN:
        raise ResourceError(
            f"max_len {max_len} exceeds the enumeration cap {MAX_EXCURSION_LEN}", achieved=None
        )
    out: list[str] = []
    prefix: list[str] = []

    def visit(stack: tuple, flip: bool) -> None:
        depth = len(prefix)
        if depth and not stack:
            out.append("".join(prefix))
        remaining = max_len - depth
        if remaining == 0:
            return
        for x in "LR":
            y = _FLIP[x] if flip else x
            new = stack + (y,)
            deleted = (
                len(new) >= k and new[-k] == "R" and all(c == "L" for c in new[-(k - 1):])
            )
            if deleted:
                new = new[:-k]
            if len(new) > (k - 1) * (remaining - 1):
                continue
            prefix.append(x)
            visit(new, deleted)
            prefix.pop()

    visit((), False)
    out.sort(key=lambda w: (len(w), w))
    return out


def word_probability(word: str, p: float) -> float:
    """``p**|w|_R * (1-p)**|w|_L``."""
    r = word.count("R")
    return p**r * (1.0 - p) ** (len(word) - r)


def excursion_mass_partial(k: int, max_len: int, p: float) -> float:
    """Total probability of the excursions of length ``<= max_len``."""
    return float(sum(word_probability(w, p) for w in enumerate_excursions(k, max_len)))


@dataclass(frozen=True)
class SurvivalTrace:
    """Append index and status of every R appended during a reduction.

    ``alive[i]`` is False when the R appended at ``index[i]`` was deleted,
    True when it is still in the stack at the end of the word.
    """

    index: np.ndarray
    alive: np.ndarray

    @property
    def frequency(self) -> float:
        return float(self.alive.mean()) if self.alive.size else float("nan")


def word_to_array(word: WordLike) -> np.ndarray:
    """``R -> 1``, ``L -> 0`` as a ``uint8`` array."""
    if isinstance(word, np.ndarray):
        return word.astype(np.uint8, copy=False)
    _check_word(word)
    return (np.frombuffer(word.encode("ascii"), dtype=np.uint8) == ord("R")).astype(np.uint8)


def survival_trace(word: WordLike, k: int, linear: bool = True) -> SurvivalTrace:
    """Replay the reduction and report which appended R's survive.

    Accepts a string or a ``uint8`` array (1 for R) so long random words
    can be fed without building strings.
    """
    _check_k(k)
    arr = word_to_array(word)
    idx, alive = _kernels.survival_trace(arr, int(k), bool(linear))
    return SurvivalTrace(idx, alive)
