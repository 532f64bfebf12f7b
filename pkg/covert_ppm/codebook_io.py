"""Plain-text codebook files.

Format: a header line "n,M,K,ell", then the values line, then one line per codeword
in key-major order holding its comma-separated 1-based pulse positions. An all-zero
codeword is an empty line. ell is left empty when the codebook is not
constant-composition.
"""

import logging
from pathlib import Path
from typing import List, Tuple

import portalocker

from .coding import Codebook
from .errors import ConfigError

logger = logging.getLogger(__name__)

HEADER = "n,M,K,ell"


def format_codebook(codebook: Codebook) -> str:
    weight = codebook.weight
    lines = [HEADER, f"{codebook.n},{codebook.M},{codebook.K},{'' if weight is None else weight}"]
    for sub in codebook.codewords:
        for word in sub:
            lines.append(",".join(str(i) for i in word))
    return "\n".join(lines) + "\n"


def parse_codebook(text: str) -> Codebook:
    """Inverse of format_codebook."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2 or lines[0].strip() != HEADER:
        raise ConfigError(f"codebook must start with the header '{HEADER}'")
    try:
        fields = lines[1].split(",")
        n, m, k = int(fields[0]), int(fields[1]), int(fields[2])
        ell = int(fields[3]) if len(fields) > 3 and fields[3].strip() else None
    except (ValueError, IndexError) as e:
        raise ConfigError(f"bad codebook size line {lines[1]!r}") from e
    body = lines[2:]
    if len(body) != m * k:
        raise ConfigError(f"expected {m * k} codeword lines, found {len(body)}")
    words: List[Tuple[int, ...]] = []
    for number, line in enumerate(body, start=3):
        try:
            words.append(tuple(int(tok) for tok in line.split(",") if tok.strip()))
        except ValueError as e:
            raise ConfigError(f"line {number}: bad pulse position in {line!r}") from e
    table = tuple(tuple(words[s * m : (s + 1) * m]) for s in range(k))
    codebook = Codebook(n, m, k, table)
    if ell is not None and codebook.weight != ell:
        raise ConfigError(f"header says ell={ell} but codewords have weight {codebook.weight}")
    return codebook


def write_codebook(codebook: Codebook, path: str) -> None:
    """Write a codebook file under an exclusive lock."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        portalocker.lock(handle, portalocker.LOCK_EX)
        handle.write(format_codebook(codebook))
        portalocker.unlock(handle)
    logger.info("wrote codebook n=%d M=%d K=%d to %s", codebook.n, codebook.M, codebook.K, path)


def read_codebook(path: str) -> Codebook:
    with open(path, encoding="utf-8") as handle:
        return parse_codebook(handle.read())
