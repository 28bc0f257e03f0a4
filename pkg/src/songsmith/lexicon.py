"""Lyric-side features: frequency, rarity, stress, vowels, syllable splits.

Two plain-text tables feed this module and both paths are configurable:

* a pronunciation lexicon in CMUdict 0.7 format, ``WORD  PH0 PH1 ...`` with
  stress digits 0/1/2 on vowel phones (1 primary, 2 secondary, 0 none);
* a word-frequency table, one ``word<TAB>count`` per line, UTF-8.

Bundled copies of both (a curated common-word lexicon and a Zipf-ranked
count table) live in ``songsmith/data`` so the package works out of the box.

Word rarity follows ``2 * (1 - log10(frequency) / 7)``, clamped to [0, 2] so
counts above ten million cannot go negative.

Grapheme syllabification is driven by the lexicon: a known word is split
into exactly as many chunks as it has vowel phones, assigning consonant
clusters by a maximal-onset heuristic; unknown words fall back to counting
orthographic vowel groups with no stress.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from importlib import resources

log = logging.getLogger(__name__)

PRIMARY = "primary"
SECONDARY = "secondary"
NO_STRESS = "none"

_STRESS_BY_DIGIT = {"1": PRIMARY, "2": SECONDARY, "0": NO_STRESS}

VOWEL_LETTERS = set("aeiouy")

# Consonant clusters that can open an English syllable; used to decide how
# much of a cluster moves right at a syllable boundary.
_LEGAL_ONSETS = {
    "bl", "br", "ch", "cl", "cr", "dr", "dw", "fl", "fr", "gl", "gr", "kn",
    "ph", "pl", "pr", "qu", "sc", "sch", "scr", "sh", "shr", "sk", "sl",
    "sm", "sn", "sp", "sph", "spl", "spr", "squ", "st", "str", "sw", "th",
    "thr", "tr", "tw", "wh", "wr",
}

_WORD_RE = re.compile(r"[a-zA-Z]+(?:'[a-zA-Z]+)*")


@dataclass(frozen=True)
class WordInfo:
    """Word-level lyric features, replicated onto each of its syllables."""

    text: str
    frequency: int
    rarity: float
    stress_pattern: tuple[str, ...]
    vowel_count: int
    syllables: tuple[str, ...]


@dataclass(frozen=True)
class AnnotatedSyllable:
    """One syllable of a lyric line plus the features of its word."""

    text: str
    syllabic_type: str
    syllable_number: int
    word: WordInfo

    @property
    def vowel_strength(self) -> str:
        return self.word.stress_pattern[self.syllable_number - 1]


def word_rarity(frequency: int) -> float:
    """Rarity in [0, 2]; 2.0 for hapaxes, 0.0 at ten million occurrences."""
    if frequency < 1:
        raise ValueError("frequency must be a positive count")
    value = 2.0 * (1.0 - math.log10(frequency) / 7.0)
    return min(2.0, max(0.0, value))


class Lexicon:
    """Loaded pronunciation + frequency tables with the lookups built on them."""

    def __init__(self, pronunciations: dict[str, list[str]], frequencies: dict[str, int]):
        self.pronunciations = pronunciations
        self.frequencies = frequencies
        self._word_cache: dict[str, WordInfo] = {}

    # -- loading ---------------------------------------------------------

    @classmethod
    def load(cls, pronunciation_path=None, frequency_path=None) -> "Lexicon":
        """Load from explicit paths, falling back to the bundled tables."""
        if pronunciation_path is None:
            pron_text = resources.files("songsmith.data").joinpath(
                "pronunciations.txt").read_text(encoding="utf-8")
        else:
            with open(pronunciation_path, encoding="utf-8") as fh:
                pron_text = fh.read()
        if frequency_path is None:
            freq_text = resources.files("songsmith.data").joinpath(
                "frequencies.txt").read_text(encoding="utf-8")
        else:
            with open(frequency_path, encoding="utf-8") as fh:
                freq_text = fh.read()
        return cls(parse_pronunciation_file(pron_text), parse_frequency_file(freq_text))

    # -- lookups ---------------------------------------------------------

    def word_frequency(self, word: str) -> int:
        """Corpus count of the word, case-insensitive; 1 when unknown."""
        return self.frequencies.get(word.lower(), 1)

    def stress_and_vowels(self, word: str) -> tuple[tuple[str, ...], int]:
        """Per-syllable stress and the number of vowel phones.

        Unknown words fall back to orthographic vowel groups, all unstressed.
        """
        phones = self.pronunciations.get(word.lower())
        if phones is not None:
            stresses = tuple(
                _STRESS_BY_DIGIT[p[-1]] for p in phones if p[-1].isdigit()
            )
            if stresses:
                return stresses, len(stresses)
        groups = _vowel_groups(word.lower())
        return (NO_STRESS,) * max(1, len(groups)), len(groups)

    def syllabify(self, word: str) -> list[str]:
        """Split a word into grapheme syllables matching its phone count."""
        if not word:
            raise ValueError("cannot syllabify an empty word")
        stresses, _ = self.stress_and_vowels(word)
        return _split_graphemes(word, len(stresses))

    def word_info(self, word: str) -> WordInfo:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        key = word.lower()
        frequency = self.word_frequency(key)
        stresses, vowel_count = self.stress_and_vowels(key)
        info = WordInfo(
            text=key,
            frequency=frequency,
            rarity=word_rarity(frequency),
            stress_pattern=stresses,
            vowel_count=vowel_count,
            syllables=tuple(_split_graphemes(word, len(stresses))),
        )
        self._word_cache[word] = info
        return info

    def annotate_line(self, line: str) -> list[AnnotatedSyllable]:
        """Per-syllable records for one lyric line, in singing order."""
        words = _WORD_RE.findall(line)
        if not words:
            raise ValueError(f"lyric line has no words: {line!r}")
        out = []
        for word in words:
            info = self.word_info(word)
            count = len(info.syllables)
            for i, chunk in enumerate(info.syllables):
                if count == 1:
                    kind = "single"
                elif i == 0:
                    kind = "begin"
                elif i == count - 1:
                    kind = "end"
                else:
                    kind = "middle"
                out.append(AnnotatedSyllable(
                    text=chunk, syllabic_type=kind, syllable_number=i + 1, word=info,
                ))
        return out


def parse_pronunciation_file(text: str) -> dict[str, list[str]]:
    """Parse CMUdict 0.7 text; malformed lines are skipped with a warning."""
    table: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(";;;"):
            continue
        fields = line.split()
        if len(fields) < 2:
            log.warning("skipping malformed lexicon line %d: %r", lineno, line)
            continue
        word = fields[0].lower()
        # Alternate pronunciations are marked WORD(2); keep the first only.
        if word.endswith(")") and "(" in word:
            continue
        if not all(p.isalnum() for p in fields[1:]):
            log.warning("skipping malformed lexicon line %d: %r", lineno, line)
            continue
        table.setdefault(word, fields[1:])
    return table


def parse_frequency_file(text: str) -> dict[str, int]:
    """Parse word<TAB>count lines; malformed lines are skipped with a warning."""
    table: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, sep, count = line.partition("\t")
        if not sep or not count.strip().isdigit():
            log.warning("skipping malformed frequency line %d: %r", lineno, line)
            continue
        table[word.lower()] = int(count)
    return table


# -- grapheme splitting ---------------------------------------------------


def _vowel_groups(word: str) -> list[tuple[int, int]]:
    """Maximal runs of vowel letters as (start, end) index pairs."""
    groups = []
    i = 0
    lower = word.lower()
    while i < len(lower):
        if lower[i] in VOWEL_LETTERS:
            j = i
            while j < len(lower) and lower[j] in VOWEL_LETTERS:
                j += 1
            groups.append((i, j))
            i = j
        else:
            i += 1
    return groups


def _split_graphemes(word: str, target: int) -> list[str]:
    """Cut a word into exactly `target` chunks whose concatenation is the word."""
    if target <= 1 or len(word) < 2:
        return [word]
    lower = word.lower()
    nuclei = _vowel_groups(lower)

    # Silent final e: merge it leftward when we have one nucleus too many.
    if (
        len(nuclei) > target
        and nuclei[-1][1] == len(lower)
        and lower[nuclei[-1][0]:] == "e"
        and nuclei[-1][0] > 0
        and lower[nuclei[-1][0] - 1] not in VOWEL_LETTERS
    ):
        nuclei.pop()

    # Merge the pair separated by the fewest consonants until counts agree.
    while len(nuclei) > target and len(nuclei) >= 2:
        gaps = [nuclei[k + 1][0] - nuclei[k][1] for k in range(len(nuclei) - 1)]
        best = max(range(len(gaps)), key=lambda k: (-gaps[k], k))
        nuclei[best] = (nuclei[best][0], nuclei[best + 1][1])
        nuclei.pop(best + 1)

    # Split multi-letter nuclei (and as a last resort any letters) until
    # counts agree the other way.
    while len(nuclei) < target:
        for k, (a, b) in enumerate(nuclei):
            if b - a >= 2:
                nuclei[k] = (a, a + 1)
                nuclei.insert(k + 1, (a + 1, b))
                break
        else:
            return _even_chunks(word, target)

    if not nuclei:
        return _even_chunks(word, target)

    # Boundary between nucleus k and k+1: hand the following syllable the
    # longest legal onset that fits, keep the rest as coda.
    cuts = []
    for k in range(len(nuclei) - 1):
        gap_start, gap_end = nuclei[k][1], nuclei[k + 1][0]
        cluster = lower[gap_start:gap_end]
        cut = gap_end
        for take in range(len(cluster), 0, -1):
            tail = cluster[-take:]
            if take == 1 and tail.isalpha() or tail in _LEGAL_ONSETS:
                cut = gap_end - take
                break
        cuts.append(cut)

    pieces = []
    prev = 0
    for cut in cuts:
        pieces.append(word[prev:cut])
        prev = cut
    pieces.append(word[prev:])
    if any(not p for p in pieces):
        return _even_chunks(word, target)
    return pieces


def _even_chunks(word: str, target: int) -> list[str]:
    """Degenerate fallback: cut into `target` non-empty runs of letters."""
    target = min(target, len(word))
    size, extra = divmod(len(word), target)
    pieces = []
    pos = 0
    for i in range(target):
        step = size + (1 if i < extra else 0)
        pieces.append(word[pos:pos + step])
        pos += step
    return pieces
