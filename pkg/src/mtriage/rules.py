"""Rule-based unit tests over source/translation pairs.

Each rule extracts pattern matches from both sides of a pair and compares
them; failures seed the "mismatch-*" challenge sets. Rules are pure
per-record functions, so evaluation order never changes outcomes.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .corpus import Corpus

SET_EQUALITY = "set-equality"
PRESENCE_IMPLICATION = "presence-implication"
ABSENCE_IMPLICATION = "absence-implication"
TERMINAL_PUNCTUATION = "terminal-punctuation"

_RULE_NAME = re.compile(r"[a-z]+(?:-[a-z]+)*$")

# Codepoint ranges treated as emoji for the set-equality check.
_EMOJI_RANGES = (
    (0x1F1E6, 0x1F1FF),
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x1FA70, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
)
_EMOJI_RE = re.compile(
    "[" + "".join(f"{chr(lo)}-{chr(hi)}" for lo, hi in _EMOJI_RANGES) + "]"
)
_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_NUM_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*")
_EN_GROUPED_RE = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?")
_DIGIT_RUN_RE = re.compile(r"\d+")
# Latin-letter lookarounds instead of \b so numerals adjacent to CJK still match.
_ROMAN_RE = re.compile(r"(?<![A-Za-z])[IVXLCDM]{2,}(?![A-Za-z])")

_CLOSING_TRAIL = "\"'”’»)]}"


class RuleError(ValueError):
    """Raised for unsupported language pairs or malformed rule packs."""


@dataclass(frozen=True)
class LanguagePack:
    """Per-language-pair parameters: punctuation equivalents and OVS lists."""

    pair: tuple[str, str]
    punct_map: dict[str, str]
    source_ovs: tuple[str, ...]
    target_ovs: tuple[str, ...]
    ovs_substring: bool  # substring matching for unsegmented target scripts
    question_style: str  # "inverted" | "fullwidth" | "ascii"


@dataclass
class UnitTestRule:
    """A named matcher plus comparison rule over a source/translation pair."""

    name: str
    comparison: str
    extract_source: Callable[[str], list[str]]
    extract_translation: Callable[[str], list[str]]
    multiset: bool = False
    language_pack: Optional[LanguagePack] = None

    def __post_init__(self):
        if not _RULE_NAME.match(self.name):
            raise RuleError(f"rule name {self.name!r} must be lowercase-hyphenated")

    def evaluate(self, record_id: str, source: str, translation: str) -> "RuleOutcome":
        src = self.extract_source(source)
        trn = self.extract_translation(translation)
        if self.comparison == PRESENCE_IMPLICATION:
            passed = all(m in translation for m in src)
        elif self.comparison == ABSENCE_IMPLICATION:
            passed = bool(src) or not trn
        elif self.multiset:
            passed = Counter(src) == Counter(trn)
        else:
            passed = set(src) == set(trn)
        return RuleOutcome(
            record_id=record_id,
            rule_name=self.name,
            passed=passed,
            source_matches=src,
            translation_matches=trn,
        )


@dataclass
class RuleOutcome:
    record_id: str
    rule_name: str
    passed: bool
    source_matches: list[str] = field(default_factory=list)
    translation_matches: list[str] = field(default_factory=list)


def emoji_codepoints(text: str) -> list[str]:
    return _EMOJI_RE.findall(text)


def urls(text: str) -> list[str]:
    return [m.rstrip(".,;:!?\"')]") for m in _URL_RE.findall(text)]


def number_sequences(text: str) -> list[str]:
    """Digit-sequence multiset tokens; en-style grouping separators stripped."""
    out: list[str] = []
    for tok in _NUM_TOKEN_RE.findall(text):
        if _EN_GROUPED_RE.fullmatch(tok):
            tok = tok.replace(",", "")
        out.extend(_DIGIT_RUN_RE.findall(tok))
    return out


def roman_numerals(text: str) -> list[str]:
    return _ROMAN_RE.findall(text)


def _ends_with(text: str, chars: str) -> bool:
    stripped = text.rstrip().rstrip(_CLOSING_TRAIL).rstrip()
    return stripped.endswith(tuple(chars)) if stripped else False


def _terminal_marker(
    mark: str, style: str, ascii_char: str, fullwidth_char: str, inverted_char: str
) -> Callable[[str], list[str]]:
    def extract(text: str) -> list[str]:
        if style == "inverted":
            present = inverted_char in text and ascii_char in text
        elif style == "fullwidth":
            present = _ends_with(text, fullwidth_char)
        else:
            present = _ends_with(text, ascii_char)
        return [mark] if present else []

    return extract


def _ovs_matches(text: str, terms: tuple[str, ...], substring: bool) -> list[str]:
    found = []
    if substring:
        lowered = text.lower()
        for term in terms:
            if term.lower() in lowered:
                found.append(term)
    else:
        for term in terms:
            if re.search(rf"(?<!\w){re.escape(term)}(?!\w)", text, re.IGNORECASE):
                found.append(term)
    return found


def _pack_root(pack_dir=None):
    if pack_dir is not None:
        return Path(pack_dir)
    return resources.files("mtriage") / "rules_data"


def _read_wordlist(root, lang: str) -> tuple[str, ...]:
    path = root / lang / "ovs.txt"
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, NotADirectoryError):
        return ()
    terms = [ln.strip() for ln in text.splitlines()]
    return tuple(t for t in terms if t and not t.startswith("#"))


def _read_punct_map(root, pair_name: str) -> dict[str, str]:
    path = root / pair_name / "punct.map"
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, NotADirectoryError):
        raise RuleError(f"missing punctuation map for pair {pair_name!r}") from None
    mapping: dict[str, str] = {}
    for ln in text.splitlines():
        ln = ln.rstrip("\n")
        if not ln or ln.startswith("#"):
            continue
        try:
            src_char, targets = ln.split("\t", 1)
        except ValueError:
            raise RuleError(f"{path}: bad line {ln!r}, expected <char>\\t<targets>")
        mapping[src_char] = targets
    return mapping


_QUESTION_STYLES = {"es": "inverted", "zh": "fullwidth"}


def load_language_pack(language_pair: tuple[str, str], pack_dir=None) -> LanguagePack:
    """Load OVS lists and the punctuation map for a language pair."""
    src_lang, tgt_lang = language_pair
    root = _pack_root(pack_dir)
    pair_name = f"{src_lang}-{tgt_lang}"
    punct_map = _read_punct_map(root, pair_name)
    return LanguagePack(
        pair=(src_lang, tgt_lang),
        punct_map=punct_map,
        source_ovs=_read_wordlist(root, src_lang),
        target_ovs=_read_wordlist(root, tgt_lang),
        ovs_substring=tgt_lang == "zh",
        question_style=_QUESTION_STYLES.get(tgt_lang, "ascii"),
    )


def _punct_count_rule(name: str, char: str, pack: LanguagePack) -> UnitTestRule:
    allowed = pack.punct_map.get(char, char)

    def src(text: str) -> list[str]:
        return [char] * text.count(char)

    def trn(text: str) -> list[str]:
        return [char] * sum(text.count(c) for c in allowed)

    return UnitTestRule(name, SET_EQUALITY, src, trn, multiset=True, language_pack=pack)


def builtin_rules(
    language_pair: tuple[str, str],
    pack_dir=None,
    emoji_multiset: bool = False,
) -> list[UnitTestRule]:
    """The bundled rule suite for a supported language pair.

    Set semantics for emoji by default (repeated emoji are not a translation
    error); pass emoji_multiset=True to compare exact repetition counts.
    """
    pack = load_language_pack(language_pair, pack_dir)
    style = pack.question_style
    rules = [
        UnitTestRule(
            "emoji", SET_EQUALITY, emoji_codepoints, emoji_codepoints,
            multiset=emoji_multiset, language_pack=pack,
        ),
        UnitTestRule("url", PRESENCE_IMPLICATION, urls, urls, language_pack=pack),
        UnitTestRule(
            "number", SET_EQUALITY, number_sequences, number_sequences,
            multiset=True, language_pack=pack,
        ),
        UnitTestRule(
            "roman-numeral", SET_EQUALITY, roman_numerals, roman_numerals,
            language_pack=pack,
        ),
        UnitTestRule(
            "question", TERMINAL_PUNCTUATION,
            _terminal_marker("question", "ascii", "?", "？", "¿"),
            _terminal_marker("question", style, "?", "？", "¿"),
            language_pack=pack,
        ),
        UnitTestRule(
            "exclamation", TERMINAL_PUNCTUATION,
            _terminal_marker("exclamation", "ascii", "!", "！", "¡"),
            _terminal_marker("exclamation", style, "!", "！", "¡"),
            language_pack=pack,
        ),
    ]
    if pack.target_ovs:
        rules.append(
            UnitTestRule(
                "ovs", ABSENCE_IMPLICATION,
                lambda t: _ovs_matches(t, pack.source_ovs, substring=False),
                lambda t: _ovs_matches(t, pack.target_ovs, substring=pack.ovs_substring),
                language_pack=pack,
            )
        )
    else:
        warnings.warn(f"empty OVS list for {language_pair}; ovs rule disabled")
    rules.append(_punct_count_rule("comma", ",", pack))
    rules.append(_punct_count_rule("period", ".", pack))
    _check_unique(rules)
    return rules


def _check_unique(rules: list[UnitTestRule]):
    seen: set[str] = set()
    for rule in rules:
        if rule.name in seen:
            raise RuleError(f"duplicate rule name {rule.name!r}")
        seen.add(rule.name)


def run_rules(corpus: Corpus, rules: list[UnitTestRule]) -> list[RuleOutcome]:
    """Evaluate every rule on every record and flag failures on the records."""
    _check_unique(rules)
    for rule in rules:
        if rule.language_pack and rule.language_pack.pair != corpus.language_pair:
            raise RuleError(
                f"rule {rule.name!r} uses language pack {rule.language_pack.pair}, "
                f"corpus is {corpus.language_pair}"
            )
    outcomes: list[RuleOutcome] = []
    for rec in corpus.records:
        rec.failed_rules = set()
        for rule in rules:
            outcome = rule.evaluate(rec.id, rec.source_text, rec.translation_text)
            outcomes.append(outcome)
            if not outcome.passed:
                rec.failed_rules.add(rule.name)
    return outcomes
