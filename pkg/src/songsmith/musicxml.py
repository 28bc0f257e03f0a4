"""MusicXML ingestion and export for single-voice lyric-annotated melodies.

Reads partwise MusicXML 3.x, plain or inside the compressed ``.mxl`` zip
container (via ``META-INF/container.xml``).  The supported subset is one
part, one voice, no chords or grace notes.  Rests are skipped but still
advance time; tied notes are merged into one event when the combined length
is a legal duration class; notes without a lyric inherit the previous
syllable and are flagged as melisma continuations.

Export always writes ``divisions=8`` (32nd-note grid), pads gaps with rests
and splits notes that cross a barline into tied segments, so parsing an
exported file reproduces the original score exactly.  Exported scores must
keep one key and time signature throughout; signature changes are an
ingestion-only feature.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass
from fractions import Fraction
from xml.etree import ElementTree as ET

from .meter import is_supported
from .score import (
    ALL_DURATION_CLASSES,
    DurationClass,
    KeySignature,
    LyricSyllable,
    NoteEvent,
    Score,
    ScoreError,
    TimeSignature,
    classify_pitch,
)

WRITE_DIVISIONS = 8

_STEP_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_SHARP_SPELLING = [
    ("C", 0), ("C", 1), ("D", 0), ("D", 1), ("E", 0), ("F", 0),
    ("F", 1), ("G", 0), ("G", 1), ("A", 0), ("A", 1), ("B", 0),
]
_FLAT_SPELLING = [
    ("C", 0), ("D", -1), ("D", 0), ("E", -1), ("E", 0), ("F", 0),
    ("G", -1), ("G", 0), ("A", -1), ("A", 0), ("B", -1), ("B", 0),
]
_TYPE_NAMES = {"whole": "whole", "half": "half", "quarter": "quarter",
               "8th": "eighth", "16th": "16th", "32nd": "32nd"}

# Classes writable on the 32nd grid, longest first, for greedy decomposition.
_WRITABLE = sorted(
    (d for d in ALL_DURATION_CLASSES if (d.beats * WRITE_DIVISIONS).denominator == 1),
    key=lambda d: -d.beats,
)


def _unwrap_container(data: bytes) -> bytes:
    """Return the rootfile bytes of a compressed .mxl, or the data unchanged."""
    if not data.startswith(b"PK\x03\x04"):
        return data
    try:
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            container = ET.fromstring(zf.read("META-INF/container.xml"))
            rootfile = container.find(".//rootfile")
            if rootfile is None or "full-path" not in rootfile.attrib:
                raise ScoreError("compressed container lacks a rootfile entry")
            return zf.read(rootfile.get("full-path"))
    except (zipfile.BadZipFile, KeyError) as exc:
        raise ScoreError(f"unreadable compressed container: {exc}") from exc


def _text(elem, tag, default=None):
    child = elem.find(tag)
    if child is None or child.text is None:
        return default
    return child.text.strip()


def _parse_pitch(note) -> int:
    pitch = note.find("pitch")
    if pitch is None:
        raise ScoreError("note without pitch or rest")
    step = _text(pitch, "step")
    octave = _text(pitch, "octave")
    if step not in _STEP_SEMITONES or octave is None:
        raise ScoreError(f"bad pitch element (step={step!r})")
    alter = int(round(float(_text(pitch, "alter", "0"))))
    midi = (int(octave) + 1) * 12 + _STEP_SEMITONES[step] + alter
    if not 0 <= midi <= 127:
        raise ScoreError(f"pitch {step}{octave} alter {alter} outside MIDI range")
    return midi


def _parse_lyric(note):
    """(text, syllabic) of the first sung lyric, or None for melisma/extend."""
    for lyric in note.findall("lyric"):
        text = _text(lyric, "text")
        if text:
            return text, _text(lyric, "syllabic", "single")
        if lyric.find("extend") is not None:
            return None
    return None


class _RawNote:
    __slots__ = ("offset", "in_measure", "measure", "beats", "midi",
                 "text", "syllabic", "melisma", "key", "time_sig")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])


def parse_musicxml(document: bytes) -> Score:
    """Parse one-part lyric-annotated MusicXML bytes into a Score."""
    data = _unwrap_container(document)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ScoreError(f"malformed XML: {exc}") from exc
    if root.tag != "score-partwise":
        raise ScoreError(f"expected a partwise score, got <{root.tag}>")

    parts = root.findall("part")
    if len(parts) != 1:
        raise ScoreError(f"expected exactly one part, found {len(parts)}")

    title = _text(root, "work/work-title") or _text(root, "movement-title") or ""

    divisions = None
    key = KeySignature(0, "major")
    time_sig = None
    offset = Fraction(0)
    raw: list[_RawNote] = []
    pending_tie = None  # _RawNote accumulating tied segments

    for measure_index, measure in enumerate(parts[0].findall("measure")):
        in_measure = Fraction(0)
        for elem in measure:
            if elem.tag == "attributes":
                div = _text(elem, "divisions")
                if div is not None:
                    divisions = int(div)
                key_elem = elem.find("key")
                if key_elem is not None:
                    key = KeySignature(
                        int(_text(key_elem, "fifths", "0")),
                        _text(key_elem, "mode", "major") or "major",
                    )
                time_elem = elem.find("time")
                if time_elem is not None:
                    ts = TimeSignature(
                        int(_text(time_elem, "beats")),
                        int(_text(time_elem, "beat-type")),
                    )
                    if not is_supported(ts):
                        raise ScoreError(
                            f"unsupported time signature {ts} (supported: 2/4 3/4 4/4 6/8)"
                        )
                    time_sig = ts
            elif elem.tag == "backup":
                raise ScoreError("multi-voice scores (backup elements) are not supported")
            elif elem.tag == "forward":
                if divisions is None:
                    raise ScoreError("forward element before divisions were declared")
                beats = Fraction(int(_text(elem, "duration")), divisions)
                offset += beats
                in_measure += beats
            elif elem.tag == "note":
                if elem.find("grace") is not None:
                    raise ScoreError("grace notes are not supported")
                if elem.find("chord") is not None:
                    raise ScoreError("chords are not supported")
                if divisions is None:
                    raise ScoreError("note before divisions were declared")
                if time_sig is None:
                    raise ScoreError("note before a time signature was declared")
                beats = Fraction(int(_text(elem, "duration")), divisions)
                if elem.find("rest") is not None:
                    offset += beats
                    in_measure += beats
                    continue
                midi = _parse_pitch(elem)
                tie_types = {t.get("type") for t in elem.findall("tie")}
                lyric = _parse_lyric(elem)

                if "stop" in tie_types and pending_tie is not None:
                    if pending_tie.midi != midi:
                        raise ScoreError("tie continues onto a different pitch")
                    pending_tie.beats += beats
                    if "start" not in tie_types:
                        _finish_tie(raw, pending_tie)
                        pending_tie = None
                else:
                    if pending_tie is not None:
                        raise ScoreError("tie started but never stopped")
                    note = _RawNote(
                        offset=offset, in_measure=in_measure, measure=measure_index,
                        beats=beats, midi=midi,
                        text=lyric[0] if lyric else None,
                        syllabic=lyric[1] if lyric else None,
                        melisma=lyric is None, key=key, time_sig=time_sig,
                    )
                    if "start" in tie_types:
                        pending_tie = note
                    else:
                        raw.append(note)
                offset += beats
                in_measure += beats

    if pending_tie is not None:
        raise ScoreError("tie started but never stopped")

    notes = _assemble_words(raw)
    return Score(title=title, notes=notes).validate()


def _finish_tie(raw, note):
    if DurationClass.from_beats(note.beats) is None:
        raise ScoreError(
            f"tied group of {note.beats} beats is not a supported duration"
        )
    raw.append(note)


def _assemble_words(raw: list[_RawNote]) -> list[NoteEvent]:
    """Resolve word text / syllable numbers and build the final events."""
    # Group begin..middle..end runs over the sung (non-melisma) notes.
    sung = [n for n in raw if not n.melisma]
    words: dict[int, tuple[str, int]] = {}  # id(raw note) -> (word_text, number)
    i = 0
    while i < len(sung):
        n = sung[i]
        if n.syllabic in ("single", "end", None):
            words[id(n)] = (n.text, 1)
            i += 1
            continue
        run = [n]
        j = i + 1
        while j < len(sung) and sung[j].syllabic in ("middle", "end"):
            run.append(sung[j])
            if sung[j].syllabic == "end":
                j += 1
                break
            j += 1
        word_text = "".join(m.text for m in run)
        for pos, m in enumerate(run, start=1):
            words[id(m)] = (word_text, pos)
        i = j

    notes = []
    prev_syllable = None
    for n in raw:
        if n.melisma:
            if prev_syllable is None:
                raise ScoreError("melisma continuation before any lyric")
            syllable = prev_syllable
        else:
            word_text, number = words[id(n)]
            syllabic = n.syllabic or "single"
            if syllabic not in ("single", "begin", "middle", "end"):
                raise ScoreError(f"bad syllabic value {syllabic!r}")
            syllable = LyricSyllable(
                text=n.text, syllabic_type=syllabic,
                word_text=word_text, syllable_number=number,
            )
            prev_syllable = syllable
        cls = DurationClass.from_beats(n.beats)
        if cls is None:
            raise ScoreError(
                f"duration of {n.beats} beats is outside the supported vocabulary"
            )
        degree, accidental = classify_pitch(n.midi, n.key)
        notes.append(NoteEvent(
            offset_beats=n.offset, offset_in_measure=n.in_measure,
            measure_index=n.measure, duration=cls, scale_degree=degree,
            accidental=accidental, midi_pitch=n.midi, syllable=syllable,
            key=n.key, time_sig=n.time_sig, melisma=n.melisma,
        ))
    return notes


def _spell(midi: int, key: KeySignature):
    table = _SHARP_SPELLING if key.fifths >= 0 else _FLAT_SPELLING
    step, alter = table[midi % 12]
    return step, alter, midi // 12 - 1


def _decompose(beats: Fraction) -> list[DurationClass]:
    """Greedy split of any 32nd-grid length into duration classes."""
    parts = []
    remaining = beats
    for d in _WRITABLE:
        while remaining >= d.beats:
            parts.append(d)
            remaining -= d.beats
    if remaining != 0:
        raise ScoreError(f"duration {beats} is not on the 32nd-note grid")
    return parts


@dataclass
class _Segment:
    """One writable slice of a note: the tail pieces continue a tie."""

    event: NoteEvent
    offset: Fraction
    beats: Fraction
    continues_tie: bool


def write_musicxml(score: Score) -> bytes:
    """Serialize a Score as plain partwise MusicXML at divisions=8."""
    score.validate()
    for n in score.notes:
        if (n.duration.beats * WRITE_DIVISIONS).denominator != 1:
            raise ScoreError(
                f"duration {n.duration} is not a multiple of 1/8 quarter; cannot export"
            )

    key = score.notes[0].key if score.notes else KeySignature(0, "major")
    time_sig = score.notes[0].time_sig if score.notes else TimeSignature(4, 4)
    for n in score.notes:
        if n.key != key or n.time_sig != time_sig:
            raise ScoreError("export requires one key and time signature throughout")

    root = ET.Element("score-partwise", version="3.1")
    if score.title:
        work = ET.SubElement(root, "work")
        ET.SubElement(work, "work-title").text = score.title
    part_list = ET.SubElement(root, "part-list")
    score_part = ET.SubElement(part_list, "score-part", id="P1")
    ET.SubElement(score_part, "part-name").text = "Voice"
    part = ET.SubElement(root, "part", id="P1")

    measure_beats = time_sig.measure_beats
    position = Fraction(0)
    note_iter = iter(score.notes)
    pending: _Segment | None = None
    nxt = next(note_iter, None)
    if nxt is not None:
        pending = _Segment(nxt, nxt.offset_beats, nxt.duration.beats, False)
    measure_number = 0

    while True:
        measure = ET.SubElement(part, "measure", number=str(measure_number + 1))
        if measure_number == 0:
            attrs = ET.SubElement(measure, "attributes")
            ET.SubElement(attrs, "divisions").text = str(WRITE_DIVISIONS)
            key_elem = ET.SubElement(attrs, "key")
            ET.SubElement(key_elem, "fifths").text = str(key.fifths)
            ET.SubElement(key_elem, "mode").text = key.mode
            time_elem = ET.SubElement(attrs, "time")
            ET.SubElement(time_elem, "beats").text = str(time_sig.numerator)
            ET.SubElement(time_elem, "beat-type").text = str(time_sig.denominator)
        measure_end = position + measure_beats

        while position < measure_end:
            if pending is None or pending.offset >= measure_end:
                _append_rest(measure, measure_end - position)
                position = measure_end
            elif pending.offset > position:
                _append_rest(measure, pending.offset - position)
                position = pending.offset
            else:
                end = pending.offset + pending.beats
                slice_end = min(end, measure_end)
                crosses = end > measure_end
                _append_note(measure, pending, slice_end - pending.offset, crosses)
                if crosses:
                    pending = _Segment(pending.event, measure_end, end - measure_end, True)
                    position = measure_end
                else:
                    position = end
                    nxt = next(note_iter, None)
                    pending = None if nxt is None else _Segment(
                        nxt, nxt.offset_beats, nxt.duration.beats, False
                    )

        measure_number += 1
        if pending is None:
            break

    ET.indent(root)
    buf = io.BytesIO()
    ET.ElementTree(root).write(buf, encoding="UTF-8", xml_declaration=True)
    return buf.getvalue()


def _append_rest(measure, beats: Fraction):
    for cls in _decompose(beats):
        note = ET.SubElement(measure, "note")
        ET.SubElement(note, "rest")
        ET.SubElement(note, "duration").text = str(int(cls.beats * WRITE_DIVISIONS))
        ET.SubElement(note, "type").text = _TYPE_NAMES[cls.base]
        if cls.dots:
            ET.SubElement(note, "dot")


def _append_note(measure, segment: _Segment, beats: Fraction, tie_onward: bool):
    event = segment.event
    pieces = _decompose(beats)
    for i, cls in enumerate(pieces):
        first = i == 0
        last = i == len(pieces) - 1
        note = ET.SubElement(measure, "note")
        pitch = ET.SubElement(note, "pitch")
        step, alter, octave = _spell(event.midi_pitch, event.key)
        ET.SubElement(pitch, "step").text = step
        if alter:
            ET.SubElement(pitch, "alter").text = str(alter)
        ET.SubElement(pitch, "octave").text = str(octave)
        ET.SubElement(note, "duration").text = str(int(cls.beats * WRITE_DIVISIONS))
        stops = (not first) or segment.continues_tie
        starts = (not last) or tie_onward
        if stops:
            ET.SubElement(note, "tie", type="stop")
        if starts:
            ET.SubElement(note, "tie", type="start")
        ET.SubElement(note, "type").text = _TYPE_NAMES[cls.base]
        if cls.dots:
            ET.SubElement(note, "dot")
        if stops or starts:
            notations = ET.SubElement(note, "notations")
            if stops:
                ET.SubElement(notations, "tied", type="stop")
            if starts:
                ET.SubElement(notations, "tied", type="start")
        if first and not segment.continues_tie and not event.melisma:
            syl = event.syllable
            lyric = ET.SubElement(note, "lyric", number="1")
            ET.SubElement(lyric, "syllabic").text = syl.syllabic_type
            ET.SubElement(lyric, "text").text = syl.text
