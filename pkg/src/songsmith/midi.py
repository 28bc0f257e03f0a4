"""Standard MIDI File output (format 0, 480 ticks per quarter) and a reader.

The writer emits one track: a tempo meta event, note-on/note-off pairs at
velocity 90, and end-of-track.  Tick positions come from exact rational
beat offsets times 480, so files never drift however long the score.  The
reader exists as the inverse for tests and for serving variant audio data;
it understands running status but otherwise expects the subset this writer
produces.
"""

from __future__ import annotations

import struct
from fractions import Fraction

from .score import Score, ScoreError

TICKS_PER_QUARTER = 480
NOTE_VELOCITY = 90


class MidiError(ValueError):
    """Raised for byte streams that are not a readable format-0 file."""


def _vlq(value: int) -> bytes:
    """Variable-length quantity encoding."""
    if value < 0:
        raise ValueError("delta times cannot be negative")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def beats_to_ticks(beats) -> int:
    ticks = Fraction(beats) * TICKS_PER_QUARTER
    if ticks.denominator != 1:
        raise ScoreError(f"offset {beats} beats is not representable at 480 ticks/quarter")
    return int(ticks)


def write_midi(score: Score) -> bytes:
    """Render a Score as a type-0 SMF byte string."""
    score.validate()
    tempo_us = round(60_000_000 / score.tempo_bpm)

    # (tick, order, status, data1, data2); note-offs sort before note-ons.
    events = []
    for n in score.notes:
        on = beats_to_ticks(n.offset_beats)
        off = beats_to_ticks(n.offset_beats + n.duration.beats)
        events.append((on, 1, 0x90, n.midi_pitch, NOTE_VELOCITY))
        events.append((off, 0, 0x80, n.midi_pitch, 0))
    events.sort()

    track = bytearray()
    track += _vlq(0) + bytes((0xFF, 0x51, 0x03)) + tempo_us.to_bytes(3, "big")
    clock = 0
    for tick, _, status, d1, d2 in events:
        track += _vlq(tick - clock) + bytes((status, d1, d2))
        clock = tick
    track += _vlq(0) + bytes((0xFF, 0x2F, 0x00))

    header = struct.pack(">4sIHHH", b"MThd", 6, 0, 1, TICKS_PER_QUARTER)
    return header + struct.pack(">4sI", b"MTrk", len(track)) + bytes(track)


def read_midi(document: bytes) -> list[tuple[int, int, int]]:
    """Extract (midi_pitch, onset_ticks, duration_ticks), sorted by onset."""
    if len(document) < 14 or document[:4] != b"MThd":
        raise MidiError("missing MThd header chunk")
    hlen, fmt, ntrks, division = struct.unpack(">IHHH", document[4:14])
    if hlen != 6:
        raise MidiError(f"bad header length {hlen}")
    if fmt != 0 or ntrks != 1:
        raise MidiError(f"expected format 0 with one track, got format {fmt} / {ntrks} tracks")
    pos = 14
    if document[pos:pos + 4] != b"MTrk" or len(document) < pos + 8:
        raise MidiError("missing MTrk chunk")
    (tlen,) = struct.unpack(">I", document[pos + 4:pos + 8])
    pos += 8
    end = pos + tlen
    if end > len(document):
        raise MidiError("truncated track chunk")

    def read_vlq():
        nonlocal pos
        value = 0
        while True:
            if pos >= end:
                raise MidiError("truncated event stream")
            byte = document[pos]
            pos += 1
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value

    tick = 0
    status = None
    open_notes: dict[int, int] = {}
    finished = []
    saw_eot = False
    while pos < end:
        tick += read_vlq()
        byte = document[pos]
        if byte & 0x80:
            status = byte
            pos += 1
        elif status is None:
            raise MidiError("data byte with no running status")
        if status == 0xFF:
            meta_type = document[pos]
            pos += 1
            length = read_vlq()
            pos += length
            if meta_type == 0x2F:
                saw_eot = True
                break
            continue
        if status in (0xF0, 0xF7):
            length = read_vlq()
            pos += length
            continue
        kind = status & 0xF0
        n_data = 1 if kind in (0xC0, 0xD0) else 2
        if pos + n_data > end:
            raise MidiError("truncated event stream")
        data = document[pos:pos + n_data]
        pos += n_data
        if kind == 0x90 and data[1] > 0:
            open_notes[data[0]] = tick
        elif kind == 0x80 or (kind == 0x90 and data[1] == 0):
            start = open_notes.pop(data[0], None)
            if start is not None:
                finished.append((data[0], start, tick - start))
    if not saw_eot:
        raise MidiError("track ended without end-of-track meta event")
    if open_notes:
        raise MidiError("note-on without matching note-off")
    finished.sort(key=lambda e: (e[1], e[0]))
    return finished
