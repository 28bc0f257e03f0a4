"""Co-creative songwriting engine.

Learns two random-forest classifiers from a corpus of lyric-annotated vocal
melodies (note duration, then scale degree) and generates ranked melody
variants per lyric line for a human to audition, select and assemble into a
song exported as MIDI or MusicXML.
"""

from .score import (
    DurationClass,
    KeySignature,
    LyricSyllable,
    NoteEvent,
    Score,
    ScoreError,
    TimeSignature,
)
from .meter import beat_strength, is_offbeat
from .musicxml import parse_musicxml, write_musicxml
from .midi import read_midi, write_midi
from .lexicon import Lexicon, word_rarity
from .features import (
    Dataset,
    build_melody_dataset,
    build_rhythm_dataset,
    extract_rows,
    lyrics_to_rows,
)
from .forest import (
    ClassDistribution,
    EvaluationReport,
    ForestParams,
    RandomForestModel,
    deserialize_model,
    evaluate,
    gini,
    importance,
    predict_distribution,
    serialize_model,
    stratified_split,
    train_forest,
)
from .generate import (
    GenerationParams,
    MelodyVariant,
    assemble_song,
    generate_line,
    generate_variants,
    realize_pitch,
    restrict,
    sample_exploit,
)
from .synthetic import degree_rule, duration_rule, make_synthetic_corpus
from .workspace import Workspace

__version__ = "0.1.0"
