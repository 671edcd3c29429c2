"""dubpair: build paired bilingual speech corpora from dubbed media tracks.

The package converts per-title audio tracks plus SRT subtitle files into a
filtered, speaker-labeled corpus of aligned utterance pairs with discrete-unit
representations, and provides the evaluation metrics used to report on it.
"""

__version__ = "0.1.0"
