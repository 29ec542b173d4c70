import numpy as np
import pytest

from scdselect.corpus import LabelCorpus, LabelSequence


def make_corpus(seqs, alphabet_size, ids=None, durations=None, source_tag="test"):
    """Corpus from plain label lists; ids default to u0, u1, ..."""
    sequences = []
    for i, labels in enumerate(seqs):
        sequences.append(
            LabelSequence(
                id=ids[i] if ids else f"u{i}",
                duration_s=durations[i] if durations else 1.0,
                labels=np.asarray(labels, dtype=np.int32),
            )
        )
    return LabelCorpus(alphabet_size=alphabet_size, sequences=tuple(sequences), source_tag=source_tag)


@pytest.fixture
def tiny_corpus():
    return make_corpus([[0, 0, 1], [1, 2], []], alphabet_size=3)
