import numpy as np
import pytest

from oneshot_pir.config import PRESETS
from oneshot_pir.errors import EnumerationInfeasibleError
from oneshot_pir.linalg import rank_mod
from oneshot_pir.protocol import (assemble, answer, decode_message, enumerate_randomness, enumeration_size,
                                  functional_matrix, sample_randomness, substream, view_distribution)


def test_substreams_are_reproducible_and_distinct():
    a = substream(3, "queries", 1).integers(0, 1 << 30, 4)
    b = substream(3, "queries", 1).integers(0, 1 << 30, 4)
    c = substream(3, "queries", 2).integers(0, 1 << 30, 4)
    assert (a == b).all() and not (a == c).all()


@pytest.fixture(scope="module")
def layout():
    return PRESETS["ss-4-1-2-m2"].layout(1)


def test_layout_shape(layout):
    assert layout.per_server_counts() == [2, 2, 1, 1]
    assert layout.n_informative == layout.L == 4
    assert layout.dim == layout.M * layout.blk


def test_informative_functionals_full_rank(layout):
    free, info = sample_randomness(layout, substream(0, "t"), 50)
    for i in range(50):
        assert rank_mod(functional_matrix(layout, info[i]), layout.q) == layout.L


def test_batch_decoding(layout):
    cfg = PRESETS["ss-4-1-2-m2"]
    from oneshot_pir.mds import encode, random_messages
    scheme = cfg.build_scheme()
    db = encode(random_messages(2, 4, 3, substream(0, "m")), scheme.generator)
    free, info = sample_randomness(layout, substream(1, "q"), 20)
    resp = answer(layout, assemble(layout, free, info), np.asarray(db.stored))
    for i in range(20):
        assert decode_message(layout, info[i], resp[i]).tolist() == db.messages[0].tolist()


def test_noise_support_restricts_values(layout):
    free, _ = sample_randomness(layout, substream(0, "n"), 30, noise_support=[0, 1])
    assert set(np.unique(free)) <= {0, 1}


def test_enumeration_counts_and_limit():
    small = PRESETS["one-time-pad"].layout(1)
    assert enumeration_size(small) == 8          # raw states, before the informative rank filter
    total = sum(len(f) for f, _ in enumerate_randomness(small))
    assert total == 4
    counts, n = view_distribution(small, (1,))
    assert n == 4 and sum(counts.values()) == 4
    big = PRESETS["geo-4-2-2-m3"].layout(1)
    with pytest.raises(EnumerationInfeasibleError):
        list(enumerate_randomness(big, limit=1000))
