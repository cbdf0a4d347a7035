"""RNG construction, float formatting, and the worker-pool map."""

import numpy as np

from routedbell.util import fmt17, make_rng, parallel_map, shard_rng


def _square(x):
    return x * x


def test_make_rng_is_deterministic():
    a = make_rng(7).random(16)
    b = make_rng(7).random(16)
    assert np.array_equal(a, b)
    c = make_rng(8).random(16)
    assert not np.array_equal(a, c)


def test_shard_rng_reproduces_and_separates_streams():
    a0 = shard_rng(11, 0).random(8)
    a0_again = shard_rng(11, 0).random(8)
    a1 = shard_rng(11, 1).random(8)
    assert np.array_equal(a0, a0_again)
    assert not np.array_equal(a0, a1)


def test_fmt17_round_trips_doubles_exactly():
    rng = make_rng(123)
    values = [0.0, 1.0, -1.0, 2.0 ** -52, np.pi, 2.0 * np.sqrt(2.0)]
    values += [float(v) for v in rng.standard_normal(50)]
    values += [float(v * 10.0 ** int(e)) for v, e in
               zip(rng.standard_normal(50), rng.integers(-12, 12, 50))]
    for x in values:
        assert float(fmt17(x)) == x


def test_parallel_map_preserves_order():
    items = list(range(23))
    expected = [i * i for i in items]
    assert parallel_map(_square, items, jobs=1) == expected
    assert parallel_map(_square, items, jobs=3) == expected


def test_parallel_map_empty_and_singleton():
    assert parallel_map(_square, [], jobs=4) == []
    assert parallel_map(_square, [5], jobs=4) == [25]
