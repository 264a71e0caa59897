from fractions import Fraction

import numpy as np
import pytest

from oneshot_pir.config import EXAMPLE_NOISE_4_2_2
from oneshot_pir.errors import (ConstructionUnsupportedError, InfeasibleParametersError, NotRotatableError,
                                ParameterError, ValidationError)
from oneshot_pir.mds import PirParams, encode, make_generator, random_messages
from oneshot_pir.oneshot import (_assemble, build_explicit_oneshot, build_geometrical_oneshot, build_secret_sharing_oneshot,
                                 derive_decoding_equations, geometrical_spec, oneshot_rate, rotate_oneshot,
                                 rotated_positions, rounds_needed, run_oneshot_rounds, systematic_noise_code,
                                 verify_oneshot)


@pytest.fixture
def explicit422():
    return build_explicit_oneshot(PirParams(4, 2, 2, 2, 3), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2")


def test_explicit_decoding_equation(explicit422):
    s = explicit422
    assert s.noise_positions == (1, 2, 3) and s.mixed_positions == (4,)
    assert s.decoding_equations == {4: (2, 2, 2)}       # (-1, 2, 2) = (-1, -1, -1) mod 3
    assert s.signed_equation(4) == (-1, -1, -1)
    assert oneshot_rate(s) == Fraction(1, 4)


def test_explicit_rotation(explicit422):
    r1 = rotate_oneshot(explicit422, 1)
    assert r1.noise_positions == (1, 2, 4) and r1.mixed_positions == (3,)
    assert rotated_positions((1, 2, 3), 4, 1) == (1, 2, 4)
    assert rotated_positions(rotated_positions((1, 2, 3), 4, 1), 4, 2) == rotated_positions((1, 2, 3), 4, 3)


def test_explicit_rejected_in_characteristic_two():
    with pytest.raises(InfeasibleParametersError):
        build_explicit_oneshot(PirParams(4, 2, 2, 2, 2), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2")


def test_rank_deficient_noise_code_rejected():
    bad = ((1, 0), (2, 0), (1, 1), (1, 2))          # rows 1 and 2 are parallel
    with pytest.raises(ValidationError):
        build_explicit_oneshot(PirParams(4, 2, 2, 2, 5), bad, (4,), "example-4-2")


def test_decoding_equation_solver_matches_scheme(explicit422):
    s = explicit422
    alpha = derive_decoding_equations(s.noise_code, s.generator, 4, s.noise_positions)
    assert tuple(int(a) for a in alpha) == (2, 2, 2)


def test_geometrical_example():
    s = build_geometrical_oneshot(4, 2, 2, 3, "example-4-2")
    assert s.noise_code.tolist() == [[1, 0], [0, 1], [2, 2], [2, 1]]
    assert s.signed_equation(4) == (1, 1, -1)
    assert s.r == 3 and s.kind == "geometrical"
    gs = geometrical_spec(4, 2, 2, make_generator(4, 2, 3, "example-4-2"))
    assert gs.l0 >= 1


def test_geometrical_ratio_condition_unsupported():
    with pytest.raises(ConstructionUnsupportedError):
        build_geometrical_oneshot(7, 3, 2, 11)


GEOMETRICAL_OK = [(4, 2, 2, 5), (5, 2, 2, 7), (5, 1, 2, 7), (4, 1, 1, 5), (5, 3, 2, 7), (6, 2, 3, 7),
                  (6, 2, 2, 7), (5, 2, 3, 7), (7, 2, 2, 11)]


@pytest.mark.parametrize("N,K,T,q", GEOMETRICAL_OK)
def test_geometrical_all_rotations_verify(N, K, T, q):
    s = build_geometrical_oneshot(N, K, T, q)
    for t in range(N):
        assert verify_oneshot(rotate_oneshot(s, t), trials=20).ok


@pytest.mark.parametrize("N,T,q", [(2, 1, 3), (4, 1, 5), (4, 2, 3), (5, 3, 7), (6, 2, 5)])
def test_secret_sharing_all_rotations_verify(N, T, q):
    s = build_secret_sharing_oneshot(N, T, 2, q)
    assert s.r == T
    for t in range(N):
        assert verify_oneshot(rotate_oneshot(s, t), trials=20).ok


def test_secret_sharing_noise_code():
    assert systematic_noise_code(3, 1, 2).tolist() == [[1], [1], [1]]
    assert systematic_noise_code(4, 2, 3).tolist() == [[1, 0], [0, 1], [1, 1], [1, 2]]
    with pytest.raises(InfeasibleParametersError):
        systematic_noise_code(5, 2, 3)


def test_verify_detects_corrupted_equation(explicit422):
    s = explicit422
    broken = type(s)(s.params, s.noise_code, s.noise_positions, s.mixed_positions, s.generator,
                     {4: (1, 2, 2)}, s.kind, s.offset)
    check = verify_oneshot(broken, trials=10)
    assert not check.ok and "server 4" in check.failures[0]


def test_rounds_and_worked_retrieval(explicit422):
    s = explicit422
    assert rounds_needed(s, 2) == 2 and rounds_needed(s, 4) == 4
    db = encode([[1, 2], [0, 1]], s.generator)
    run = run_oneshot_rounds(s, db, 1, np.random.default_rng(0), informative="basis")
    assert run.message.tolist() == [1, 2] and run.rounds == 2
    assert run.functionals.tolist() == [[1, 2], [1, 1]]    # W1 + 2 W2, then W1 + W2
    assert run.values.tolist() == [2, 0]


@pytest.mark.parametrize("desired", [1, 2, 3])
def test_random_rounds_recover(desired):
    s = build_secret_sharing_oneshot(4, 2, 3, 5)
    g = np.random.default_rng(desired)
    db = encode(random_messages(3, 6, 5, g), s.generator)
    run = run_oneshot_rounds(s, db, desired, g)
    assert run.message.tolist() == db.messages[desired - 1].tolist()


def test_rotation_failure_reported():
    # a zero noise row decodes trivially at offset 0 but leaves server 3 unreachable at offset 1
    g = make_generator(4, 2, 5, "example-4-2")
    s = _assemble(PirParams(4, 2, 1, 2, 5), [[1, 0], [1, 0], [0, 1], [0, 0]], (1, 2, 3), g, "explicit")
    assert s.decoding_equations == {4: (0, 0, 0)}
    with pytest.raises(NotRotatableError):
        rotate_oneshot(s, 1)
    with pytest.raises(ParameterError):
        rotate_oneshot(s, 4)


def test_bad_informative_mode(explicit422):
    db = encode([[1, 2], [0, 1]], explicit422.generator)
    with pytest.raises(ParameterError):
        run_oneshot_rounds(explicit422, db, 1, np.random.default_rng(0), informative="nope")
