"""Explicit (4,2,2) one-shot scheme over F_3: decoding equation, rotations, and two retrieval rounds."""

import numpy as np

from oneshot_pir.config import EXAMPLE_NOISE_4_2_2
from oneshot_pir.mds import PirParams, encode
from oneshot_pir.oneshot import build_explicit_oneshot, rotate_oneshot, run_oneshot_rounds, verify_oneshot


def main():
    s = build_explicit_oneshot(PirParams(4, 2, 2, 2, 3), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2")
    print(s.describe())
    for t in range(s.N):
        rot = rotate_oneshot(s, t)
        print(f"offset {t}: noise at {rot.noise_positions}, verified={verify_oneshot(rot).ok}")
    db = encode([[1, 2], [0, 1]], s.generator)
    run = run_oneshot_rounds(s, db, 1, np.random.default_rng(0), informative="basis")
    print(f"rounds: {run.rounds}")
    for row, v in zip(run.functionals.tolist(), run.values.tolist()):
        print(f"  retrieved {row} . W1 = {v}")
    print(f"W1 = {run.message.tolist()}")


if __name__ == "__main__":
    main()
