"""Adjacent-area corridor constraints (neighbouring setpoints may not drift apart)."""
import numpy as np


def build_corridor(n: int, two_sided: bool = False) -> np.ndarray:
    """
    Return the corridor matrix D for users laid out along a line.

    One-sided: row j has +1 at j and -1 at j+1, giving c = n - 1 rows.
    Two-sided: the one-sided rows followed by their negations, c = 2(n - 1).
    """
    if n < 2:
        return np.zeros((0, max(n, 0)))
    rows = np.zeros((n - 1, n))
    index = np.arange(n - 1)
    rows[index, index] = 1.0
    rows[index, index + 1] = -1.0
    if two_sided:
        return np.vstack([rows, -rows])
    return rows
