import numpy as np

PRODUCT_CASE = [
    {
        "kwargs": {"a": (1 + 0j, 2.0), "b": (3 + 0j, 2.0)},
        "result": (2 + 0j, 1.0),
    },
    {
        "kwargs": {"a": (0.5 - 1j, 0.3), "b": (0j, np.inf)},
        "result": (0.5 - 1j, 0.3),
    },
    {
        "kwargs": {"a": (0j, np.inf), "b": (-2 + 2j, 4.0)},
        "result": (-2 + 2j, 4.0),
    },
    {
        "kwargs": {"a": (1 + 1j, 0.0), "b": (5 + 0j, 1.0)},
        "result": (1 + 1j, 0.0),
    },
    {
        "kwargs": {"a": (0j, np.inf), "b": (0j, np.inf)},
        "result": (0j, np.inf),
    },
]

DIVIDE_CASE = [
    {
        "kwargs": {"num": (0j, 1.0), "den": (0j, 2.0)},
        "result": (0j, 2.0),
    },
    # precision 1/2 - 1 < 0 is clamped to the numerator mean
    {
        "kwargs": {"num": (1 + 0j, 2.0), "den": (0j, 1.0)},
        "result": (1 + 0j, 1e12),
    },
    {
        "kwargs": {"num": (2 + 0j, 1.0), "den": (0j, np.inf)},
        "result": (2 + 0j, 1.0),
    },
    {
        "kwargs": {"num": (3j, 0.0), "den": (1 + 0j, 1.0)},
        "result": (3j, 0.0),
    },
]
