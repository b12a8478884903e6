import numpy as np

MSG_FZ_TO_X_CASE = [
    {
        "kwargs": {"cev_z": (0.5 - 0.5j, 0.2), "h_belief": (1 + 0j, 0.0)},
        "result": (0.5 - 0.5j, 0.2),
    },
    {
        "kwargs": {"cev_z": (3 - 1j, 0.7), "h_belief": (0j, 1.0)},
        "result": (0j, 0.7),
    },
    {
        "kwargs": {"cev_z": (1 + 0j, 0.9), "h_belief": (2j, 0.5)},
        "result": (-2j / 4.5, 0.2),
    },
]

MSG_FZ_TO_H_CASE = [
    # known pilot symbol
    {
        "kwargs": {"cev_z": (1 + 1j, 0.1), "x_mean": (1 + 1j) / np.sqrt(2), "x_var": 0.0},
        "result": (np.sqrt(2) + 0j, 0.1),
    },
    {
        "kwargs": {"cev_z": (0.4 + 2j, 0.3), "x_mean": 0j, "x_var": 1.0},
        "result": (0j, 0.3),
    },
]

INTERFERENCE_CASE = [
    # single user: the observation itself
    {
        "kwargs": {"vec_z": ([[[5 + 5j]]], [[[7.0]]]), "y": [[1 - 2j]], "noise_precision": 4.0},
        "result": ([[[1 - 2j]]], [[[0.25]]]),
    },
    # the other user explains y exactly
    {
        "kwargs": {
            "vec_z": ([[[9 + 0j], [1 + 1j]]], [[[3.0], [0.0]]]),
            "y": [[1 + 1j]],
            "noise_precision": 2.0,
        },
        "result": ([[[0j], [-8 + 1j]]], [[[0.5], [3.5]]]),
    },
    {
        "kwargs": {
            "vec_z": ([[[1 + 0j], [2j], [-1 - 1j]]], [[[0.1], [0.2], [0.3]]]),
            "y": [[2 + 2j]],
            "noise_precision": 10.0,
        },
        "result": ([[[3 + 1j], [2 + 3j], [1 + 0j]]], [[[0.6], [0.5], [0.4]]]),
    },
]

BELIEF_Z_CASE = [
    {
        "kwargs": {"x_mean": 0j, "x_var": 0.3, "h_mean": 0j, "h_var": 0.5},
        "result": (0j, 0.15),
    },
    {
        "kwargs": {"x_mean": 1 + 0j, "x_var": 0.1, "h_mean": 2 + 0j, "h_var": 0.2},
        "result": (2 + 0j, 0.62),
    },
    {
        "kwargs": {"x_mean": 1j, "x_var": 0.0, "h_mean": 1 - 1j, "h_var": 0.0},
        "result": (1 + 1j, 0.0),
    },
]
