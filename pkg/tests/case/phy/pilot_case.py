PILOT_PATTERN_CASE = [
    {
        "kwargs": {"n_users": 2, "k": 8, "kp": 2},
        "result": [[0, 4], [2, 6]],
    },
    {
        "kwargs": {"n_users": 1, "k": 4, "kp": 4},
        "result": [[0, 1, 2, 3]],
    },
    {
        "kwargs": {"n_users": 2, "k": 256, "kp": 16},
        "result": [list(range(0, 256, 16)), list(range(8, 256, 16))],
    },
    {
        "kwargs": {"n_users": 3, "k": 12, "kp": 2},
        "result": [[0, 6], [2, 8], [4, 10]],
    },
]

INVALID_PILOT_CASE = [
    {"kwargs": {"n_users": 3, "k": 8, "kp": 2}},
    {"kwargs": {"n_users": 2, "k": 8, "kp": 5}},
    {"kwargs": {"n_users": 2, "k": 256, "kp": 3}},
    {"kwargs": {"n_users": 0, "k": 8, "kp": 2}},
]
