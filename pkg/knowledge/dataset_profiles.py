# Published statistics of the three public NL/LTL datasets.
# An adapter naming one of these profiles must reproduce the numbers exactly
# on ingestion, otherwise ingestion fails with StatMismatch.

DATASET_PROFILES = {
    "drone": {
        "description": "Drone planning: navigation commands over rooms, floors and landmarks (infix LTL).",
        "n_structures": 5,
        "n_formulas": 343,
        "n_aps": 12,
        "n_commands": 6185,
    },
    "cleanup": {
        "description": "Cleanup World: room navigation and object moving (prefix LTL, single-letter APs).",
        "n_structures": 4,
        "n_formulas": 39,
        "n_aps": 6,
        "n_commands": 3382,
    },
    "pick": {
        "description": "Pick-and-place: scan the table and pick cubes of some colours (prefix LTL).",
        "n_structures": 1,
        "n_formulas": 5,
        "n_aps": 5,
    },
}


def get_profile(name: str) -> dict:
    try:
        return DATASET_PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown dataset profile {name!r}; known: {sorted(DATASET_PROFILES)}") from None


if __name__ == "__main__":
    for name, profile in DATASET_PROFILES.items():
        print(f"{name}: {profile}")
