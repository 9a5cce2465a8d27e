"""Regenerate the recorded service fixtures used by the component tests.

Run from the repository root after installing the Python package:

    python3 frontend/tests/fixtures/generate.py
"""
import json
from pathlib import Path

from fastapi.testclient import TestClient

from prefland.config import ExperimentConfig
from prefland.service import create_app

OUT = Path(__file__).parent


def main() -> None:
    config = ExperimentConfig(max_iter=6, seed=13, sample_count=400, rollouts_per_query=10)
    app = create_app(config)
    with TestClient(app) as client:
        (OUT / "posterior_initial.json").write_text(
            json.dumps(client.get("/posterior").json()) + "\n"
        )
        bundle = client.get("/query").json()
        (OUT / "bundle.json").write_text(json.dumps(bundle) + "\n")
        for _ in range(5):
            query = client.get("/query").json()
            choice = "a" if query["iteration"] % 2 else "b"
            client.post("/preference", json={"token": query["token"], "choice": choice})
        (OUT / "posterior_late.json").write_text(
            json.dumps(client.get("/posterior").json()) + "\n"
        )
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
