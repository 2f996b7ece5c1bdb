"""Simulate every preset from its documented initial condition and write
tables plus SVG plots under figures/<preset>/.

    python scripts/reproduce_figures.py            # all presets
    python scripts/reproduce_figures.py ks-b ks-d
"""

import sys
from pathlib import Path

from hetnet.cli import regime_line, simulate
from hetnet.models import PRESET_PARAMS
from hetnet.scenario import AnalysisSpec, preset_scenario

ROOT = Path(__file__).resolve().parent.parent


def run(preset: str) -> None:
    dest = ROOT / "figures" / preset
    dest.mkdir(parents=True, exist_ok=True)
    sc = preset_scenario(preset)
    sc.analysis = AnalysisSpec(itinerary=True, ratios=True, pentacle=preset.startswith("rpssl"),
                               indices=True, plots=True)
    sc.output = str(dest)
    summary = simulate(sc, dest)
    run = summary["runs"][0]
    tail = " ".join(run["itinerary"][-9:])
    print(f"{preset:12s} {regime_line(preset)}")
    print(f"{'':12s} {len(run['itinerary'])} episodes, tail {tail}")
    if run.get("edge_labels"):
        print(f"{'':12s} edge labels ...{run['edge_labels'][-20:]}")
    ratios = run.get("loop_ratios")
    if ratios is not None and len(ratios):
        print(f"{'':12s} last loop ratios " + " ".join(f"{r:.3f}" for r in ratios[-5:]))


def main(argv):
    for preset in argv or sorted(PRESET_PARAMS):
        run(preset)


if __name__ == "__main__":
    main(sys.argv[1:])
