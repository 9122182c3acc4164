"""Re-score the transcribed reference videos and print the side-by-side diff,
per-class metrics and the threshold sweep."""
import argparse
import json
from pathlib import Path

from stallmon.evaluation import THRESHOLD_SWEEP, evaluate, render_table, sweep
from stallmon.events import Event, parse_state

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "reference_videos.json"


def load(path):
    pred, gt = [], []
    for row in json.loads(Path(path).read_text())["videos"]:
        clip = f"video-{row['video']:02d}"
        for cls in ("horse", "person"):
            p = row[f"{cls}_pred"]
            g = p if row[f"{cls}_gt"] == "same" else row[f"{cls}_gt"]
            pred += [Event(cls, parse_state(s), a, b, clip) for a, b, s in p]
            gt += [Event(cls, parse_state(s), a, b, clip) for a, b, s in g]
    return pred, gt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixture", default=FIXTURE)
    ap.add_argument("--state-blind", action="store_true")
    args = ap.parse_args()

    pred, gt = load(args.fixture)
    report = evaluate(pred, gt, state_blind=args.state_blind)
    print(render_table(pred, gt, report))
    print()
    for clip, cls in report.groups:
        kinds = sorted({e.kind for e in report.errors_for(clip, cls)})
        print(f"{clip} {cls:6} {'correct' if not kinds else ', '.join(kinds)}")
    print()
    for t, r in sweep(pred, gt, THRESHOLD_SWEEP, args.state_blind).items():
        for cls, m in r.metrics.items():
            print(f"t-IoU>={t:.1f} {cls:6} P={m.precision:.3f} R={m.recall:.3f} F1={m.f1:.3f}")


if __name__ == "__main__":
    main()
